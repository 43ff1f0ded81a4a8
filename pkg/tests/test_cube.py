from itertools import chain, combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.cube import (FIXED_POINT, CubeCoord, CubeGeometry, ErasurePattern, all_planes, companion,
                      index_to_plane, intersection_score, partition, pict, plane_incidence,
                      plane_to_index, repair_planes)
from src.errors import ParamError


def _subsets(nodes, max_size):
    return chain.from_iterable(combinations(nodes, s) for s in range(max_size + 1))


def _grid(q, t):
    return [(x, y) for y in range(1, t + 1) for x in range(q)]


EXAMPLE_E = [(0, 2), (1, 2), (2, 2), (2, 4)]
EXAMPLE_Z = (1, 2, 3, 1, 0)


class Test_planes(object):
    def test_enumeration_order(self):
        assert all_planes(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert plane_to_index((1, 2, 3, 1, 0), 4) == 1 * 256 + 2 * 64 + 3 * 16 + 1 * 4
        assert index_to_plane(plane_to_index(EXAMPLE_Z, 4), 4, 5) == EXAMPLE_Z

    def test_incidence(self):
        P = plane_incidence(EXAMPLE_Z, 4)
        assert P.shape == (4, 5)
        assert list(P.sum(axis=0)) == [1] * 5
        assert P[1, 0] == 1 and P[2, 1] == 1 and P[3, 2] == 1 and P[1, 3] == 1 and P[0, 4] == 1
        zero = plane_incidence((0, 0, 0), 3)
        assert list(zero[0]) == [1, 1, 1]
        assert not zero[1:].any()


class Test_scores(object):
    def test_worked_example(self):
        assert intersection_score(EXAMPLE_E, EXAMPLE_Z) == 1
        assert CubeGeometry(4, 5).max_score(EXAMPLE_E) == 2

    def test_empty_pattern(self):
        assert intersection_score([], (0, 1, 0)) == 0
        assert CubeGeometry(2, 3).max_score([]) == 0

    def test_max_score_is_number_of_erased_sections(self):
        g = CubeGeometry(2, 3)
        for E in _subsets(_grid(2, 3), 6):
            assert g.max_score(E) == len({y for _, y in E})

    @given(st.sets(st.tuples(st.integers(0, 2), st.integers(1, 3)), max_size=5),
           st.integers(0, 26))
    @settings(max_examples=60, deadline=None)
    def test_vectorised_scores(self, E, idx):
        g = CubeGeometry(3, 3)
        assert g.scores(E)[idx] == intersection_score(E, g.plane(idx))


class Test_partition(object):
    def test_worked_example(self):
        E = [(1, 2), (2, 2), (2, 3), (3, 3)]
        part = partition(E, (1, 2, 3, 1, 0))
        assert part.e0 == {(2, 2), (3, 3)}
        assert part.e1 == set()
        assert part.e2 == {(1, 2), (2, 3)}
        assert intersection_score(E, (1, 0, 1, 1, 0)) == 0

    def test_e1_when_partner_survives(self):
        part = partition([(1, 1)], (0, 0))
        assert part.e1 == {(1, 1)} and not part.e0 and not part.e2

    @pytest.mark.parametrize("q,t,max_size", [(2, 3, 6), (3, 2, 6), (3, 3, 4)])
    def test_disjoint_cover_and_score(self, q, t, max_size):
        planes = all_planes(q, t)
        for E in _subsets(_grid(q, t), max_size):
            for z in planes:
                part = partition(E, z)
                assert part.e0 | part.e1 | part.e2 == set(E)
                assert not (part.e0 & part.e1) and not (part.e0 & part.e2) and not (part.e1 & part.e2)
                assert len(part.e0) == intersection_score(E, z)

    def test_e2_companion_has_same_score_and_sits_in_e0(self):
        q, t = 2, 3
        for E in _subsets(_grid(q, t), 4):
            for z in all_planes(q, t):
                for x, y in partition(E, z).e2:
                    c = companion(CubeCoord(x, y, z))
                    assert intersection_score(E, c.z) == intersection_score(E, z)
                    assert (c.x, c.y) in partition(E, c.z).e2


class Test_companion(object):
    def test_worked_example(self):
        c = companion(CubeCoord(1, 1, (3, 0, 0, 0, 0)))
        assert c == CubeCoord(3, 1, (1, 0, 0, 0, 0))
        assert companion(c) == CubeCoord(1, 1, (3, 0, 0, 0, 0))

    def test_fixed_point(self):
        assert companion(CubeCoord(2, 3, (0, 1, 2))) is FIXED_POINT

    def test_involution_exhaustive(self):
        q, t = 3, 2
        for z in all_planes(q, t):
            for x, y in _grid(q, t):
                c = companion(CubeCoord(x, y, z))
                if x == z[y - 1]:
                    assert c is FIXED_POINT
                else:
                    assert c.y == y and c.x == z[y - 1] and c.z[y - 1] == x
                    assert companion(c) == CubeCoord(x, y, z)

    def test_vectorised_companion_plane(self):
        g = CubeGeometry(3, 3)
        for idx in range(g.alpha):
            z = g.plane(idx)
            for x, y in _grid(3, 3):
                c = companion(CubeCoord(x, y, z))
                want = idx if c is FIXED_POINT else plane_to_index(c.z, 3)
                assert g.companion_plane[x, y - 1, idx] == want
                assert g.fixed[x, y - 1, idx] == (c is FIXED_POINT)


class Test_repair_planes(object):
    def test_q4_t5(self):
        Z0 = repair_planes(3, 1, 4, 5)
        assert len(Z0) == 256
        assert all(z[0] == 3 for z in Z0)
        idx = CubeGeometry(4, 5).repair_plane_indices(3, 1)
        assert [plane_to_index(z, 4) for z in Z0] == list(idx)

    def test_sizes(self):
        assert len(repair_planes(0, 2, 2, 2)) == 2
        g = CubeGeometry(3, 3)
        for x, y in _grid(3, 3):
            assert len(g.repair_plane_indices(x, y)) == 9


class Test_pict(object):
    def test_no_erasures(self):
        out = pict([], (0, 1), 2)
        assert "(" not in out and "*" not in out
        assert len(out.splitlines()) == 2

    def test_marks_intersections(self):
        out = pict(EXAMPLE_E, EXAMPLE_Z, 4)
        assert out.count("*") == 1
        assert out.count("(") == len(EXAMPLE_E)

    def test_star_count_is_score(self):
        rng = np.random.default_rng(0)
        g = CubeGeometry(3, 4)
        grid = _grid(3, 4)
        for _ in range(30):
            pick = rng.choice(len(grid), size=3, replace=False)
            E = [grid[i] for i in pick]
            idx = int(rng.integers(g.alpha))
            assert pict(E, g.plane(idx), 3).count("*") == g.scores(E)[idx]


class Test_ErasurePattern(object):
    def test_matrix_and_sections(self):
        pat = ErasurePattern([(1, 2), (0, 1)], 2, 3)
        assert pat.sections() == [1, 2]
        assert pat.matrix().tolist() == [[1, 0, 0], [0, 1, 0]]
        assert (1, 2) in pat and len(pat) == 2
        assert list(pat) == [(0, 1), (1, 2)]

    def test_rejects_bad_nodes(self):
        with pytest.raises(ParamError):
            ErasurePattern([(2, 1)], 2, 3)
        with pytest.raises(ParamError):
            ErasurePattern([(0, 0)], 2, 3)
        with pytest.raises(ParamError):
            ErasurePattern([(0, 1), (0, 1)], 2, 3)


class Test_plane_groups(object):
    def test_groups_share_a_partition(self):
        g = CubeGeometry(3, 3)
        E = [(0, 1), (2, 1), (1, 3)]
        planes = np.arange(g.alpha)
        groups = g.plane_groups(planes, [1, 3])
        assert len(groups) == 9
        assert sorted(np.concatenate([p for _, p in groups]).tolist()) == list(range(27))
        for _, members in groups:
            parts = {partition(E, g.plane(i)) for i in members}
            assert len(parts) == 1
