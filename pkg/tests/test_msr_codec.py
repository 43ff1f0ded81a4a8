from itertools import chain, combinations

import numpy as np
import pytest

from src.cube import partition, plane_to_index
from src.errors import DecodeError, MsrError, ParamError, RepairError
from src.msr_codec import DataCube, derive_params, derive_params_from_nk

from .conftest import field_codec, random_codeword, random_message, rdp_msr_codec, shortened_codec

SMALL = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)]


def _patterns(nodes, max_size):
    return chain.from_iterable(combinations(nodes, s) for s in range(1, max_size + 1))


def _erase(cube, E, rng):
    out = cube.copy()
    for x, y in E:
        out.symbols[x, y - 1] = rng.integers(0, 2, size=out.symbols[x, y - 1].shape)
    return out


def _plane_words(codec, cube):
    p = codec.params
    return cube.symbols.transpose(1, 0, 2, 3).reshape(p.parent_n, p.alpha, -1)


@pytest.fixture(scope="module")
def q4t5():
    codec = field_codec(4, 5)
    cube = random_codeword(codec, np.random.default_rng(45))
    return codec, cube


class Test_params(object):
    @pytest.mark.parametrize("q,t,want", [
        (4, 5, (20, 16, 19, 1024, 256)),
        (2, 3, (6, 4, 5, 8, 4)),
        (2, 2, (4, 2, 3, 4, 2)),
    ])
    def test_derive(self, q, t, want):
        p = derive_params(q, t)
        assert (p.n, p.k, p.d, p.alpha, p.beta) == want
        assert p.alpha == (p.d - p.k + 1) * p.beta

    def test_ratios(self):
        assert derive_params(2, 2).ratio == 0.75
        assert derive_params(2, 3).ratio == 0.625
        assert derive_params(4, 5).ratio == 0.296875
        assert round(derive_params(4, 5).ratio, 4) == 0.2969

    def test_field_choice(self):
        p = derive_params(4, 5)
        assert p.alphabet.m == 5 and p.alphabet.kind == "gf"
        assert derive_params(2, 2).alphabet.u == 2

    def test_d_n_minus_2(self):
        p = derive_params(2, 3, "n-2")
        assert (p.n, p.k, p.d, p.alpha, p.beta, p.r) == (6, 3, 4, 8, 4, 3)
        assert p.alpha == (p.d - p.k + 1) * p.beta
        assert p.theta_kind == "cauchy_identity"

    def test_numeric_d(self):
        assert derive_params(2, 3, 5).d_mode == "n-1"
        assert derive_params(2, 3, 4).d_mode == "n-2"
        with pytest.raises(ParamError):
            derive_params(2, 3, 3)

    @pytest.mark.parametrize("q,t,d", [(1, 3, "n-1"), (2, 1, "n-1"), (2, 3, "n-3")])
    def test_invalid(self, q, t, d):
        with pytest.raises(ParamError):
            derive_params(q, t, d)

    def test_rdp_params(self):
        p = derive_params(2, 3, base="rdp")
        assert p.alphabet.p == 5 and p.alphabet.m == 4
        with pytest.raises(ParamError):
            derive_params(3, 3, base="rdp")

    def test_from_nk(self):
        p = derive_params_from_nk(5, 3)
        assert (p.q, p.t, p.shorten_by, p.n, p.k, p.d, p.alpha, p.beta) == (2, 3, 1, 5, 3, 4, 8, 4)
        assert derive_params_from_nk(6, 4).shorten_by == 0
        for n, k in ((4, 0), (4, 3), (5, 5)):
            with pytest.raises(ParamError):
                derive_params_from_nk(n, k)


class Test_DataCube(object):
    def test_three_dim_gets_one_stripe(self):
        cube = DataCube(np.zeros((2, 3, 8), dtype=np.uint8))
        assert cube.stripes == 1 and (cube.q, cube.t, cube.alpha) == (2, 3, 8)

    def test_rejects_bad_shape(self):
        with pytest.raises(ParamError):
            DataCube(np.zeros((2, 3), dtype=np.uint8))

    def test_flat_is_node_major(self):
        sym = np.arange(2 * 2 * 4).reshape(2, 2, 4, 1)
        flat = DataCube(sym).flat()
        assert list(flat[:4, 0]) == list(sym[0, 0, :, 0])
        assert list(flat[4:8, 0]) == list(sym[1, 0, :, 0])
        assert list(flat[8:12, 0]) == list(sym[0, 1, :, 0])


class Test_encode(object):
    def test_zero_message(self):
        codec = field_codec(2, 3)
        cube = codec.encode_systematic(np.zeros(codec.params.message_symbols, dtype=np.uint8))
        assert not cube.symbols.any()

    @pytest.mark.parametrize("q,t", SMALL)
    def test_systematic_and_parity(self, q, t, rng):
        codec = field_codec(q, t)
        msg = random_message(codec, rng, stripes=3)
        cube = codec.encode_systematic(msg)
        assert np.array_equal(codec.cube_to_message(cube), msg)
        assert codec.verify_parity(cube, path="both")

    def test_linearity(self, rng):
        codec = field_codec(3, 2)
        m1, m2 = random_message(codec, rng), random_message(codec, rng)
        c12 = codec.encode_systematic(m1 ^ m2)
        assert c12.equals(codec.encode_systematic(m1) ^ codec.encode_systematic(m2))

    def test_wrong_message_length(self):
        codec = field_codec(2, 2)
        with pytest.raises(ParamError):
            codec.encode_systematic(np.zeros(5, dtype=np.uint8))

    @pytest.mark.parametrize("q,t", [(2, 2), (2, 3)])
    def test_generator_spans_the_null_space(self, q, t):
        codec = field_codec(q, t)
        p = codec.params
        GF = codec.field.gf
        G = GF(codec.encode_systematic(np.eye(p.message_symbols, dtype=codec.dtype)).flat().astype(np.int64))
        H = codec.scalar_view.dense()
        assert H.shape == (p.q * p.alpha, p.parent_n * p.alpha)
        assert not np.any(H @ G)
        assert np.linalg.matrix_rank(G) == p.message_symbols
        assert np.linalg.matrix_rank(H) == p.q * p.alpha


class Test_parity(object):
    @pytest.mark.parametrize("q,t", SMALL)
    def test_decoupled_planes_are_base_codewords(self, q, t, rng):
        codec = field_codec(q, t)
        cube = random_codeword(codec, rng, 100)
        B = codec.decouple(cube)
        assert codec.base.is_codeword(_plane_words(codec, B))
        fixed = codec.geom.fixed
        assert np.array_equal(B.symbols[fixed], cube.symbols[fixed])
        assert codec.couple_cube(B).equals(cube)

    def test_two_paths_agree(self, rng):
        codec = field_codec(2, 3)
        p = codec.params
        for i in range(100):
            cube = random_codeword(codec, rng)
            if i % 2:
                x, yi, z = rng.integers(p.q), rng.integers(p.t), rng.integers(p.alpha)
                cube.symbols[x, yi, z, 0] ^= int(rng.integers(1, 8))
            assert codec.verify_parity(cube, path="both") == (i % 2 == 0)

    def test_zero_cube_passes(self):
        codec = field_codec(4, 2)
        assert codec.verify_parity(codec.empty_cube(), path="both")

    def test_unknown_path(self):
        codec = field_codec(2, 2)
        with pytest.raises(ParamError):
            codec.verify_parity(codec.empty_cube(), path="sideways")


class Test_repair(object):
    @pytest.mark.parametrize("q,t", SMALL)
    @pytest.mark.parametrize("method", ["scaled", "generic"])
    def test_every_node(self, q, t, method, rng):
        codec = field_codec(q, t)
        p = codec.params
        cube = random_codeword(codec, rng, 3)
        for x, y in codec.real_nodes:
            tr = codec.repair_node(_erase(cube, [(x, y)], rng), x, y, method=method)
            assert np.array_equal(tr.recovered, cube.node(x, y))
            assert len(tr.helpers) == p.d
            assert tr.per_helper() == [p.beta] * p.d
            assert tr.total_download == p.repair_symbols
            assert tr.total_symbols == 3 * p.repair_symbols

    def test_q4_t5_reads_only_repair_planes(self, q4t5, rng):
        codec, cube = q4t5
        tr = codec.repair_node(_erase(cube, [(3, 1)], rng), 3, 1)
        assert len(tr.planes) == 256
        assert all(codec.geom.plane(z)[0] == 3 for z in tr.planes)
        assert tr.total_download == 19 * 256
        assert np.array_equal(tr.recovered, cube.node(3, 1))

    def test_fetch_sees_only_repair_planes(self, rng):
        codec = field_codec(3, 3)
        cube = random_codeword(codec, rng)
        asked = []

        def fetch(x, y, planes):
            asked.append(((x, y), tuple(planes)))
            return cube.node(x, y)[planes]

        tr = codec.repair_with(fetch, 1, 2, stripes=1)
        assert np.array_equal(tr.recovered, cube.node(1, 2))
        z0 = tuple(codec.geom.repair_plane_indices(1, 2))
        assert len(asked) == codec.params.d
        assert all(planes == z0 for _, planes in asked)
        assert (1, 2) not in {nd for nd, _ in asked}

    def test_bad_requests(self):
        codec = field_codec(2, 3)
        cube = codec.empty_cube()
        with pytest.raises(RepairError):
            codec.repair_node(cube, 0, 1, aloof=(1, 2))
        with pytest.raises(RepairError):
            codec.repair_node(cube, 0, 1, helpers=[(1, 1), (0, 2)])
        with pytest.raises(RepairError):
            codec.repair_node(cube, 2, 1)
        with pytest.raises(ParamError):
            codec.repair_node(cube, 0, 1, method="magic")


class Test_repair_n_minus_2(object):
    @pytest.mark.parametrize("q,t", [(2, 3), (3, 2)])
    def test_every_failed_aloof_pair(self, q, t, rng):
        codec = field_codec(q, t, "n-2")
        p = codec.params
        cube = random_codeword(codec, rng, 2)
        assert codec.verify_parity(cube, path="both")
        for failed in codec.real_nodes:
            for aloof in codec.real_nodes:
                if aloof[1] == failed[1]:
                    continue
                tr = codec.repair_node(_erase(cube, [failed, aloof], rng), *failed, aloof=aloof)
                assert np.array_equal(tr.recovered, cube.node(*failed))
                assert tr.aloof == aloof
                assert aloof not in tr.downloads
                assert tr.total_download == p.d * p.beta

    def test_aloof_from_helper_list(self, rng):
        codec = field_codec(2, 3, "n-2")
        cube = random_codeword(codec, rng)
        helpers = [nd for nd in codec.real_nodes if nd not in ((0, 1), (1, 3))]
        tr = codec.repair_node(cube, 0, 1, helpers=helpers)
        assert tr.aloof == (1, 3)
        assert np.array_equal(tr.recovered, cube.node(0, 1))

    def test_aloof_in_failed_section_is_rejected(self):
        codec = field_codec(2, 3, "n-2")
        with pytest.raises(RepairError):
            codec.repair_node(codec.empty_cube(), 0, 2, aloof=(1, 2))

    @pytest.mark.parametrize("q,t", [(2, 3), (3, 2)])
    def test_collect_q_plus_1(self, q, t, rng):
        codec = field_codec(q, t, "n-2")
        cube = random_codeword(codec, rng)
        for E in combinations(codec.real_nodes, q + 1):
            assert codec.collect_data(_erase(cube, E, rng), E).equals(cube)


class Test_collect(object):
    @pytest.mark.parametrize("q,t", [(2, 2), (2, 3), (3, 2)])
    @pytest.mark.parametrize("method", ["mixture", "generic"])
    def test_exhaustive(self, q, t, method, rng):
        codec = field_codec(q, t)
        cube = random_codeword(codec, rng, 2)
        for E in _patterns(codec.real_nodes, q):
            got = codec.collect_data(_erase(cube, E, rng), E, method=method)
            assert got.equals(cube), E

    @pytest.mark.parametrize("q,t", [(3, 3), (4, 2)])
    def test_random_patterns(self, q, t, rng):
        codec = field_codec(q, t)
        cube = random_codeword(codec, rng)
        nodes = codec.real_nodes
        for i in range(200):
            pick = rng.choice(len(nodes), size=q, replace=False)
            E = [nodes[j] for j in pick]
            method = "mixture" if i % 2 else "generic"
            assert codec.collect_data(_erase(cube, E, rng), E, method=method).equals(cube), E

    @pytest.mark.slow
    def test_random_patterns_q4_t4(self, rng):
        codec = field_codec(4, 4)
        cube = random_codeword(codec, rng)
        nodes = codec.real_nodes
        for _ in range(200):
            pick = rng.choice(len(nodes), size=4, replace=False)
            E = [nodes[j] for j in pick]
            assert codec.collect_data(_erase(cube, E, rng), E).equals(cube), E

    def test_worked_example_q4_t5(self, q4t5, rng):
        codec, cube = q4t5
        E = [(1, 2), (2, 2), (2, 3), (3, 3)]
        g = codec.geom
        scores = g.scores(E)
        z = plane_to_index((1, 2, 3, 1, 0), 4)
        assert scores[z] == 2
        assert scores[plane_to_index((1, 0, 1, 1, 0), 4)] == 0
        part = partition(E, g.plane(z))
        assert part.e2 == {(1, 2), (2, 3)}
        # B(1,2;z) pairs with A(2,2;(1,1,3,1,0))
        assert g.companion_plane[1, 1, z] == plane_to_index((1, 1, 3, 1, 0), 4)
        for method in ("mixture", "generic"):
            assert codec.collect_data(_erase(cube, E, rng), E, method=method).equals(cube)

    def test_no_erasures(self, rng):
        codec = field_codec(2, 2)
        cube = random_codeword(codec, rng)
        assert codec.collect_data(cube, []).equals(cube)

    def test_too_many_erasures(self):
        codec = field_codec(2, 3)
        with pytest.raises(DecodeError):
            codec.collect_data(codec.empty_cube(), [(0, 1), (1, 1), (0, 2)])

    def test_unknown_method(self):
        codec = field_codec(2, 3)
        with pytest.raises(ParamError):
            codec.collect_data(codec.empty_cube(), [(0, 1)], method="guess")


class Test_generic_rdp(object):
    def test_params(self):
        codec = rdp_msr_codec(5)
        p = codec.params
        assert (p.n, p.k, p.d, p.alpha, p.beta) == (6, 4, 5, 8, 4)
        assert codec.field is None and not codec.is_field

    def test_zero_message(self):
        codec = rdp_msr_codec(5)
        cube = codec.encode_systematic(np.zeros((32, 1), dtype=np.uint8))
        assert not cube.symbols.any()

    def test_encode_and_parity(self, rng):
        codec = rdp_msr_codec(5)
        cube = random_codeword(codec, rng, 4)
        assert int(cube.symbols.max()) < 16
        assert codec.verify_parity(cube)
        assert codec.base.is_codeword(_plane_words(codec, codec.decouple(cube)))
        with pytest.raises(MsrError):
            codec.verify_parity(cube, path="direct")

    def test_every_single_repair(self, rng):
        codec = rdp_msr_codec(5)
        cube = random_codeword(codec, rng, 4)
        for x, y in codec.real_nodes:
            tr = codec.repair_node(_erase(cube, [(x, y)], rng), x, y)
            assert np.array_equal(tr.recovered, cube.node(x, y))
            assert tr.total_download == 5 * 4

    def test_every_collection(self, rng):
        codec = rdp_msr_codec(5)
        cube = random_codeword(codec, rng, 4)
        for E in _patterns(codec.real_nodes, 2):
            assert codec.collect_data(_erase(cube, E, rng), E).equals(cube), E

    def test_mixture_needs_a_field(self):
        codec = rdp_msr_codec(5)
        with pytest.raises(ParamError):
            codec.collect_data(codec.empty_cube(), [(0, 1)], method="mixture")
        with pytest.raises(ParamError):
            codec.repair_node(codec.empty_cube(), 0, 1, method="scaled")


class Test_shortened(object):
    def test_roles(self):
        codec = shortened_codec(5, 3)
        assert codec.shortened_nodes == [(0, 1)]
        assert codec.systematic_nodes == [(1, 1), (0, 2), (1, 2)]
        assert codec.parity_nodes == [(0, 3), (1, 3)]
        assert len(codec.real_nodes) == 5

    def test_encode_repair_collect(self, rng):
        codec = shortened_codec(5, 3)
        p = codec.params
        cube = random_codeword(codec, rng, 2)
        assert not cube.node(0, 1).any()
        assert codec.verify_parity(cube, path="both")
        for x, y in codec.real_nodes:
            tr = codec.repair_node(_erase(cube, [(x, y)], rng), x, y)
            assert np.array_equal(tr.recovered, cube.node(x, y))
            assert len(tr.helpers) == p.d == 4
            assert tr.total_download == 4 * p.beta
        for E in _patterns(codec.real_nodes, 2):
            assert codec.collect_data(_erase(cube, E, rng), E).equals(cube), E

    def test_nonzero_shortened_node_fails_parity(self, rng):
        codec = shortened_codec(5, 3)
        cube = random_codeword(codec, rng)
        cube.symbols[0, 0, 3, 0] = 1
        assert not codec.verify_parity(cube)

    def test_shortened_node_cannot_be_erased(self):
        codec = shortened_codec(5, 3)
        with pytest.raises(ParamError):
            codec.collect_data(codec.empty_cube(), [(0, 1)])
        with pytest.raises(RepairError):
            codec.repair_node(codec.empty_cube(), 0, 1)
