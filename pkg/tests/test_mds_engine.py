from itertools import combinations

import numpy as np
import pytest

from src.errors import DecodeError, SingularSystemError, ThetaError
from src.gf_field import build_field, field_for
from src.mds_engine import (Theta, ThetaCode, build_theta, col_to_node, evaluation_points, left_inverse,
                            node_to_col, smds_decode, smds_solve, verify_mds)


def _codewords(theta, rng, count):
    """``count`` random codewords as an (n, count) array."""
    GF = theta.field.gf
    basis = GF(theta.matrix).null_space()                    # (n - rows, n)
    coeffs = GF(rng.integers(0, theta.field.size, size=(count, basis.shape[0])))
    return np.asarray(coeffs @ basis, dtype=np.int64).T.astype(theta.field.dtype)


class Test_columns(object):
    def test_node_column_order(self):
        assert node_to_col(0, 1, 4) == 0
        assert node_to_col(3, 1, 4) == 3
        assert node_to_col(0, 2, 4) == 4
        assert node_to_col(3, 5, 4) == 19
        for j in range(20):
            assert node_to_col(*col_to_node(j, 4), 4) == j

    def test_evaluation_points_are_distinct(self):
        f = build_field(3)
        assert evaluation_points(f, 5) == [1, 2, 4, 3, 6]
        pts = evaluation_points(f, 8)
        assert sorted(pts) == list(range(8))
        with pytest.raises(ThetaError):
            evaluation_points(f, 9)


class Test_build_theta(object):
    def test_gf4_vandermonde(self):
        theta = build_theta(2, 4, build_field(2))
        assert theta.matrix.shape == (2, 4)
        assert list(theta.matrix[0]) == [1, 1, 1, 1]
        assert list(theta.matrix[1]) == list(theta.points)
        assert verify_mds(theta)

    def test_q4_n20_gf32_is_mds(self):
        theta = build_theta(4, 20, field_for(20))
        assert theta.field.size == 32
        assert verify_mds(theta)

    def test_q3_n9_gf16_is_mds(self):
        assert verify_mds(build_theta(3, 9, field_for(9)))

    def test_cauchy_identity(self):
        f = build_field(3)
        theta = build_theta(3, 6, f, kind="cauchy_identity", section=2)
        assert np.array_equal(theta.matrix[:, 3:], np.eye(3, dtype=np.int64))
        assert theta.section == 2
        assert theta.col((1, 2)) == 3
        assert verify_mds(theta)

    def test_duplicate_column_is_not_mds(self):
        f = build_field(3)
        mat = build_theta(2, 5, f).matrix.copy()
        mat[:, 4] = mat[:, 1]
        assert not verify_mds(Theta.from_matrix(mat, f))

    def test_bad_shapes(self):
        f = build_field(2)
        with pytest.raises(ThetaError):
            build_theta(2, 5, f)
        with pytest.raises(ThetaError):
            build_theta(5, 4, f)
        with pytest.raises(ThetaError):
            build_theta(2, 4, f, kind="reed-solomon")


class Test_smds_decode(object):
    def test_any_erasures_up_to_rows(self, rng):
        theta = build_theta(3, 8, build_field(3))
        words = _codewords(theta, rng, 5)
        for size in range(4):
            for erased in combinations(range(8), size):
                got = smds_decode(theta, words, erased)
                for j in erased:
                    assert np.array_equal(got[j], words[j])

    def test_node_keyed_input(self, rng):
        theta = build_theta(2, 6, build_field(3), section=2)
        word = _codewords(theta, rng, 1)[:, 0]
        known = {theta.node(j): word[j] for j in range(6) if j not in (1, 4)}
        got = smds_decode(theta, known, [(1, 1), (0, 3)])
        assert got[1] == word[1]
        assert got[4] == word[4]

    def test_no_unknowns_checks_consistency(self, rng):
        theta = build_theta(2, 4, build_field(2))
        word = _codewords(theta, rng, 3)
        assert smds_decode(theta, word, []) == {}
        bad = word.copy()
        bad[0, 0] ^= 1
        with pytest.raises(DecodeError):
            smds_decode(theta, bad, [])

    def test_overdetermined_check(self, rng):
        theta = build_theta(3, 6, build_field(3))
        word = _codewords(theta, rng, 1)
        got = smds_decode(theta, word, [2], check=True)
        assert got[2][0] == word[2, 0]
        word[0, 0] ^= 1
        with pytest.raises(DecodeError):
            smds_decode(theta, word, [2], check=True)

    def test_too_many_unknowns(self, rng):
        theta = build_theta(2, 4, build_field(2))
        with pytest.raises(DecodeError):
            smds_decode(theta, _codewords(theta, rng, 1), [0, 1, 2])

    def test_column_scale_and_rhs_adjust(self, rng):
        f = build_field(4)
        theta = build_theta(3, 9, f)
        word = _codewords(theta, rng, 4)
        u = 2
        # solving for s with theta_j * u * s_j = theta_j * c_j gives s_j = c_j / u
        sol = smds_solve(theta, word, [0, 5], col_scale=[u, 1])
        assert np.array_equal(sol[0], f.scale(f.inv(u), word[0]))
        assert np.array_equal(sol[1], word[5])
        # moving a known column to the right-hand side by hand
        zeroed = word.copy()
        zeroed[7] = 0
        adjust = f.matvec(theta.matrix[:, [7]], word[[7]])
        sol2 = smds_solve(theta, zeroed, [0, 5], rhs_adjust=adjust)
        assert np.array_equal(sol2, word[[0, 5]])

    def test_singular_subsystem(self):
        f = build_field(3)
        mat = build_theta(2, 5, f).matrix.copy()
        mat[:, 4] = mat[:, 1]
        theta = Theta.from_matrix(mat, f)
        with pytest.raises(SingularSystemError):
            left_inverse(theta, (1, 4), (1, 1))


class Test_ThetaCode(object):
    def test_interface(self, rng):
        theta = build_theta(2, 6, build_field(3))
        code = ThetaCode(theta)
        assert (code.n, code.r, code.symbol_bits) == (6, 2, 3)
        words = _codewords(theta, rng, 3)
        assert code.is_codeword(words)
        sol = code.decode(words, [0, 3])
        assert np.array_equal(sol, words[[0, 3]])
        words[2, 1] ^= 5
        assert not code.is_codeword(words)
