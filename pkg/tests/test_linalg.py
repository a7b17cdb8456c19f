"""Factorization, triangularization and solve kernels."""

import numpy as np
import pytest

from mcckf.linalg import (
    NonFiniteInput,
    NotPositiveDefinite,
    NotSymmetric,
    SingularFactor,
    cholesky_lower,
    condition_estimate,
    lower_triangularize,
    symmetrize,
    triangular_inverse,
    triangular_solve,
)

RNG = np.random.default_rng(20240517)


def random_spd(rng, dim, cond):
    """SPD matrix with prescribed condition number via a random rotation."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.logspace(0.0, -np.log10(cond), dim)
    return q @ np.diag(eigs) @ q.T


class TestCholeskyLower:
    def test_identity(self):
        assert np.array_equal(cholesky_lower(np.eye(3)), np.eye(3))

    def test_hand_2x2(self):
        # elimination by hand: l11 = 2, l21 = 2/2 = 1, l22 = sqrt(3 - 1)
        expected = np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]])
        l = cholesky_lower(np.array([[4.0, 2.0], [2.0, 3.0]]))
        np.testing.assert_allclose(l, expected, rtol=1e-15)
        np.testing.assert_allclose(l @ l.T, [[4.0, 2.0], [2.0, 3.0]], rtol=1e-15)

    def test_radar_measurement_noise_factor(self):
        # square root of a diagonal is the diagonal of square roots
        r = np.diag([1000.0**2, 0.017**2])
        np.testing.assert_allclose(
            cholesky_lower(r), np.diag([1000.0, 0.017]), rtol=1e-15
        )

    def test_reconstruction_property(self):
        for _ in range(200):
            dim = int(RNG.integers(1, 11))
            cond = 10.0 ** RNG.uniform(0, 6)
            a = random_spd(RNG, dim, cond)
            l = cholesky_lower(a)
            assert np.allclose(np.triu(l, 1), 0.0)
            assert (np.diag(l) > 0).all()
            err = np.linalg.norm(l @ l.T - a) / np.linalg.norm(a)
            assert err < 1e-12

    def test_rejects_zero_matrix(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_lower(np.zeros((2, 2)))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_lower(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            cholesky_lower(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_tolerates_roundoff_asymmetry(self):
        a = np.array([[4.0, 2.0], [2.0 + 1e-12, 3.0]])
        l = cholesky_lower(a)
        np.testing.assert_allclose(l @ l.T, symmetrize(a), rtol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteInput):
            cholesky_lower(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_pivot_floor(self):
        # PD in exact arithmetic but far below the floor relative to its row
        a = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-17]])
        with pytest.raises(NotPositiveDefinite):
            cholesky_lower(a)


class TestLowerTriangularize:
    def test_already_triangular_padded(self):
        l = np.array([[2.0, 0.0], [1.0, 3.0]])
        pre = np.hstack([l, np.zeros((2, 3))])
        np.testing.assert_array_equal(lower_triangularize(pre), l)

    def test_row_vector(self):
        np.testing.assert_allclose(
            lower_triangularize(np.array([[3.0, 4.0]])), [[5.0]], rtol=1e-15
        )

    def test_gram_preservation_3x7(self):
        pre = RNG.standard_normal((3, 7))
        x = lower_triangularize(pre)
        np.testing.assert_allclose(x @ x.T, pre @ pre.T, rtol=1e-12, atol=1e-13)

    def test_gram_preservation_property(self):
        for _ in range(300):
            rows = int(RNG.integers(1, 7))
            cols = int(RNG.integers(rows, rows + 8))
            pre = RNG.standard_normal((rows, cols)) * 10.0 ** RNG.integers(-3, 4)
            x = lower_triangularize(pre)
            assert np.allclose(np.triu(x, 1), 0.0)
            assert (np.diag(x) >= 0).all()
            gram = pre @ pre.T
            scale = max(np.linalg.norm(gram), 1e-300)
            assert np.linalg.norm(x @ x.T - gram) / scale < 1e-12

    def test_idempotent_on_own_output(self):
        pre = RNG.standard_normal((4, 9))
        x = lower_triangularize(pre)
        again = lower_triangularize(np.hstack([x, np.zeros((4, 2))]))
        np.testing.assert_array_equal(again, x)

    def test_rank_deficient_gives_zero_diagonal(self):
        pre = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        x = lower_triangularize(pre)
        assert x[1, 1] == 0.0
        np.testing.assert_allclose(x @ x.T, pre @ pre.T, atol=1e-14)

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteInput):
            lower_triangularize(np.array([[1.0, np.inf]]))

    def test_rejects_tall(self):
        with pytest.raises(ValueError):
            lower_triangularize(np.zeros((3, 2)))


class TestTriangularSolve:
    def test_identity(self):
        b = RNG.standard_normal(4)
        np.testing.assert_array_equal(triangular_solve(np.eye(4), b), b)

    def test_hand_forward(self):
        # forward substitution: x1 = 2/2 = 1, x2 = (1 + sqrt2 - 1) / sqrt2 = 1
        l = np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]])
        b = np.array([2.0, 1.0 + np.sqrt(2.0)])
        x = triangular_solve(l, b)
        np.testing.assert_allclose(x, [1.0, 1.0], rtol=1e-15)
        assert np.linalg.norm(l @ x - b) <= 1e-12 * np.linalg.norm(b)

    def test_radar_diagonal_inverse(self):
        l = np.diag([1000.0, 0.017])
        x = triangular_solve(l, np.eye(2))
        np.testing.assert_allclose(x, np.diag([1e-3, 1.0 / 0.017]), rtol=1e-15)

    def test_round_trip_property(self):
        for _ in range(300):
            dim = int(RNG.integers(1, 9))
            a = random_spd(RNG, dim, 10.0 ** RNG.uniform(0, 4))
            l = cholesky_lower(a)
            b = RNG.standard_normal((dim, int(RNG.integers(1, 4))))
            x = triangular_solve(l, b)
            assert np.linalg.norm(l @ x - b) <= 1e-12 * np.linalg.norm(b)
            xt = triangular_solve(l, b, transposed=True)
            assert np.linalg.norm(l.T @ xt - b) <= 1e-12 * np.linalg.norm(b)

    def test_rejects_zero_diagonal(self):
        with pytest.raises(SingularFactor):
            triangular_solve(np.array([[1.0, 0.0], [1.0, 0.0]]), np.ones(2))

    def test_rejects_subnormal_diagonal(self):
        tiny = np.finfo(float).tiny / 4.0
        with pytest.raises(SingularFactor):
            triangular_solve(np.diag([1.0, tiny, 1.0]), np.ones(3))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            triangular_solve(np.eye(2), np.ones(3))


class TestTriangularInverse:
    def test_identity(self):
        np.testing.assert_array_equal(triangular_inverse(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_array_equal(
            triangular_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25])
        )

    def test_hand_2x2(self):
        l = np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]])
        expected = np.array(
            [[0.5, 0.0], [-1.0 / (2.0 * np.sqrt(2.0)), 1.0 / np.sqrt(2.0)]]
        )
        inv = triangular_inverse(l)
        np.testing.assert_allclose(inv, expected, rtol=1e-15)
        np.testing.assert_allclose(l @ inv, np.eye(2), atol=1e-15)

    def test_stays_lower_triangular(self):
        for _ in range(50):
            dim = int(RNG.integers(1, 8))
            l = cholesky_lower(random_spd(RNG, dim, 100.0))
            inv = triangular_inverse(l)
            assert np.array_equal(np.triu(inv, 1), np.zeros((dim, dim)))
            assert np.allclose(l @ inv, np.eye(dim), atol=1e-12)


class TestConditionEstimate:
    def test_identity(self):
        assert condition_estimate(np.eye(5)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert condition_estimate(np.diag([1.0, 1e-8])) == pytest.approx(1e8, rel=1e-9)

    def test_singular_is_inf(self):
        assert condition_estimate(np.zeros((2, 2))) == np.inf

    def test_non_finite_is_inf(self):
        assert condition_estimate(np.array([[np.nan, 0.0], [0.0, 1.0]])) == np.inf

    def test_nearly_collinear_rows_grow_like_delta_squared(self):
        # oracle: condition of H H^T from the singular values of H itself
        estimates = {}
        for delta in (1e-2, 1e-3, 1e-4):
            h = np.ones((2, 6))
            h[1, 5] += delta
            svals = np.linalg.svd(h, compute_uv=False)
            oracle = (svals[0] / svals[-1]) ** 2
            estimates[delta] = condition_estimate(h @ h.T)
            assert estimates[delta] == pytest.approx(oracle, rel=1e-6)
        # delta -> delta/10 inflates the condition number by about 100
        assert estimates[1e-3] / estimates[1e-2] == pytest.approx(100.0, rel=0.05)
        assert estimates[1e-4] / estimates[1e-3] == pytest.approx(100.0, rel=0.05)
        assert estimates[1e-4] >= 1e7
