"""Dense and triangular linear algebra for square-root covariance filtering.

All routines operate on float64 numpy arrays. Triangular factors follow a
fixed sign convention (nonnegative diagonal), which makes the factor of a
given SPD matrix unique and therefore directly comparable across the
filtering algorithms that propagate them.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinalgError",
    "NotSymmetric",
    "NotPositiveDefinite",
    "NonFiniteInput",
    "SingularFactor",
    "symmetrize",
    "cholesky_lower",
    "lower_triangularize",
    "triangular_solve",
    "triangular_inverse",
    "condition_estimate",
]

_EPS = float(np.finfo(np.float64).eps)
_TINY = float(np.finfo(np.float64).tiny)

# Relative tolerance for the symmetry precheck in cholesky_lower. Joseph-form
# covariance updates accumulate asymmetry of roundoff order, so the check must
# not be exact.
SYMMETRY_RTOL = 1e-9

# A Cholesky pivot at or below PIVOT_FLOOR_FACTOR * eps * row_norm is treated
# as a positive-definiteness failure instead of producing a garbage factor.
PIVOT_FLOOR_FACTOR = 100.0


class LinalgError(Exception):
    """Base class for factorization and solve failures."""


class NotSymmetric(LinalgError):
    """Input expected to be symmetric is not, beyond tolerance."""


class NotPositiveDefinite(LinalgError):
    """A Cholesky pivot fell at or below the positive-definiteness floor."""


class NonFiniteInput(LinalgError):
    """Input contains NaN or Inf."""


class SingularFactor(LinalgError):
    """A triangular factor has a zero or subnormal diagonal entry."""


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the symmetric part (a + a.T) / 2."""
    a = np.asarray(a, dtype=float)
    return (a + a.T) / 2.0


def cholesky_lower(a: np.ndarray, check_symmetry: bool = True) -> np.ndarray:
    """Factor a symmetric positive definite matrix as L @ L.T, L lower.

    The input is symmetrized before factoring. Pivots are compared against
    a floor of ``PIVOT_FLOOR_FACTOR * eps * row_norm`` so that a nearly
    indefinite matrix raises instead of yielding a meaningless factor; the
    filters rely on that signal to detect divergence.

    Parameters
    ----------
    a : ndarray, shape (n, n)
        Matrix to factor. Must be symmetric to within ``SYMMETRY_RTOL``
        (relative, max-norm) unless ``check_symmetry`` is disabled.
    check_symmetry : bool
        Skip the symmetry precheck when the caller guarantees it.

    Returns
    -------
    ndarray, shape (n, n)
        Lower-triangular L with nonnegative diagonal and L @ L.T == a to
        within roundoff.

    Raises
    ------
    NotSymmetric
        If the symmetry check fails.
    NotPositiveDefinite
        If any pivot is at or below the floor.
    NonFiniteInput
        If the input contains NaN or Inf.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFiniteInput("matrix contains non-finite entries")
    if check_symmetry:
        scale = np.abs(a).max() if a.size else 0.0
        if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_RTOL * scale:
            raise NotSymmetric(
                f"asymmetry {np.abs(a - a.T).max():.3e} exceeds "
                f"{SYMMETRY_RTOL:g} * {scale:.3e}"
            )
    s = symmetrize(a)
    n = s.shape[0]
    row_norms = np.linalg.norm(s, axis=1)
    lower = np.zeros_like(s)
    for j in range(n):
        pivot = s[j, j] - lower[j, :j] @ lower[j, :j]
        floor = PIVOT_FLOOR_FACTOR * _EPS * row_norms[j]
        if pivot <= floor:
            raise NotPositiveDefinite(
                f"pivot {pivot:.6e} at index {j} is at or below floor {floor:.6e}"
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            lower[j + 1 :, j] = (
                s[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]
            ) / lower[j, j]
    return lower


def lower_triangularize(pre_array: np.ndarray) -> np.ndarray:
    """Reduce a wide pre-array A (rows <= cols) to its lower-triangular X.

    Applies an orthogonal transformation from the right so that
    ``A @ Q = [X, 0]`` with X square lower triangular, which preserves the
    Gram matrix: ``X @ X.T == A @ A.T``. Realized as the orthogonal-triangular
    decomposition of the transposed pre-array (Householder reflections),
    transposed back. Column signs are flipped so the diagonal of X is
    nonnegative; rank-deficient inputs yield zero diagonal entries.

    Raises
    ------
    NonFiniteInput
        If the pre-array contains NaN or Inf.
    """
    a = np.asarray(pre_array, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D pre-array, got shape {a.shape}")
    rows, cols = a.shape
    if rows > cols:
        raise ValueError(f"pre-array must have rows <= cols, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFiniteInput("pre-array contains non-finite entries")
    r = np.linalg.qr(a.T, mode="r")
    x = r.T
    signs = np.where(np.diagonal(x) < 0.0, -1.0, 1.0)
    return x * signs


def triangular_solve(
    l: np.ndarray, b: np.ndarray, transposed: bool = False
) -> np.ndarray:
    """Solve l @ x = b (or l.T @ x = b when ``transposed``) by substitution.

    ``l`` must be lower triangular with a strictly positive (normal) diagonal;
    a zero or subnormal diagonal entry raises ``SingularFactor``, the signal
    the ill-conditioning sweep uses to record breakdown. ``b`` may be a vector
    or a matrix of stacked right-hand sides.
    """
    l = np.asarray(l, dtype=float)
    n = l.shape[0]
    b = np.asarray(b, dtype=float)
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: factor {l.shape}, rhs {b.shape}")
    vector = b.ndim == 1
    # closed forms for the tiny systems the filters solve in their inner loop
    if n == 1:
        if abs(l[0, 0]) < _TINY:
            raise SingularFactor("factor has a zero or subnormal diagonal entry")
        return b / l[0, 0]
    if n == 2:
        if abs(l[0, 0]) < _TINY or abs(l[1, 1]) < _TINY:
            raise SingularFactor("factor has a zero or subnormal diagonal entry")
        x = np.empty_like(b)
        if not transposed:
            x[0] = b[0] / l[0, 0]
            x[1] = (b[1] - l[1, 0] * x[0]) / l[1, 1]
        else:
            x[1] = b[1] / l[1, 1]
            x[0] = (b[0] - l[1, 0] * x[1]) / l[0, 0]
        return x
    if np.any(np.abs(np.diagonal(l)) < _TINY):
        raise SingularFactor("factor has a zero or subnormal diagonal entry")
    x = b[:, None].copy() if vector else b.copy()
    if not transposed:
        for i in range(n):
            if i:
                x[i] -= l[i, :i] @ x[:i]
            x[i] /= l[i, i]
    else:
        for i in range(n - 1, -1, -1):
            if i < n - 1:
                x[i] -= l[i + 1 :, i] @ x[i + 1 :]
            x[i] /= l[i, i]
    return x[:, 0] if vector else x


def triangular_inverse(l: np.ndarray) -> np.ndarray:
    """Invert a lower-triangular factor; the result is lower triangular."""
    l = np.asarray(l, dtype=float)
    return triangular_solve(l, np.eye(l.shape[0]))


def condition_estimate(m: np.ndarray) -> float:
    """2-norm condition number of a square matrix; +inf when singular
    or non-finite."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.size and not np.isfinite(m).all():
        return float("inf")
    try:
        c = float(np.linalg.cond(m, 2))
    except np.linalg.LinAlgError:
        return float("inf")
    return float("inf") if np.isnan(c) else c
