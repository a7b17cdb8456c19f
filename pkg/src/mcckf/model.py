"""Linear Gaussian state-space model containers and validation.

The model is x_k = F x_{k-1} + G w_{k-1}, y_k = H x_k + v_k with
w ~ N(0, Q), v ~ N(0, R), x_0 ~ (mean, covariance). Matrices are frozen
read-only at construction so model objects can be shared freely across
concurrent Monte Carlo runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg

__all__ = [
    "StateSpaceModel",
    "TimeVaryingModel",
    "InitialCondition",
    "Measurement",
    "validate_model",
]


def _frozen(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(eq=False)
class StateSpaceModel:
    """Time-invariant system matrices F, G, H and noise covariances Q, R.

    Q must be strictly positive definite. R is also required strictly
    positive definite here, which is stricter than the estimation problem
    itself demands: every algorithm in this package applies R^{-1} or a
    factor of it, so a semidefinite R would be unusable anyway.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.F = _frozen(self.F)
        if self.F.ndim != 2 or self.F.shape[0] != self.F.shape[1]:
            raise ValueError(f"F must be square, got shape {self.F.shape}")
        n = self.F.shape[0]
        self.G = _frozen(self.G)
        if self.G.ndim != 2 or self.G.shape[0] != n:
            raise ValueError(f"G must have {n} rows, got shape {self.G.shape}")
        q = self.G.shape[1]
        self.H = _frozen(self.H)
        if self.H.ndim != 2 or self.H.shape[1] != n:
            raise ValueError(f"H must have {n} columns, got shape {self.H.shape}")
        m = self.H.shape[0]
        self.Q = _frozen(self.Q, (q, q))
        self.R = _frozen(self.R, (m, m))
        self._noise_factors = None
        self._r_inverse = None

    @property
    def state_dim(self) -> int:
        return self.F.shape[0]

    @property
    def noise_dim(self) -> int:
        return self.G.shape[1]

    @property
    def obs_dim(self) -> int:
        return self.H.shape[0]

    def matrices(self, step: int):
        """System matrices for the given step (constant here)."""
        return self.F, self.G, self.H, self.Q, self.R

    def noise_factors(self, step: int):
        """Cached lower Cholesky factors (Q_sqrt, R_sqrt)."""
        if self._noise_factors is None:
            q_sqrt = linalg.cholesky_lower(self.Q)
            r_sqrt = linalg.cholesky_lower(self.R)
            q_sqrt.setflags(write=False)
            r_sqrt.setflags(write=False)
            self._noise_factors = (q_sqrt, r_sqrt)
        return self._noise_factors

    def r_inverse(self, step: int) -> np.ndarray:
        """Cached R^{-1}, assembled from the R factor by triangular solves."""
        if self._r_inverse is None:
            _, r_sqrt = self.noise_factors(step)
            inv_factor = linalg.triangular_inverse(r_sqrt)
            r_inv = inv_factor.T @ inv_factor
            r_inv.setflags(write=False)
            self._r_inverse = r_inv
        return self._r_inverse


class TimeVaryingModel:
    """Step-indexed provider of system matrices.

    ``provider(step)`` must return (F, G, H, Q, R) for step k >= 1 and be
    deterministic in k. Factor caches are not kept since the matrices may
    change every step.
    """

    def __init__(self, provider: Callable, state_dim: int, noise_dim: int, obs_dim: int):
        self.provider = provider
        self._dims = (state_dim, noise_dim, obs_dim)

    @property
    def state_dim(self) -> int:
        return self._dims[0]

    @property
    def noise_dim(self) -> int:
        return self._dims[1]

    @property
    def obs_dim(self) -> int:
        return self._dims[2]

    def matrices(self, step: int):
        n, q, m = self._dims
        f, g, h, qc, rc = (np.asarray(x, dtype=float) for x in self.provider(step))
        if f.shape != (n, n) or g.shape != (n, q) or h.shape != (m, n):
            raise ValueError(f"provider returned inconsistent shapes at step {step}")
        if qc.shape != (q, q) or rc.shape != (m, m):
            raise ValueError(f"provider returned inconsistent shapes at step {step}")
        return f, g, h, qc, rc

    def noise_factors(self, step: int):
        _, _, _, q, r = self.matrices(step)
        return linalg.cholesky_lower(q), linalg.cholesky_lower(r)

    def r_inverse(self, step: int) -> np.ndarray:
        _, r_sqrt = self.noise_factors(step)
        inv_factor = linalg.triangular_inverse(r_sqrt)
        return inv_factor.T @ inv_factor


@dataclass(eq=False)
class InitialCondition:
    """Initial state mean and error covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = _frozen(np.ravel(self.mean))
        n = self.mean.shape[0]
        self.covariance = _frozen(self.covariance, (n, n))


@dataclass(frozen=True)
class Measurement:
    """One observation y_k at step k >= 1."""

    step: int
    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", _frozen(np.ravel(self.value)))
        if self.step < 1:
            raise ValueError(f"measurement step must be >= 1, got {self.step}")
        if not np.isfinite(self.value).all():
            raise ValueError("measurement value must be finite")


def _spd_violation(name: str, a: np.ndarray) -> str | None:
    try:
        linalg.cholesky_lower(a)
    except linalg.NotSymmetric:
        return f"{name} not symmetric"
    except linalg.NotPositiveDefinite:
        return f"{name} not positive definite"
    except linalg.NonFiniteInput:
        return f"{name} contains non-finite entries"
    return None


def validate_model(
    model, init: InitialCondition, require_spd_init: bool = False
) -> list[str]:
    """Check model assumptions; return a list of violations (empty = usable).

    Verifies dimensional consistency, symmetry and positive definiteness of
    Q and R, and of the initial covariance when ``require_spd_init`` is set
    (the square-root algorithms factor it). Pure report, never raises for a
    bad model.
    """
    violations: list[str] = []
    try:
        f, g, h, q, r = model.matrices(1)
    except ValueError as exc:
        return [str(exc)]
    n = f.shape[0]
    if f.ndim != 2 or f.shape != (n, n):
        violations.append(f"F must be square, got shape {f.shape}")
    if g.ndim != 2 or g.shape[0] != n:
        violations.append(f"G must have {n} rows, got shape {g.shape}")
    if h.ndim != 2 or h.shape[1] != n:
        violations.append(f"H must have {n} columns, got shape {h.shape}")
    if q.shape != (g.shape[1], g.shape[1]):
        violations.append(f"Q shape {q.shape} does not match G columns {g.shape[1]}")
    if r.shape != (h.shape[0], h.shape[0]):
        violations.append(f"R shape {r.shape} does not match H rows {h.shape[0]}")
    if not violations:
        for name, mat in (("Q", q), ("R", r)):
            msg = _spd_violation(name, mat)
            if msg:
                violations.append(msg)
    if init.mean.shape[0] != n:
        violations.append(
            f"initial mean length {init.mean.shape[0]} does not match state dim {n}"
        )
    if init.covariance.shape != (n, n):
        violations.append(
            f"initial covariance shape {init.covariance.shape} does not match state dim {n}"
        )
    else:
        scale = np.abs(init.covariance).max(initial=0.0)
        if np.abs(init.covariance - init.covariance.T).max(initial=0.0) > 1e-9 * scale:
            violations.append("initial covariance not symmetric")
        elif require_spd_init:
            msg = _spd_violation("initial covariance", init.covariance)
            if msg:
                violations.append(msg)
    return violations
