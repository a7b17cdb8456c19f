"""Gaussian-kernel weighting that rescales the Kalman gain to reject outliers.

The scalar adjusting weight is the ratio of kernel values of two weighted
residual norms: the innovation in the R^{-1} metric over the prediction
residual in the P^{-1} metric. With the standard one-iterate update the
prediction residual is identically zero, so the denominator is exactly one
and the weight lies in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg

__all__ = [
    "KernelSpec",
    "LambdaInputs",
    "DegenerateWeight",
    "gaussian_kernel",
    "weighted_norm",
    "compute_lambda",
]


class DegenerateWeight(Exception):
    """The weight denominator underflowed to zero."""


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel bandwidth. ``sigma = inf`` pins the weight to 1."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"kernel bandwidth must be positive, got {self.sigma}")


def gaussian_kernel(spec: KernelSpec, distance: float) -> float:
    """exp(-distance^2 / (2 sigma^2)); equals 1 iff distance == 0.

    May underflow to exactly 0 for extreme distances, which is permitted:
    downstream it yields a zero gain, i.e. full rejection of the measurement.
    """
    distance = float(distance)
    if not math.isfinite(distance) or distance < 0.0:
        raise ValueError(f"distance must be finite and nonnegative, got {distance}")
    if math.isinf(spec.sigma):
        return 1.0
    return float(np.exp(-(distance * distance) / (2.0 * spec.sigma * spec.sigma)))


def weighted_norm(residual: np.ndarray, weight_factor: np.ndarray) -> float:
    """sqrt(e^T W^{-1} e) with W = factor @ factor.T, without forming W^{-1}.

    Solves factor @ z = residual by forward substitution and returns ||z||.
    An exactly zero residual short-circuits to 0.0.
    """
    r = np.asarray(residual, dtype=float)
    if not np.any(r):
        return 0.0
    z = linalg.triangular_solve(weight_factor, r)
    return float(np.sqrt(z @ z))


@dataclass
class LambdaInputs:
    """Residuals and the Cholesky factors of their weighting matrices."""

    innovation: np.ndarray
    innovation_weight_factor: np.ndarray
    prediction_residual: np.ndarray
    prediction_weight_factor: np.ndarray


def compute_lambda(spec: KernelSpec, inputs: LambdaInputs) -> float:
    """Scalar adjusting weight: kernel(innovation norm) / kernel(prediction norm).

    Raises ``DegenerateWeight`` if the denominator underflows to zero; this
    cannot happen in the filters, where the prediction residual is zero and
    the denominator is exactly one.
    """
    num = gaussian_kernel(
        spec, weighted_norm(inputs.innovation, inputs.innovation_weight_factor)
    )
    den = gaussian_kernel(
        spec,
        weighted_norm(inputs.prediction_residual, inputs.prediction_weight_factor),
    )
    if den == 0.0:
        raise DegenerateWeight(
            "prediction-residual kernel underflowed to zero; weight is undefined"
        )
    return num / den
