"""Correntropy-weighted Kalman filtering in conventional and square-root forms.

Three algebraically equivalent measurement updates are provided:

* ``conventional`` recursively processes the full error covariance with the
  Joseph stabilized update;
* ``sr1a`` propagates a lower Cholesky factor of the covariance but assembles
  the gain through a factor of the information matrix, which requires
  inverting n x n triangular factors at every step;
* ``sr1b`` also propagates the covariance factor but needs the inverse of the
  m x m innovation-covariance factor only, which is what makes it robust in
  ill-conditioned problems.

All three compute the scalar adjusting weight through the same code path, so
equivalence tests isolate linear-algebra differences. A dense textbook Kalman
filter (``kf_reference``) serves as an independent oracle: pinning the weight
to 1 reduces every variant to it. No explicit matrix inverse is materialized
anywhere except the transposed factor inverse that the sr1a pre-array is
defined with.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .correntropy import KernelSpec, LambdaInputs, compute_lambda
from .model import InitialCondition, Measurement, validate_model

__all__ = [
    "ALGORITHMS",
    "DIVERGENCE_LIMIT",
    "Diverged",
    "FilterState",
    "StepReport",
    "RunStatus",
    "FilterRun",
    "mcckf_time_update",
    "mcckf_measurement_update",
    "sr_time_update",
    "sr1a_measurement_update",
    "sr1b_measurement_update",
    "kf_reference_step",
    "run_filter",
    "gain_information_form",
    "gain_innovation_form",
]

ALGORITHMS = ("conventional", "sr1a", "sr1b", "kf_reference")

# An estimate component beyond this magnitude marks the run diverged even if
# still finite; it makes the breakdown sweep deterministic.
DIVERGENCE_LIMIT = 1e12


class Diverged(Exception):
    """A filter step produced an unusable state (numerical breakdown)."""

    def __init__(self, reason: str, step: int | None = None):
        self.reason = reason
        self.step = step
        super().__init__(reason if step is None else f"step {step}: {reason}")


@dataclass
class FilterState:
    """Estimate plus covariance representation at one step.

    Exactly one of ``covariance`` (full symmetric P) or ``factor`` (lower
    Cholesky S with S @ S.T == P) is set, depending on the algorithm family.
    """

    step: int
    estimate: np.ndarray
    covariance: np.ndarray | None = None
    factor: np.ndarray | None = None

    def __post_init__(self):
        self.estimate = np.asarray(self.estimate, dtype=float)
        if (self.covariance is None) == (self.factor is None):
            raise ValueError("exactly one of covariance/factor must be set")

    @classmethod
    def full(cls, step, estimate, covariance) -> "FilterState":
        return cls(step, estimate, covariance=np.asarray(covariance, dtype=float))

    @classmethod
    def square_root(cls, step, estimate, factor) -> "FilterState":
        return cls(step, estimate, factor=np.asarray(factor, dtype=float))

    def covariance_matrix(self) -> np.ndarray:
        """Full covariance, reconstructing factor @ factor.T if needed."""
        if self.covariance is not None:
            return self.covariance
        return self.factor @ self.factor.T


@dataclass
class StepReport:
    """Per-step diagnostics: adjusting weight, gain and innovation."""

    lam: float
    gain: np.ndarray
    innovation: np.ndarray


@dataclass
class RunStatus:
    """Terminal status of a filtering run."""

    completed: bool
    steps_completed: int
    failed_step: int | None = None
    reason: str | None = None


@dataclass
class FilterRun:
    """Trajectory of posterior states and reports plus terminal status."""

    initial: FilterState
    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    status: RunStatus | None = None

    def estimates(self) -> np.ndarray:
        """Posterior estimates stacked per step, shape (steps, n)."""
        n = self.initial.estimate.shape[0]
        if not self.states:
            return np.zeros((0, n))
        return np.array([s.estimate for s in self.states])


def _measurement_vector(y) -> np.ndarray:
    if isinstance(y, Measurement):
        return y.value
    return np.asarray(y, dtype=float)


def _require_finite(step: int, **named_arrays):
    for name, arr in named_arrays.items():
        if not np.isfinite(arr).all():
            raise Diverged(f"non-finite {name}", step)


def _lambda_weight(model, spec, pred_factor, innovation, pin_weight, step) -> float:
    if pin_weight is not None:
        if pin_weight < 0.0:
            raise ValueError(f"pinned weight must be nonnegative, got {pin_weight}")
        return float(pin_weight)
    if spec is None:
        raise ValueError("a KernelSpec is required unless the weight is pinned")
    n = pred_factor.shape[0]
    _, r_sqrt = model.noise_factors(step)
    inputs = LambdaInputs(
        innovation=innovation,
        innovation_weight_factor=r_sqrt,
        prediction_residual=np.zeros(n),
        prediction_weight_factor=pred_factor,
    )
    return compute_lambda(spec, inputs)


def mcckf_time_update(model, prior: FilterState) -> FilterState:
    """Propagate estimate and full covariance one step forward."""
    step = prior.step + 1
    f, g, _, q, _ = model.matrices(step)
    x = f @ prior.estimate
    p = linalg.symmetrize(f @ prior.covariance @ f.T + g @ q @ g.T)
    _require_finite(step, predicted_estimate=x, predicted_covariance=p)
    return FilterState.full(step, x, p)


def mcckf_measurement_update(
    model,
    pred: FilterState,
    y,
    spec: KernelSpec | None,
    pin_weight: float | None = None,
):
    """Conventional weighted measurement update with the Joseph covariance form.

    The gain is lam * (P^{-1} + lam H^T R^{-1} H)^{-1} H^T R^{-1}, realized
    through Cholesky factors and triangular solves; the predicted covariance
    is inverted here, which is where this form breaks down first under
    ill-conditioning of P.
    """
    step = pred.step
    _, _, h, _, r = model.matrices(step)
    yv = _measurement_vector(y)
    innovation = yv - h @ pred.estimate
    _require_finite(step, innovation=innovation)
    try:
        # pred.covariance is symmetrized by construction; skip the recheck
        p_factor = linalg.cholesky_lower(pred.covariance, check_symmetry=False)
        lam = _lambda_weight(model, spec, p_factor, innovation, pin_weight, step)
        inv_factor = linalg.triangular_inverse(p_factor)
        p_inv = inv_factor.T @ inv_factor
        r_inv = model.r_inverse(step)
        info = linalg.symmetrize(p_inv + lam * (h.T @ r_inv @ h))
        info_factor = linalg.cholesky_lower(info, check_symmetry=False)
        rhs = h.T @ r_inv
        half = linalg.triangular_solve(info_factor, rhs)
        gain = lam * linalg.triangular_solve(info_factor, half, transposed=True)
    except linalg.LinalgError as exc:
        raise Diverged(f"{type(exc).__name__}: {exc}", step) from exc
    i_kh = np.eye(h.shape[1]) - gain @ h
    p_new = linalg.symmetrize(i_kh @ pred.covariance @ i_kh.T + gain @ r @ gain.T)
    x_new = pred.estimate + gain @ innovation
    _require_finite(step, estimate=x_new, covariance=p_new, gain=gain)
    return FilterState.full(step, x_new, p_new), StepReport(lam, gain, innovation)


def sr_time_update(model, prior: FilterState) -> FilterState:
    """Square-root time update via the pre-array [F S, G Q_sqrt]."""
    step = prior.step + 1
    f, g, _, _, _ = model.matrices(step)
    q_sqrt, _ = model.noise_factors(step)
    x = f @ prior.estimate
    pre = np.hstack([f @ prior.factor, g @ q_sqrt])
    _require_finite(step, predicted_estimate=x, time_update_pre_array=pre)
    return FilterState.square_root(step, x, linalg.lower_triangularize(pre))


def sr1a_measurement_update(
    model,
    pred: FilterState,
    y,
    spec: KernelSpec | None,
    pin_weight: float | None = None,
):
    """Square-root measurement update through an information-matrix factor.

    Triangularizes [S_pred^{-T}, sqrt(lam) H^T R_sqrt^{-T}] into the lower
    factor X with X @ X.T equal to the inverse of the updated covariance, then
    realizes the gain by two n-dimensional triangular solves against X. The
    predicted factor is inverted every step, so conditioning of the n x n
    factors governs this form's breakdown.
    """
    step = pred.step
    _, _, h, _, _ = model.matrices(step)
    yv = _measurement_vector(y)
    innovation = yv - h @ pred.estimate
    _require_finite(step, innovation=innovation)
    try:
        lam = _lambda_weight(model, spec, pred.factor, innovation, pin_weight, step)
        pred_inv = linalg.triangular_inverse(pred.factor)
        _, r_sqrt = model.noise_factors(step)
        weighted_h = linalg.triangular_solve(r_sqrt, h)
        pre = np.hstack([pred_inv.T, np.sqrt(lam) * weighted_h.T])
        if not np.isfinite(pre).all():
            raise Diverged("non-finite information pre-array", step)
        info_factor = linalg.lower_triangularize(pre)
        rhs = h.T @ model.r_inverse(step)
        half = linalg.triangular_solve(info_factor, rhs)
        gain = lam * linalg.triangular_solve(info_factor, half, transposed=True)
    except linalg.LinalgError as exc:
        raise Diverged(f"{type(exc).__name__}: {exc}", step) from exc
    x_new = pred.estimate + gain @ innovation
    i_kh = np.eye(h.shape[1]) - gain @ h
    joseph_pre = np.hstack([i_kh @ pred.factor, gain @ r_sqrt])
    _require_finite(step, estimate=x_new, joseph_pre_array=joseph_pre, gain=gain)
    factor_new = linalg.lower_triangularize(joseph_pre)
    return FilterState.square_root(step, x_new, factor_new), StepReport(
        lam, gain, innovation
    )


def sr1b_measurement_update(
    model,
    pred: FilterState,
    y,
    spec: KernelSpec | None,
    pin_weight: float | None = None,
):
    """Square-root measurement update through the innovation-covariance factor.

    Triangularizes [sqrt(lam) H S_pred, R_sqrt] into the m x m innovation
    factor and realizes the gain by two m-dimensional triangular solves
    applied to lam * P_pred H^T, with P_pred reconstructed from its factor.
    No n x n factor is ever inverted.
    """
    step = pred.step
    _, _, h, _, _ = model.matrices(step)
    yv = _measurement_vector(y)
    innovation = yv - h @ pred.estimate
    _require_finite(step, innovation=innovation)
    try:
        lam = _lambda_weight(model, spec, pred.factor, innovation, pin_weight, step)
        _, r_sqrt = model.noise_factors(step)
        pre = np.hstack([np.sqrt(lam) * (h @ pred.factor), r_sqrt])
        if not np.isfinite(pre).all():
            raise Diverged("non-finite innovation pre-array", step)
        innov_factor = linalg.lower_triangularize(pre)
        p_pred = pred.factor @ pred.factor.T
        weighted = lam * (h @ p_pred)
        half = linalg.triangular_solve(innov_factor, weighted)
        gain = linalg.triangular_solve(innov_factor, half, transposed=True).T
    except linalg.LinalgError as exc:
        raise Diverged(f"{type(exc).__name__}: {exc}", step) from exc
    x_new = pred.estimate + gain @ innovation
    i_kh = np.eye(h.shape[1]) - gain @ h
    joseph_pre = np.hstack([i_kh @ pred.factor, gain @ r_sqrt])
    _require_finite(step, estimate=x_new, joseph_pre_array=joseph_pre, gain=gain)
    factor_new = linalg.lower_triangularize(joseph_pre)
    return FilterState.square_root(step, x_new, factor_new), StepReport(
        lam, gain, innovation
    )


def _kf_reference_update(model, prior: FilterState, y):
    step = prior.step + 1
    f, g, h, q, r = model.matrices(step)
    x_pred = f @ prior.estimate
    p_pred = linalg.symmetrize(f @ prior.covariance @ f.T + g @ q @ g.T)
    yv = _measurement_vector(y)
    innovation = yv - h @ x_pred
    innov_cov = h @ p_pred @ h.T + r
    try:
        gain = np.linalg.solve(innov_cov, h @ p_pred).T
    except np.linalg.LinAlgError as exc:
        raise Diverged("singular innovation covariance", step) from exc
    x_new = x_pred + gain @ innovation
    i_kh = np.eye(h.shape[1]) - gain @ h
    p_new = linalg.symmetrize(i_kh @ p_pred @ i_kh.T + gain @ r @ gain.T)
    _require_finite(step, estimate=x_new, covariance=p_new, gain=gain)
    return FilterState.full(step, x_new, p_new), StepReport(1.0, gain, innovation)


def kf_reference_step(model, prior: FilterState, y) -> FilterState:
    """Textbook Kalman filter time plus measurement update, dense arithmetic
    with the Joseph covariance form. Used as an oracle for the weighted
    algorithms at weight 1."""
    state, _ = _kf_reference_update(model, prior, y)
    return state


def _initial_state(algorithm: str, init: InitialCondition) -> FilterState:
    if algorithm in ("sr1a", "sr1b"):
        return FilterState.square_root(0, init.mean, linalg.cholesky_lower(init.covariance))
    return FilterState.full(0, init.mean, init.covariance)


def run_filter(
    algorithm: str,
    model,
    init: InitialCondition,
    measurements,
    spec: KernelSpec | None = None,
    pin_weight: float | None = None,
) -> FilterRun:
    """Drive one algorithm over a measurement sequence.

    Args:
        algorithm: one of ``conventional``, ``sr1a``, ``sr1b``, ``kf_reference``.
        model: state-space model (or step-indexed provider).
        init: initial mean and covariance; must be positive definite for the
            square-root variants.
        measurements: sequence of measurement vectors (or ``Measurement``),
            one per step k = 1..N.
        spec: kernel bandwidth for the adjusting weight; may be omitted when
            ``pin_weight`` is given or for ``kf_reference``.
        pin_weight: fix the adjusting weight (e.g. 1.0 reduces every variant
            to the classical filter, 0.0 rejects every measurement).

    Returns:
        ``FilterRun`` with per-step posterior states and reports up to
        completion or the first divergence; a non-finite estimate or one with
        any component beyond ``DIVERGENCE_LIMIT`` is recorded as divergence,
        never silently propagated.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    violations = validate_model(
        model, init, require_spd_init=algorithm in ("sr1a", "sr1b")
    )
    if violations:
        raise ValueError("model validation failed: " + "; ".join(violations))
    state = _initial_state(algorithm, init)
    run = FilterRun(initial=state)
    for k, y in enumerate(measurements, start=1):
        try:
            if algorithm == "conventional":
                pred = mcckf_time_update(model, state)
                state, report = mcckf_measurement_update(model, pred, y, spec, pin_weight)
            elif algorithm == "sr1a":
                pred = sr_time_update(model, state)
                state, report = sr1a_measurement_update(model, pred, y, spec, pin_weight)
            elif algorithm == "sr1b":
                pred = sr_time_update(model, state)
                state, report = sr1b_measurement_update(model, pred, y, spec, pin_weight)
            else:
                state, report = _kf_reference_update(model, state, y)
            if np.abs(state.estimate).max() > DIVERGENCE_LIMIT:
                raise Diverged(
                    f"estimate magnitude exceeded {DIVERGENCE_LIMIT:.0e}", k
                )
        except Diverged as exc:
            run.status = RunStatus(
                completed=False,
                steps_completed=k - 1,
                failed_step=k,
                reason=str(exc),
            )
            return run
        run.states.append(state)
        run.reports.append(report)
    run.status = RunStatus(completed=True, steps_completed=len(run.states))
    return run


def gain_information_form(p, h, r, lam: float) -> np.ndarray:
    """Dense gain lam * (P^{-1} + lam H^T R^{-1} H)^{-1} H^T R^{-1}.

    Reference formula for equivalence checks, not used by the filters.
    """
    p = np.asarray(p, dtype=float)
    r_inv = np.linalg.inv(np.asarray(r, dtype=float))
    h = np.asarray(h, dtype=float)
    info = np.linalg.inv(p) + lam * (h.T @ r_inv @ h)
    return lam * np.linalg.solve(info, h.T @ r_inv)


def gain_innovation_form(p, h, r, lam: float) -> np.ndarray:
    """Dense gain lam * P H^T (lam H P H^T + R)^{-1}.

    Reference formula for equivalence checks, not used by the filters.
    """
    p = np.asarray(p, dtype=float)
    h = np.asarray(h, dtype=float)
    innov_cov = lam * (h @ p @ h.T) + np.asarray(r, dtype=float)
    return lam * np.linalg.solve(innov_cov.T, h @ p.T).T
