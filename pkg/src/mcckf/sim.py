"""Ground-truth trajectory and measurement generation with outlier injection.

Noise, outlier placement and outlier magnitudes come from three independent
child streams spawned from one seed, so the impulse schedule depends only on
the seed and the shot-noise parameters, never on model values, and disabling
shot noise leaves the Gaussian draws untouched.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .model import InitialCondition

__all__ = [
    "SeedSpec",
    "ShotNoiseSpec",
    "Trajectory",
    "draw_gaussian",
    "psd_factor",
    "simulate",
    "write_trajectory_csv",
]

SHOT_TARGETS = ("process", "measurement", "both")


@dataclass(frozen=True)
class SeedSpec:
    """Reproducible, mutually independent per-run random streams."""

    master_seed: int
    run_index: int = 0

    def streams(self):
        """(noise, schedule, magnitude) generators, independent by construction."""
        root = np.random.SeedSequence(self.master_seed, spawn_key=(self.run_index,))
        children = root.spawn(3)
        return tuple(np.random.default_rng(child) for child in children)


@dataclass(frozen=True)
class ShotNoiseSpec:
    """Impulsive-outlier injection parameters.

    A fraction of the steps inside [window_start, window_end] receive additive
    impulses on every channel of each targeted noise group; magnitudes are
    drawn from the discrete uniform distribution on the integers
    {magnitude_low, ..., magnitude_high}. The two groups (process and
    measurement noise) get independently chosen schedules.
    """

    corrupted_fraction: float = 0.20
    magnitude_low: int = 0
    magnitude_high: int = 5
    window_start: int = 21
    window_end: int = 300
    targets: str = "both"

    def __post_init__(self):
        if not 0.0 <= self.corrupted_fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {self.corrupted_fraction}")
        if self.magnitude_low > self.magnitude_high:
            raise ValueError("magnitude_low must not exceed magnitude_high")
        if not 1 <= self.window_start <= self.window_end:
            raise ValueError(
                f"bad window [{self.window_start}, {self.window_end}]"
            )
        if self.targets not in SHOT_TARGETS:
            raise ValueError(f"targets must be one of {SHOT_TARGETS}")

    def corrupted_count(self, horizon: int) -> int:
        window = self.window_steps(horizon)
        return int(round(self.corrupted_fraction * len(window)))

    def window_steps(self, horizon: int) -> np.ndarray:
        return np.arange(self.window_start, min(self.window_end, horizon) + 1)


@dataclass
class Trajectory:
    """Simulated truth, measurements and the injected-outlier log."""

    initial_state: np.ndarray
    truth: np.ndarray
    measurements: np.ndarray
    outlier_log: list = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.truth.shape[0]


def draw_gaussian(stream, mean, covariance_factor) -> np.ndarray:
    """Sample mean + factor @ z with z standard normal."""
    mean = np.asarray(mean, dtype=float)
    factor = np.asarray(covariance_factor, dtype=float)
    return mean + factor @ stream.standard_normal(mean.shape[0])


def psd_factor(a: np.ndarray) -> np.ndarray:
    """Lower-triangular factor of a PSD matrix, tolerating semidefiniteness.

    Falls back to an eigendecomposition with negative eigenvalues clipped to
    zero when the strict Cholesky floor rejects the matrix (e.g. a zero noise
    covariance in a noiseless test model).
    """
    a = np.asarray(a, dtype=float)
    try:
        return linalg.cholesky_lower(a)
    except linalg.NotPositiveDefinite:
        w, v = np.linalg.eigh(linalg.symmetrize(a))
        root = v * np.sqrt(np.clip(w, 0.0, None))
        return linalg.lower_triangularize(root)


def _impulse_schedule(shot, horizon, schedule_rng, magnitude_rng, channels):
    """(step -> magnitudes) map for one noise group, fully seed-determined."""
    window = shot.window_steps(horizon)
    count = shot.corrupted_count(horizon)
    if count == 0 or len(window) == 0 or channels == 0:
        return {}
    steps = np.sort(schedule_rng.choice(window, size=min(count, len(window)), replace=False))
    magnitudes = magnitude_rng.integers(
        shot.magnitude_low, shot.magnitude_high + 1, size=(len(steps), channels)
    )
    return {int(step): magnitudes[i] for i, step in enumerate(steps)}


def simulate(
    model,
    init: InitialCondition,
    horizon: int,
    seed: SeedSpec,
    shot: ShotNoiseSpec | None = None,
) -> Trajectory:
    """Simulate truth and measurements over steps 1..horizon.

    Truth follows x_k = F x_{k-1} + G w_{k-1} with w ~ N(0, Q), measurements
    y_k = H x_k + v_k with v ~ N(0, R); when ``shot`` is given, the targeted
    noise groups receive additive integer impulses on the scheduled steps.
    Identical ``SeedSpec`` inputs reproduce the trajectory bit for bit.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    noise_rng, schedule_rng, magnitude_rng = seed.streams()

    f0, g0, h0, q0, r0 = model.matrices(1)
    n, q_dim, m_dim = f0.shape[0], g0.shape[1], h0.shape[0]

    process_impulses: dict = {}
    measurement_impulses: dict = {}
    if shot is not None:
        if shot.targets in ("process", "both"):
            process_impulses = _impulse_schedule(
                shot, horizon, schedule_rng, magnitude_rng, q_dim
            )
        if shot.targets in ("measurement", "both"):
            measurement_impulses = _impulse_schedule(
                shot, horizon, schedule_rng, magnitude_rng, m_dim
            )

    init_factor = psd_factor(init.covariance)
    x = draw_gaussian(noise_rng, init.mean, init_factor)
    initial_state = x.copy()

    truth = np.zeros((horizon, n))
    measurements = np.zeros((horizon, m_dim))
    outlier_log: list = []

    time_invariant = hasattr(model, "F")
    q_factor = psd_factor(q0)
    r_factor = psd_factor(r0)
    f, g, h = f0, g0, h0
    for k in range(1, horizon + 1):
        if not time_invariant:
            f, g, h, qk, rk = model.matrices(k)
            q_factor = psd_factor(qk)
            r_factor = psd_factor(rk)
        w = draw_gaussian(noise_rng, np.zeros(q_dim), q_factor)
        if k in process_impulses:
            mags = process_impulses[k]
            w = w + mags
            outlier_log.extend(
                (k, f"w{j + 1}", int(mags[j])) for j in range(q_dim)
            )
        x = f @ x + g @ w
        v = draw_gaussian(noise_rng, np.zeros(m_dim), r_factor)
        if k in measurement_impulses:
            mags = measurement_impulses[k]
            v = v + mags
            outlier_log.extend(
                (k, f"v{j + 1}", int(mags[j])) for j in range(m_dim)
            )
        truth[k - 1] = x
        measurements[k - 1] = h @ x + v

    outlier_log.sort(key=lambda item: (item[0], item[1]))
    return Trajectory(initial_state, truth, measurements, outlier_log)


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """Write step, truth components, measurement components and outlier flags."""
    n = trajectory.truth.shape[1]
    m = trajectory.measurements.shape[1]
    process_steps = {s for s, ch, _ in trajectory.outlier_log if ch.startswith("w")}
    measurement_steps = {s for s, ch, _ in trajectory.outlier_log if ch.startswith("v")}
    header = (
        ["step"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"y{j + 1}" for j in range(m)]
        + ["shot_w", "shot_v"]
    )
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in range(1, trajectory.horizon + 1):
                row = (
                    [str(k)]
                    + [f"{v:.17g}" for v in trajectory.truth[k - 1]]
                    + [f"{v:.17g}" for v in trajectory.measurements[k - 1]]
                    + [str(int(k in process_steps)), str(int(k in measurement_steps))]
                )
                writer.writerow(row)
    except OSError as exc:
        raise OSError(f"failed writing trajectory CSV to {path}: {exc}") from exc
