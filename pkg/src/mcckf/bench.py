"""Benchmark scenarios, Monte Carlo RMSE evaluation and the conditioning sweep.

Two scenarios are provided: a six-state radar tracking problem with impulsive
(shot) measurement and process noise, and an ill-conditioned variant of the
same dynamics whose nearly collinear measurement rows and delta-scaled noise
drive the innovation covariance toward singularity as delta shrinks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .correntropy import KernelSpec
from .filters import ALGORITHMS, RunStatus, run_filter
from .model import InitialCondition, StateSpaceModel
from .sim import SeedSpec, ShotNoiseSpec, Trajectory, simulate

__all__ = [
    "RadarConstants",
    "Scenario",
    "RmseReport",
    "SweepEntry",
    "SweepReport",
    "BLOWUP_FACTOR",
    "build_example1",
    "build_example2",
    "radar_scenario",
    "ill_conditioned_scenario",
    "run_monte_carlo",
    "run_conditioning_sweep",
    "write_csv",
]

# An algorithm's summary RMSE beyond BLOWUP_FACTOR times its own value at the
# largest (easiest) delta counts as blown up, as does any diverged run. A
# relative threshold keeps the sweep portable across platforms.
BLOWUP_FACTOR = 1e3


@dataclass(frozen=True)
class RadarConstants:
    """Constants of the six-state radar tracking benchmark.

    The state is (range, range rate, maneuver noise 1, bearing, bearing rate,
    maneuver noise 2); range and bearing are measured directly. Two quirks of
    the initial covariance are deliberate and individually overridable: the
    bearing slot (4,4) carries the bearing noise standard deviation rather
    than the variance, and the bearing-rate slot (5,5) adds the first (not
    the second) maneuvering noise variance.

    Maps one-to-one onto the ``[model]`` section of the experiment
    configuration file plus ``runs``/``horizon`` from ``[monte_carlo]``
    (see ``mcckf.config`` and the README for the full schema).
    """

    rho: float = 0.5
    sampling_period: float = 10.0
    range_noise_var: float = 1000.0**2
    bearing_noise_var: float = 0.017**2
    maneuver_var_1: float = (103.0 / 3.0) ** 2
    maneuver_var_2: float = 1.3e-8
    horizon: int = 300
    runs: int = 100
    init_bearing_entry: float | None = None
    init_bearing_rate_extra: float | None = None

    def bearing_entry(self) -> float:
        if self.init_bearing_entry is not None:
            return self.init_bearing_entry
        return math.sqrt(self.bearing_noise_var)

    def bearing_rate_extra(self) -> float:
        if self.init_bearing_rate_extra is not None:
            return self.init_bearing_rate_extra
        return self.maneuver_var_1


def _radar_dynamics(c: RadarConstants):
    t = c.sampling_period
    f = np.array(
        [
            [1.0, t, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, c.rho, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, t, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, c.rho],
        ]
    )
    g = np.zeros((6, 2))
    g[2, 0] = 1.0
    g[5, 1] = 1.0
    q = np.diag([c.maneuver_var_1, c.maneuver_var_2])
    return f, g, q


def build_example1(
    constants: RadarConstants = RadarConstants(),
) -> tuple[StateSpaceModel, InitialCondition, ShotNoiseSpec]:
    """Radar tracking model with shot noise on both noise groups.

    The process noise enters through a 6x2 selector on the two maneuvering
    states with a 2x2 positive definite covariance, which is algebraically
    identical to a 6x6 covariance with four zero diagonal entries but keeps
    every noise covariance factorable.
    """
    c = constants
    f, g, q = _radar_dynamics(c)
    h = np.zeros((2, 6))
    h[0, 0] = 1.0
    h[1, 3] = 1.0
    r = np.diag([c.range_noise_var, c.bearing_noise_var])
    t = c.sampling_period
    sr2 = c.range_noise_var
    stheta = c.bearing_entry()
    pi0 = np.array(
        [
            [sr2, sr2 / t, 0.0, 0.0, 0.0, 0.0],
            [sr2 / t, 2.0 * sr2 / t**2 + c.maneuver_var_1, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, c.maneuver_var_1, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, stheta, stheta / t, 0.0],
            [0.0, 0.0, 0.0, stheta / t, 2.0 * stheta / t**2 + c.bearing_rate_extra(), 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, c.maneuver_var_2],
        ]
    )
    model = StateSpaceModel(F=f, G=g, H=h, Q=q, R=r)
    init = InitialCondition(mean=np.zeros(6), covariance=pi0)
    # the eligible window is clamped to the horizon at simulation time
    return model, init, ShotNoiseSpec()


def build_example2(
    delta: float, constants: RadarConstants = RadarConstants()
) -> tuple[StateSpaceModel, InitialCondition]:
    """Ill-conditioned variant: all-ones measurement rows differing by delta
    in the last column, R = delta^2 I, standard normal initial state."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    f, g, q = _radar_dynamics(constants)
    h = np.ones((2, 6))
    h[1, 5] = 1.0 + delta
    r = delta**2 * np.eye(2)
    model = StateSpaceModel(F=f, G=g, H=h, Q=q, R=r)
    init = InitialCondition(mean=np.zeros(6), covariance=np.eye(6))
    return model, init


@dataclass(frozen=True)
class Scenario:
    """A model, its initial condition and simulation settings, bundled."""

    name: str
    model: StateSpaceModel
    init: InitialCondition
    horizon: int
    shot: ShotNoiseSpec | None = None


def radar_scenario(constants: RadarConstants = RadarConstants()) -> Scenario:
    model, init, shot = build_example1(constants)
    return Scenario("radar_tracking", model, init, constants.horizon, shot)


def ill_conditioned_scenario(
    delta: float, constants: RadarConstants = RadarConstants()
) -> Scenario:
    model, init = build_example2(delta, constants)
    return Scenario(f"ill_conditioned_{delta:g}", model, init, constants.horizon)


@dataclass
class RmseReport:
    """Monte Carlo accuracy curves for one algorithm.

    ``per_component[k-1, i]`` is the RMSE of state component i at step k over
    the completed runs; ``total`` is the l2 norm across components per step;
    ``scalar_summary`` its time mean. Diverged runs are excluded from the
    averages and counted instead of poisoning them with NaN; with no
    completed runs every cell is NaN.
    """

    algorithm: str
    per_component: np.ndarray
    total: np.ndarray
    scalar_summary: float
    completed_runs: int
    diverged_runs: int
    statuses: list = field(default_factory=list)


def _estimates_for(algorithm, scenario: Scenario, trajectory: Trajectory, spec):
    """Run one estimator over one trajectory; None signals divergence."""
    if callable(algorithm):
        return np.asarray(
            algorithm(scenario.model, scenario.init, trajectory, spec), dtype=float
        ), RunStatus(completed=True, steps_completed=trajectory.horizon)
    run = run_filter(
        algorithm, scenario.model, scenario.init, trajectory.measurements, spec
    )
    if not run.status.completed:
        return None, run.status
    return run.estimates(), run.status


def _algorithm_name(algorithm) -> str:
    if callable(algorithm):
        return getattr(algorithm, "__name__", "custom")
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return algorithm


def run_monte_carlo(
    algorithms,
    scenario: Scenario,
    runs: int,
    master_seed: int,
    spec: KernelSpec,
) -> dict[str, RmseReport]:
    """Monte Carlo RMSE evaluation under equal conditions.

    Each run index produces one trajectory from (master_seed, run index) that
    every algorithm consumes identically. ``algorithms`` may mix algorithm
    names and callables ``(model, init, trajectory, spec) -> estimates`` (the
    latter mainly for test stubs).
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    algorithms = list(algorithms)
    names = [_algorithm_name(a) for a in algorithms]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate algorithm names in {names}")
    n = scenario.model.state_dim
    horizon = scenario.horizon
    sq_sum = {name: np.zeros((horizon, n)) for name in names}
    completed = {name: 0 for name in names}
    statuses = {name: [] for name in names}
    for run_index in range(runs):
        trajectory = simulate(
            scenario.model,
            scenario.init,
            horizon,
            SeedSpec(master_seed, run_index),
            scenario.shot,
        )
        for algorithm, name in zip(algorithms, names):
            estimates, status = _estimates_for(algorithm, scenario, trajectory, spec)
            statuses[name].append(status)
            if estimates is None:
                continue
            err = trajectory.truth - estimates
            sq_sum[name] += err * err
            completed[name] += 1
    reports = {}
    for name in names:
        if completed[name] > 0:
            per_component = np.sqrt(sq_sum[name] / completed[name])
            total = np.sqrt((per_component**2).sum(axis=1))
            scalar = float(total.mean())
        else:
            per_component = np.full((horizon, n), np.nan)
            total = np.full(horizon, np.nan)
            scalar = float("nan")
        reports[name] = RmseReport(
            algorithm=name,
            per_component=per_component,
            total=total,
            scalar_summary=scalar,
            completed_runs=completed[name],
            diverged_runs=runs - completed[name],
            statuses=statuses[name],
        )
    return reports


@dataclass(frozen=True)
class SweepEntry:
    """Outcome of one (delta, algorithm) cell of the conditioning sweep."""

    delta: float
    algorithm: str
    scalar_rmse: float
    completed_runs: int
    diverged_runs: int
    blown_up: bool


@dataclass
class SweepReport:
    """Per-delta summaries and the breakdown delta of each algorithm.

    ``breakdown_delta[name]`` is the largest delta at which the algorithm
    diverged or exceeded the blow-up threshold, or None if it never did.
    """

    delta_grid: list
    entries: list
    baseline: dict
    breakdown_delta: dict


def run_conditioning_sweep(
    algorithms,
    delta_grid,
    runs: int,
    master_seed: int,
    spec: KernelSpec,
    constants: RadarConstants = RadarConstants(),
) -> SweepReport:
    """Sweep the ill-conditioning parameter over a descending grid.

    At each delta the full Monte Carlo evaluation runs with shared seeds; an
    entry is blown up when any run diverged or when its summary RMSE exceeds
    ``BLOWUP_FACTOR`` times the same algorithm's value at the first (largest)
    grid point.
    """
    delta_grid = [float(d) for d in delta_grid]
    if not delta_grid:
        raise ValueError("delta grid must not be empty")
    if any(b >= a for a, b in zip(delta_grid, delta_grid[1:])):
        raise ValueError("delta grid must be strictly decreasing")
    names = [_algorithm_name(a) for a in algorithms]
    per_delta = {}
    for delta in delta_grid:
        scenario = ill_conditioned_scenario(delta, constants)
        per_delta[delta] = run_monte_carlo(algorithms, scenario, runs, master_seed, spec)
    baseline = {
        name: per_delta[delta_grid[0]][name].scalar_summary for name in names
    }
    entries = []
    breakdown: dict = {name: None for name in names}
    for delta in delta_grid:
        for name in names:
            report = per_delta[delta][name]
            scalar = report.scalar_summary
            blown = (
                report.diverged_runs > 0
                or not math.isfinite(scalar)
                or not math.isfinite(baseline[name])
                or scalar > BLOWUP_FACTOR * baseline[name]
            )
            entries.append(
                SweepEntry(
                    delta=delta,
                    algorithm=name,
                    scalar_rmse=scalar,
                    completed_runs=report.completed_runs,
                    diverged_runs=report.diverged_runs,
                    blown_up=blown,
                )
            )
            if blown and (breakdown[name] is None or delta > breakdown[name]):
                breakdown[name] = delta
    return SweepReport(
        delta_grid=delta_grid,
        entries=entries,
        baseline=baseline,
        breakdown_delta=breakdown,
    )


def _format(value: float) -> str:
    return f"{value:.17g}"


def write_csv(report, path) -> None:
    """Write an RmseReport or SweepReport as CSV with 17 significant digits.

    Deterministic row ordering; parsing the file back recovers the in-memory
    values exactly.
    """
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if isinstance(report, RmseReport):
                n = report.per_component.shape[1]
                writer.writerow(
                    ["step"] + [f"rmse_x{i + 1}" for i in range(n)] + ["total"]
                )
                for k in range(report.per_component.shape[0]):
                    writer.writerow(
                        [str(k + 1)]
                        + [_format(v) for v in report.per_component[k]]
                        + [_format(report.total[k])]
                    )
            elif isinstance(report, SweepReport):
                writer.writerow(
                    ["delta", "algorithm", "scalar_rmse", "status", "breakdown_flag"]
                )
                for entry in report.entries:
                    status = (
                        "ok"
                        if entry.diverged_runs == 0
                        else f"diverged {entry.diverged_runs}/"
                        f"{entry.diverged_runs + entry.completed_runs}"
                    )
                    writer.writerow(
                        [
                            _format(entry.delta),
                            entry.algorithm,
                            _format(entry.scalar_rmse),
                            status,
                            str(int(entry.blown_up)),
                        ]
                    )
            else:
                raise TypeError(f"cannot serialize report of type {type(report)!r}")
    except OSError as exc:
        raise OSError(f"failed writing CSV to {path}: {exc}") from exc
