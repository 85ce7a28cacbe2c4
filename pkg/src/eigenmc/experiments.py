"""The binomial convergence study, the diffusion pricing comparison, and sweeps.

Seeds: replication ``r`` of a run with master seed ``m`` simulates with master
seed ``m + r``; sweep cell ``i`` starts from ``m + i * SWEEP_SEED_STRIDE``.
Within an ensemble, path ``k`` uses ``derive_seed(master, k)``.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    TransitionCounts,
    accumulate_ensemble,
    normalize_rows,
    record_terminal_transition,
    terminal_histogram,
    transition_codes,
)
from .distribution import DistributionVector
from .grid import StateGrid
from .metrics import ConvergenceCurve, VarianceReport, call_price, paper_wasserstein, variance_report, wasserstein1
from .simulate import PathEnsemble, SimulationConfig, simulate_ensemble
from .stationary import SolverReport, StationaryConvergenceError, solve

log = logging.getLogger(__name__)

METRICS = ("paper-w", "w1")
BASELINES = ("final", "average")
SWEEPABLE = ("n_paths", "horizon", "n_states", "sigma", "mu")
SWEEP_SEED_STRIDE = 10_000
LINEAR_SNAPSHOTS = 1000
SNAPSHOTS_PER_DECADE = 40


def snapshot_schedule(n_paths: int, exact: bool = False) -> np.ndarray:
    """Path counts at which the cumulative chain is solved.

    Every path up to 1000, then about 40 log-spaced points per decade; powers
    of ten and `n_paths` itself are always included.
    """
    if exact or n_paths <= LINEAR_SNAPSHOTS:
        return np.arange(1, n_paths + 1)
    decades = np.log10(n_paths / LINEAR_SNAPSHOTS)
    tail = np.geomspace(LINEAR_SNAPSHOTS, n_paths, int(np.ceil(decades * SNAPSHOTS_PER_DECADE)) + 1)
    powers = 10 ** np.arange(3, int(np.log10(n_paths)) + 1)
    points = np.concatenate([np.arange(1, LINEAR_SNAPSHOTS + 1), np.round(tail), powers, [n_paths]])
    return np.unique(points.astype(np.int64))


@dataclass
class SnapshotRow:
    n_paths: int
    paper_w: float
    w1: float
    converged: bool
    lambda_max: float
    residual: float


@dataclass
class ExperimentResult:
    """Everything a run produces; replication 0 supplies the single-run fields."""

    config: SimulationConfig
    settings: dict
    baseline: DistributionVector
    distributions: dict
    prices: dict
    solver_reports: list
    runtimes: dict
    snapshots: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)
    bands: dict = field(default_factory=dict)
    variance: dict = field(default_factory=dict)
    counts: TransitionCounts | None = None
    matrix: object = None
    ensemble: PathEnsemble | None = None
    nonconverged: list = field(default_factory=list)
    max_residual: float = 0.0

    @property
    def converged(self) -> bool:
        return not self.nonconverged

    def variance_ratio(self) -> float:
        """Total eigen variance over total classic variance."""
        return self.variance["eigen"].total_variance / self.variance["classic"].total_variance


class _Timer:
    def __init__(self):
        self.totals = {}

    def __call__(self, phase):
        timer = self

        class _Phase:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.totals[phase] = timer.totals.get(phase, 0.0) + time.perf_counter() - self.t0

        return _Phase()


def _safe_solve(matrix, solver):
    try:
        return solve(matrix, solver)
    except StationaryConvergenceError as exc:
        log.warning("stationary solve failed: %s", exc)
        report = SolverReport(solver, float("nan"), 0, exc.residual, False, 0, (str(exc),))
        return None, report


def _check(value, allowed, name):
    if value not in allowed:
        raise ValueError(f"{name} must be one of {allowed}, got {value!r}")


def _binomial_replication(config, solver, repair, baseline_mode, exact_snapshots, workers, timer):
    grid = config.grid
    n2 = grid.n_states**2
    with timer("simulate"):
        ensemble = simulate_ensemble(config, workers=workers)
    with timer("accumulate"):
        codes = transition_codes(ensemble.values, grid)
        full = TransitionCounts.for_grid(grid)
        full.add_flat(np.bincount(codes.ravel(), minlength=n2))

    schedule = snapshot_schedule(config.n_paths, exact_snapshots)
    snaps = np.zeros((len(schedule), grid.n_states))
    reports = []
    cumulative = TransitionCounts.for_grid(grid)
    done = 0
    with timer("snapshots"):
        for i, n in enumerate(schedule):
            cumulative.add_flat(np.bincount(codes[done:n].ravel(), minlength=n2))
            done = n
            dist, report = _safe_solve(normalize_rows(cumulative, repair), solver)
            reports.append(report)
            snaps[i] = np.nan if dist is None else dist.probs

    with timer("baseline"):
        matrix = normalize_rows(full, repair)
        if baseline_mode == "final":
            base, base_report = _safe_solve(matrix, solver)
            if base is None:
                raise StationaryConvergenceError("baseline solve failed", base_report.residual)
        else:
            ok = ~np.isnan(snaps[:, 0])
            base = DistributionVector.from_weights(snaps[ok].mean(axis=0), "average")
            base_report = SolverReport("average", float("nan"), int(ok.sum()), float("nan"), True)

    rows = []
    for n, vec, rep in zip(schedule, snaps, reports):
        if rep.converged:
            pw, w = paper_wasserstein(vec, base.probs), wasserstein1(vec, base.probs, grid)
        else:
            pw = w = float("nan")
        rows.append(SnapshotRow(int(n), pw, w, rep.converged, rep.lambda_max, rep.residual))
    return ensemble, full, matrix, base, base_report, rows


def run_binomial_experiment(
    config: SimulationConfig,
    *,
    replications: int = 1,
    solver: str = "eigen",
    repair: str = "restrict",
    baseline: str = "final",
    exact_snapshots: bool = False,
    workers: int = 1,
    keep_paths: bool = False,
) -> ExperimentResult:
    """Convergence of the n-path eigen distribution to the full-run baseline.

    For every replication the cumulative intertemporal chain is normalised and
    solved after each scheduled path count; the distance of that distribution
    to the baseline traces the convergence curve.  The baseline is the steady
    state of the chain after all paths (``baseline="final"``) or the mean of
    the snapshot steady states (``"average"``).  With several replications the
    per-snapshot mean and standard deviation of the distances form bands.
    """
    if config.model != "binomial":
        raise ValueError("run_binomial_experiment needs model='binomial'")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    _check(baseline, BASELINES, "baseline")
    timer = _Timer()
    grid = config.grid
    all_rows, base_reports, bases, histograms = [], [], [], []
    first = None
    for r in range(replications):
        cfg = config.replace(master_seed=config.master_seed + r)
        ensemble, full, matrix, base, base_report, rows = _binomial_replication(
            cfg, solver, repair, baseline, exact_snapshots, workers, timer
        )
        all_rows.append(rows)
        base_reports.append(base_report)
        bases.append(base)
        histograms.append(terminal_histogram(ensemble, grid))
        if first is None:
            first = (ensemble, full, matrix)

    ensemble, full, matrix = first
    rows = all_rows[0]
    n_axis = np.array([row.n_paths for row in rows])
    curves = {
        "paper-w": ConvergenceCurve(n_axis, np.array([row.paper_w for row in rows]), "paper-w"),
        "w1": ConvergenceCurve(n_axis, np.array([row.w1 for row in rows]), "w1"),
    }
    bands = {}
    if replications > 1:
        for metric, attr in (("paper-w", "paper_w"), ("w1", "w1")):
            d = np.array([[getattr(row, attr) for row in rs] for rs in all_rows])
            bands[metric] = {"n_paths": n_axis, "mean": d.mean(axis=0), "std": d.std(axis=0, ddof=1)}
    variance = {}
    if replications > 1:
        variance = {
            "eigen": variance_report(bases, "eigen"),
            "classic": variance_report(histograms, "classic"),
        }
    nonconverged = [
        {"replication": r, "n_paths": row.n_paths, "residual": row.residual}
        for r, rs in enumerate(all_rows)
        for row in rs
        if not row.converged
    ]
    residuals = [row.residual for rs in all_rows for row in rs if row.converged]
    residuals += [rep.residual for rep in base_reports if rep.method != "average"]
    classic = histograms[0]
    return ExperimentResult(
        config=config,
        settings=dict(experiment="binomial", replications=replications, solver=solver, repair=repair,
                      baseline=baseline, exact_snapshots=exact_snapshots),
        baseline=bases[0],
        distributions={"classic": classic, "eigen": bases[0]},
        prices={
            "classic": call_price(classic, grid, config.strike, config.discount),
            "eigen": call_price(bases[0], grid, config.strike, config.discount),
        },
        solver_reports=base_reports,
        runtimes=timer.totals,
        snapshots=rows,
        curves=curves,
        bands=bands,
        variance=variance,
        counts=full,
        matrix=matrix,
        ensemble=ensemble if keep_paths else None,
        nonconverged=nonconverged,
        max_residual=float(max(residuals)) if residuals else float("nan"),
    )


def terminal_counts(ensemble: PathEnsemble, grid: StateGrid) -> TransitionCounts:
    """Classic chain: one ``s[0] -> s[T]`` transition per path."""
    counts = TransitionCounts.for_grid(grid)
    for path in ensemble:
        record_terminal_transition(counts, path, grid)
    return counts


def run_diffusion_experiment(
    config: SimulationConfig,
    *,
    replications: int = 30,
    solver: str = "eigen",
    repair: str = "restrict",
    workers: int = 1,
    keep_paths: bool = False,
) -> ExperimentResult:
    """Terminal histogram against eigen steady state for the lognormal diffusion.

    Each replication simulates a fresh ensemble, builds the classic terminal
    histogram and the steady state of the all-steps chain, and prices the call
    under both.  Replications whose solve fails are listed in `nonconverged`
    and left out of the eigen variance.
    """
    if config.model != "gbm":
        raise ValueError("run_diffusion_experiment needs model='gbm'")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    timer = _Timer()
    grid = config.grid
    eigen_dists, classic_dists, reports, nonconverged = [], [], [], []
    first = None
    for r in range(replications):
        cfg = config.replace(master_seed=config.master_seed + r)
        with timer("simulate"):
            ensemble = simulate_ensemble(cfg, workers=workers)
        with timer("accumulate"):
            counts = accumulate_ensemble(TransitionCounts.for_grid(grid), ensemble.values, grid)
        with timer("solve"):
            matrix = normalize_rows(counts, repair)
            dist, report = _safe_solve(matrix, solver)
        with timer("classic"):
            classic = terminal_histogram(ensemble, grid)
        reports.append(report)
        classic_dists.append(classic)
        if dist is None or not report.converged:
            nonconverged.append({"replication": r, "master_seed": cfg.master_seed,
                                 "residual": report.residual, "warnings": list(report.warnings)})
        if dist is not None and report.converged:
            eigen_dists.append(dist)
        if first is None:
            first = (ensemble, counts, matrix, dist, classic)

    ensemble, counts, matrix, dist, classic = first
    variance = {}
    if len(eigen_dists) >= 2 and len(classic_dists) >= 2:
        variance = {
            "eigen": variance_report(eigen_dists, "eigen"),
            "classic": variance_report(classic_dists, "classic"),
        }
    residuals = [rep.residual for rep in reports if rep.converged]
    return ExperimentResult(
        config=config,
        settings=dict(experiment="diffusion", replications=replications, solver=solver, repair=repair),
        baseline=classic,
        distributions={"classic": classic, "eigen": dist},
        prices={
            "classic": call_price(classic, grid, config.strike, config.discount),
            "eigen": call_price(dist, grid, config.strike, config.discount) if dist is not None else float("nan"),
            "eigen_mean": float(np.mean([call_price(d, grid, config.strike, config.discount) for d in eigen_dists]))
            if eigen_dists else float("nan"),
            "classic_mean": float(np.mean([call_price(d, grid, config.strike, config.discount) for d in classic_dists])),
        },
        solver_reports=reports,
        runtimes=timer.totals,
        variance=variance,
        counts=counts,
        matrix=matrix,
        ensemble=ensemble if keep_paths else None,
        nonconverged=nonconverged,
        max_residual=float(max(residuals)) if residuals else float("nan"),
    )


@dataclass
class SweepCell:
    params: dict
    result: ExperimentResult | None
    skipped: str | None = None


def _apply(config, params):
    changes = {k: v for k, v in params.items() if k != "n_states"}
    if "n_states" in params:
        # same value range, finer or coarser spacing
        g, n = config.grid, params["n_states"]
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise ValueError(f"n_states must be an integer >= 2, got {n!r}")
        changes["grid"] = StateGrid(g.lower_value, (g.upper_value - g.lower_value) / (n - 1), int(n))
    return config.replace(**changes)


def run_sweep(config: SimulationConfig, ranges: dict, **experiment_kwargs) -> list[SweepCell]:
    """Run one experiment per point of the cross product of `ranges`.

    Keys are any of ``n_paths, horizon, n_states, sigma, mu``.  Sweeping
    ``n_states`` keeps the grid's value range and changes its spacing.  A
    combination that fails validation is kept as a skipped cell with the reason.
    """
    ranges = {k: list(v) for k, v in ranges.items() if v is not None}
    if not ranges or not any(ranges.values()):
        raise ValueError("sweep needs at least one parameter with values")
    unknown = set(ranges) - set(SWEEPABLE)
    if unknown:
        raise ValueError(f"cannot sweep {sorted(unknown)}; choose from {SWEEPABLE}")
    keys = list(ranges)
    cells = []
    for i, combo in enumerate(itertools.product(*(ranges[k] for k in keys))):
        params = dict(zip(keys, combo))
        try:
            cfg = _apply(config, params).replace(master_seed=config.master_seed + i * SWEEP_SEED_STRIDE)
        except (ValueError, TypeError) as exc:
            cells.append(SweepCell(params, None, str(exc)))
            continue
        runner = run_binomial_experiment if cfg.model == "binomial" else run_diffusion_experiment
        try:
            cells.append(SweepCell(params, runner(cfg, **experiment_kwargs)))
        except (ValueError, StationaryConvergenceError) as exc:
            cells.append(SweepCell(params, None, str(exc)))
    return cells
