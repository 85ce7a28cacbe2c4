import numpy as np
import pytest

from eigenmc import SimulationConfig, run_binomial_experiment, run_diffusion_experiment, run_sweep
from eigenmc.experiments import snapshot_schedule, terminal_counts
from eigenmc.simulate import simulate_ensemble


def test_snapshot_schedule():
    s = snapshot_schedule(100_000)
    assert list(s[:1000]) == list(range(1, 1001))
    assert s[-1] == 100_000
    assert {10, 100, 1000, 10_000, 100_000} <= set(s.tolist())
    assert np.all(np.diff(s) > 0)
    assert len(snapshot_schedule(5000, exact=True)) == 5000
    assert list(snapshot_schedule(3)) == [1, 2, 3]


@pytest.fixture(scope="module")
def binomial_run():
    return run_binomial_experiment(SimulationConfig(n_paths=5000, master_seed=3), replications=3)


def test_binomial_final_distance_is_zero(binomial_run):
    for curve in binomial_run.curves.values():
        assert curve.n_paths[-1] == 5000
        assert curve.distance[-1] == 0.0


def test_binomial_bands_and_variance(binomial_run):
    band = binomial_run.bands["paper-w"]
    assert band["mean"].shape == band["std"].shape == binomial_run.curves["paper-w"].n_paths.shape
    assert np.all(band["std"] >= 0)
    assert binomial_run.variance["eigen"].n_replications == 3


def test_binomial_distributions_are_valid(binomial_run):
    for d in binomial_run.distributions.values():
        assert abs(d.probs.sum() - 1) <= 1e-10
    assert binomial_run.max_residual <= 1e-10
    assert binomial_run.converged
    assert set(binomial_run.runtimes) >= {"simulate", "accumulate", "snapshots", "baseline"}


def test_binomial_first_replication_matches_single_run(binomial_run):
    single = run_binomial_experiment(SimulationConfig(n_paths=5000, master_seed=3))
    np.testing.assert_array_equal(single.curves["w1"].distance, binomial_run.curves["w1"].distance)


def test_binomial_average_baseline():
    r = run_binomial_experiment(SimulationConfig(n_paths=300, master_seed=2), baseline="average")
    assert r.baseline.provenance == "average"
    assert abs(r.baseline.probs.sum() - 1) <= 1e-10


@pytest.mark.parametrize("solver", ["power", "svd"])
def test_binomial_alternative_solvers(solver):
    r = run_binomial_experiment(SimulationConfig(n_paths=200, master_seed=2), solver=solver)
    assert len(r.snapshots) == 200


def test_binomial_rejects_wrong_model():
    with pytest.raises(ValueError):
        run_binomial_experiment(SimulationConfig.diffusion_default())
    with pytest.raises(ValueError):
        run_binomial_experiment(SimulationConfig(), baseline="median")


def test_diffusion_defaults_shape():
    r = run_diffusion_experiment(SimulationConfig.diffusion_default(), replications=2, keep_paths=True)
    assert r.ensemble.values.shape == (300, 31)
    assert r.counts.n_states == 41
    assert r.counts.total_transitions == 300 * 30
    for d in r.distributions.values():
        assert abs(d.probs.sum() - 1) <= 1e-10
    assert r.prices["classic"] >= 0 and r.prices["eigen"] >= 0


def test_diffusion_zero_noise_is_degenerate():
    cfg = SimulationConfig.diffusion_default(sigma=0.0, n_paths=20)
    r = run_diffusion_experiment(cfg, replications=2)
    ens = simulate_ensemble(cfg)
    assert np.all(ens.values == ens.values[0])
    classic, eigen = r.distributions["classic"].probs, r.distributions["eigen"].probs
    assert classic.max() == 1.0
    # a single deterministic walk ends absorbed in its terminal state
    np.testing.assert_array_equal(eigen, classic)
    assert r.variance["eigen"].total_variance == 0 == r.variance["classic"].total_variance


def test_diffusion_nonconvergence_is_flagged():
    r = run_diffusion_experiment(SimulationConfig.diffusion_default(), replications=3, solver="svd")
    assert not r.converged
    assert len(r.nonconverged) == 3
    assert all(rep.warnings for rep in r.solver_reports)


def test_terminal_counts_total():
    ens = simulate_ensemble(SimulationConfig(n_paths=50))
    assert terminal_counts(ens, ens.config.grid).total_transitions == 50


def test_sweep_cardinality():
    cells = run_sweep(SimulationConfig(n_paths=10), {"n_paths": [10, 100, 1000]})
    assert [c.params["n_paths"] for c in cells] == [10, 100, 1000]
    assert all(c.result is not None for c in cells)
    assert len({c.result.config.master_seed for c in cells}) == 3


def test_sweep_grid_sizes():
    cells = run_sweep(SimulationConfig(n_paths=300), {"n_states": [21, 41]})
    grids = [c.result.config.grid for c in cells]
    assert [g.n_states for g in grids] == [21, 41]
    assert [g.increment for g in grids] == [0.1, 0.05]
    assert all(g.upper_value == 2.0 for g in grids)
    assert len(cells[1].result.baseline) == 41


def test_sweep_rejects_degenerate_grid():
    cells = run_sweep(SimulationConfig(n_paths=20), {"n_states": [1, 21]})
    assert cells[0].result is None and "n_states" in cells[0].skipped
    assert cells[1].result is not None


def test_sweep_skips_infeasible_cells():
    cells = run_sweep(SimulationConfig.diffusion_default(n_paths=20), {"sigma": [0.01, -1.0]}, replications=2)
    assert cells[0].result is not None
    assert cells[1].result is None and "sigma" in cells[1].skipped


@pytest.mark.parametrize("ranges", [{}, {"n_paths": []}, {"strike": [1.0]}])
def test_sweep_precondition(ranges):
    with pytest.raises(ValueError):
        run_sweep(SimulationConfig(), ranges)


def test_diffusion_variance_ratio_is_reported():
    r = run_diffusion_experiment(SimulationConfig.diffusion_default(), replications=30)
    assert r.variance["eigen"].n_replications == r.variance["classic"].n_replications == 30
    assert r.variance_ratio() == pytest.approx(89.76198274161884, rel=1e-12)


@pytest.mark.xfail(strict=True, reason="measured eigen variance is about 90x the terminal-histogram variance; "
                                       "the steady state piles up against the clamped top of the grid")
def test_diffusion_eigen_variance_below_classic():
    r = run_diffusion_experiment(SimulationConfig.diffusion_default(), replications=30)
    assert r.variance["eigen"].total_variance < r.variance["classic"].total_variance
