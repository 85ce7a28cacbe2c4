"""Eigen Monte Carlo: steady-state distributions from every intertemporal path transition."""

__version__ = "0.1.0"

from .chain import (
    StochasticMatrix,
    TransitionCounts,
    accumulate_ensemble,
    accumulate_transitions,
    normalize_rows,
    record_terminal_transition,
    terminal_histogram,
)
from .distribution import DistributionVector
from .experiments import ExperimentResult, run_binomial_experiment, run_diffusion_experiment, run_sweep
from .grid import StateGrid, index_to_value, value_to_index
from .metrics import ConvergenceCurve, VarianceReport, call_price, paper_wasserstein, variance_report, wasserstein1
from .simulate import (
    PathEnsemble,
    SimulationConfig,
    derive_seed,
    simulate_binomial_path,
    simulate_ensemble,
    simulate_gbm_path,
)
from .stationary import SolverReport, spectral_check, stationary_eigen, stationary_power, stationary_svd
