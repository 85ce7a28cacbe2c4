"""Path simulators for the binomial walk and the lognormal diffusion.

Every path owns its random stream.  Path ``k`` of an ensemble gets the seed
``derive_seed(master_seed, k)`` and draws its step variates from the SplitMix64
sequence started at that seed: draw ``t`` (1-based) is
``mix64(seed + t * 0x9E3779B97F4A7C15)``.  Draws are therefore a pure function
of ``(master_seed, k, t)`` and an ensemble is reproducible bit for bit however
the path indices are split between workers.  The top 53 bits of a draw give a
uniform in [0, 1); normals come from the inverse normal CDF at the cell midpoint.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .grid import BINOMIAL_GRID, DIFFUSION_GRID, StateGrid

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

MODELS = ("binomial", "gbm")
DRIFT_CORRECTIONS = ("paper", "standard")


class SimulationResourceError(MemoryError):
    """Raised when an ensemble cannot be allocated; carries the path index reached."""

    def __init__(self, message, path_index):
        super().__init__(message)
        self.path_index = path_index


def splitmix64(x: int) -> int:
    """SplitMix64 step: add the golden gamma, then the 64-bit avalanche finalizer."""
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of stream `index` under `master_seed`.

    ``splitmix64(splitmix64(master_seed) XOR index)``; both inputs are taken
    modulo 2**64.
    """
    return splitmix64(splitmix64(int(master_seed) & _MASK64) ^ (int(index) & _MASK64))


def _mix64(z):
    # uint64 array arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def derive_seeds(master_seed: int, indices) -> np.ndarray:
    """Vectorised :func:`derive_seed` over an array of stream indices."""
    base = np.uint64(splitmix64(int(master_seed) & _MASK64))
    idx = np.asarray(indices).astype(np.uint64)
    return _mix64((base ^ idx) + np.uint64(_GOLDEN_GAMMA))


def stream_draws(seeds, n_draws: int) -> np.ndarray:
    """Raw 64-bit draws, shape ``(len(seeds), n_draws)``; row k is the SplitMix64 stream of ``seeds[k]``."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    steps = np.arange(1, n_draws + 1, dtype=np.uint64) * np.uint64(_GOLDEN_GAMMA)
    return _mix64(seeds[:, None] + steps[None, :])


def stream_uniforms(seeds, n_draws: int) -> np.ndarray:
    """Uniforms on the 2**-53 lattice of [0, 1)."""
    return (stream_draws(seeds, n_draws) >> np.uint64(11)) * 2.0**-53


def stream_normals(seeds, n_draws: int) -> np.ndarray:
    """Standard normals by inversion of the midpoint uniform, never infinite."""
    return ndtri(((stream_draws(seeds, n_draws) >> np.uint64(11)) + 0.5) * 2.0**-53)


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to simulate and price one ensemble.

    `up_factor`, `down_factor` and `p_up` drive the binomial model; `mu`,
    `sigma`, `dt` and `drift_correction` drive the diffusion.  With
    ``drift_correction="paper"`` the per-step log increment is
    ``(mu + sigma**2 / 2) * dt + sigma * sqrt(dt) * Z``; ``"standard"`` uses
    the Ito form with ``- sigma**2 / 2``.
    """

    model: str = "binomial"
    s0: float = 1.0
    horizon: int = 9
    n_paths: int = 100_000
    master_seed: int = 1
    up_factor: float = 1.1
    down_factor: float = 0.9
    p_up: float = 0.5
    mu: float = 0.002
    sigma: float = 0.01
    dt: float = 1.0
    drift_correction: str = "paper"
    grid: StateGrid = field(default_factory=lambda: BINOMIAL_GRID)
    strike: float = 1.0
    discount: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.drift_correction not in DRIFT_CORRECTIONS:
            raise ValueError(f"drift_correction must be one of {DRIFT_CORRECTIONS}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be an integer >= 1")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError("n_paths must be an integer >= 1")
        if not (self.up_factor > 0 and self.down_factor > 0):
            raise ValueError("up_factor and down_factor must be > 0")
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError("p_up must lie in [0, 1]")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not (np.isfinite(self.s0) and self.s0 > 0):
            raise ValueError("s0 must be finite and > 0")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        if not isinstance(self.grid, StateGrid):
            raise TypeError("grid must be a StateGrid")

    @classmethod
    def binomial_default(cls, **overrides) -> "SimulationConfig":
        """The +/-10% walk: S0=1, T=9, 21 states of width 0.1 from 0."""
        return cls(**overrides)

    @classmethod
    def diffusion_default(cls, **overrides) -> "SimulationConfig":
        """The call-option diffusion: S0=100, T=30, N=300, K=110, whole-value states 80..120."""
        params = dict(
            model="gbm", s0=100.0, horizon=30, n_paths=300,
            mu=0.002, sigma=0.01, dt=1.0, grid=DIFFUSION_GRID, strike=110.0,
        )
        params.update(overrides)
        return cls(**params)

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["grid"] = self.grid.to_dict()
        return d


@dataclass(frozen=True)
class PathEnsemble:
    """N paths of length T+1 stored row-wise in `values`."""

    values: np.ndarray
    config: SimulationConfig
    seeds: np.ndarray

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, k) -> np.ndarray:
        return self.values[k]

    def __iter__(self):
        return iter(self.values)

    @property
    def horizon(self) -> int:
        return self.values.shape[1] - 1


def _binomial_block(config, seeds):
    ups = stream_uniforms(seeds, config.horizon) < config.p_up
    factors = np.where(ups, config.up_factor, config.down_factor)
    out = np.empty((len(seeds), config.horizon + 1))
    out[:, 0] = config.s0
    np.cumprod(factors, axis=1, out=out[:, 1:])
    out[:, 1:] *= config.s0
    return out


def _gbm_block(config, seeds):
    z = stream_normals(seeds, config.horizon)
    half_var = 0.5 * config.sigma**2
    drift = config.mu + half_var if config.drift_correction == "paper" else config.mu - half_var
    log_steps = drift * config.dt + config.sigma * np.sqrt(config.dt) * z
    out = np.zeros((len(seeds), config.horizon + 1))
    np.cumsum(log_steps, axis=1, out=out[:, 1:])
    return config.s0 * np.exp(out)


def simulate_binomial_path(config: SimulationConfig, seed: int) -> np.ndarray:
    """One binomial path: each step multiplies by `up_factor` with probability `p_up`, else `down_factor`."""
    if config.model != "binomial":
        raise ValueError("config.model must be 'binomial'")
    return _binomial_block(config, [seed])[0]


def simulate_gbm_path(config: SimulationConfig, seed: int) -> np.ndarray:
    """One path of the exponential diffusion update."""
    if config.model != "gbm":
        raise ValueError("config.model must be 'gbm'")
    return _gbm_block(config, [seed])[0]


_BLOCK_PATHS = 1 << 16


def _simulate_block(config, seeds, start):
    step = _binomial_block if config.model == "binomial" else _gbm_block
    try:
        out = np.empty((len(seeds), config.horizon + 1))
    except MemoryError as exc:
        raise SimulationResourceError(f"cannot allocate {len(seeds)} paths from index {start}", start) from exc
    for a in range(0, len(seeds), _BLOCK_PATHS):
        try:
            out[a:a + _BLOCK_PATHS] = step(config, seeds[a:a + _BLOCK_PATHS])
        except MemoryError as exc:
            raise SimulationResourceError(f"out of memory at path {start + a}", start + a) from exc
    return out


def simulate_ensemble(config: SimulationConfig, workers: int = 1) -> PathEnsemble:
    """Simulate ``config.n_paths`` paths.

    With ``workers > 1`` contiguous blocks of path indices are simulated in
    separate processes and concatenated by index; the result is identical to
    the single-process one.
    """
    n = config.n_paths
    seeds = derive_seeds(config.master_seed, np.arange(n))
    if workers <= 1 or n < 2 * workers:
        values = _simulate_block(config, seeds, 0)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        chunks = [seeds[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_simulate_block, [config] * workers, chunks, bounds[:-1]))
        values = np.concatenate(blocks, axis=0)
    return PathEnsemble(values=values, config=config, seeds=seeds)
