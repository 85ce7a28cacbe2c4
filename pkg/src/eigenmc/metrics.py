"""Distances between grid distributions, replication variance, call pricing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import StateGrid


def _vectors(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"distributions must have equal lengths, got {p.shape} and {q.shape}")
    return p, q


def paper_wasserstein(p, q) -> float:
    """Root-mean-square gap between two mass vectors, ``sqrt(mean((p - q)**2))``.

    The mean runs over states (divisor n).  Despite the name this is not an
    optimal-transport distance; see :func:`wasserstein1` for that.
    """
    p, q = _vectors(p, q)
    return float(np.sqrt(np.mean((p - q) ** 2)))


def wasserstein1(p, q, grid: StateGrid) -> float:
    """Earth mover's distance on the grid: ``increment * sum |CDF_p - CDF_q|``."""
    p, q = _vectors(p, q)
    if p.size != grid.n_states:
        raise ValueError(f"distribution length {p.size} does not match grid size {grid.n_states}")
    gap = np.cumsum(p - q)[:-1]
    return float(grid.increment * np.sum(np.abs(gap)))


def call_price(dist, grid: StateGrid, strike: float, discount: float = 1.0) -> float:
    """Discounted expected call payoff ``max(S - K, 0)`` under `dist`."""
    if not 0.0 < discount <= 1.0:
        raise ValueError("discount must lie in (0, 1]")
    p = np.asarray(dist, dtype=float)
    payoff = np.maximum(grid.values - strike, 0.0)
    return float(discount * np.dot(p, payoff))


@dataclass(frozen=True)
class VarianceReport:
    per_state_variance: np.ndarray
    total_variance: float
    n_replications: int
    method: str


def variance_report(replications, method: str = "eigen") -> VarianceReport:
    """Unbiased per-state variance of probability mass across replications."""
    rows = np.array([np.asarray(r, dtype=float) for r in replications])
    if rows.ndim != 2:
        raise ValueError("replications must share one length")
    if rows.shape[0] < 2:
        raise ValueError("need at least 2 replications")
    var = rows.var(axis=0, ddof=1)
    return VarianceReport(var, float(var.sum()), rows.shape[0], method)


@dataclass(frozen=True)
class ConvergenceCurve:
    """Distance to the baseline after the first ``n_paths[i]`` paths."""

    n_paths: np.ndarray
    distance: np.ndarray
    metric: str

    def __post_init__(self):
        n = np.asarray(self.n_paths, dtype=np.int64)
        d = np.asarray(self.distance, dtype=float)
        if n.shape != d.shape:
            raise ValueError("n_paths and distance must align")
        if np.any(np.diff(n) <= 0):
            raise ValueError("n_paths must be strictly increasing")
        if np.any(d < 0):
            raise ValueError("distances are nonnegative")
        object.__setattr__(self, "n_paths", n)
        object.__setattr__(self, "distance", d)

    def at(self, n: int) -> float:
        i = np.searchsorted(self.n_paths, n)
        if i == len(self.n_paths) or self.n_paths[i] != n:
            raise KeyError(f"no snapshot at n={n}")
        return float(self.distance[i])

    def window_means(self, width: int = 10) -> np.ndarray:
        """Means over consecutive non-overlapping blocks of `width` snapshots; a short tail block is kept."""
        d = self.distance
        starts = np.arange(0, len(d), width)
        return np.add.reduceat(d, starts) / np.diff(np.append(starts, len(d)))
