"""Transition-count accumulation and row normalisation.

Two ways of turning paths into a Markov chain live here: recording every
intertemporal step ``s[t-1] -> s[t]`` (the eigen method), or only the
endpoint pair ``s[0] -> s[T]`` (classic terminal-state Monte Carlo).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CorruptStateError, StateGrid
from .distribution import DistributionVector

REPAIRS = ("restrict", "self-loop", "uniform-row")
_MAX_COUNT = np.iinfo(np.int64).max


class EmptyChainError(ValueError):
    """Raised when normalising a count matrix with no recorded transitions."""


class TransitionCounts:
    """Integer matrix of observed from-state -> to-state transitions.

    Accumulation mutates the matrix in place.  Worker-local matrices merge with
    ``+``; the result does not depend on the order paths were recorded.
    """

    def __init__(self, n_states: int, counts: np.ndarray | None = None):
        if counts is None:
            counts = np.zeros((n_states, n_states), dtype=np.int64)
        counts = np.asarray(counts)
        if counts.shape != (n_states, n_states):
            raise ValueError(f"counts must be {n_states}x{n_states}, got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("transition counts must be nonnegative")
        self.n_states = int(n_states)
        self.counts = counts.astype(np.int64, copy=False)

    @classmethod
    def for_grid(cls, grid: StateGrid) -> "TransitionCounts":
        return cls(grid.n_states)

    @property
    def total_transitions(self) -> int:
        return int(self.counts.sum())

    def copy(self) -> "TransitionCounts":
        return TransitionCounts(self.n_states, self.counts.copy())

    def add_flat(self, flat: np.ndarray) -> None:
        """Add a flattened ``n*n`` count vector (``from * n + to`` layout)."""
        incoming = flat.reshape(self.n_states, self.n_states)
        if np.any(incoming > _MAX_COUNT - self.counts):
            raise OverflowError("transition count overflow")
        self.counts += incoming

    def __add__(self, other: "TransitionCounts") -> "TransitionCounts":
        if not isinstance(other, TransitionCounts):
            return NotImplemented
        if other.n_states != self.n_states:
            raise ValueError("cannot merge count matrices of different sizes")
        out = self.copy()
        out.add_flat(other.counts.ravel())
        return out

    def __eq__(self, other):
        if not isinstance(other, TransitionCounts):
            return NotImplemented
        return self.n_states == other.n_states and np.array_equal(self.counts, other.counts)

    def __repr__(self):
        return f"TransitionCounts(n_states={self.n_states}, total_transitions={self.total_transitions})"


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic matrix over the retained states.

    ``state_map[j]`` is the original grid index of row/column ``j``;
    `n_states` is the size of the full grid the matrix came from.
    """

    probs: np.ndarray
    state_map: np.ndarray
    n_states: int
    repair: str = "restrict"

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("transition matrix must be square")
        if p.shape[0] != len(self.state_map):
            raise ValueError("state_map length must match the matrix size")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if not np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12):
            raise ValueError("rows of a stochastic matrix must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "state_map", np.asarray(self.state_map, dtype=np.int64))

    @classmethod
    def from_array(cls, probs, repair: str = "restrict") -> "StochasticMatrix":
        """Wrap a dense row-stochastic array whose states are the whole grid."""
        p = np.asarray(probs, dtype=float)
        return cls(p, np.arange(p.shape[0]), p.shape[0], repair)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    def embed(self, vector: np.ndarray) -> np.ndarray:
        """Scatter a vector over retained states back onto the full grid."""
        full = np.zeros(self.n_states)
        full[self.state_map] = vector
        return full


def _path_indices(path, grid):
    values = np.asarray(path, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("a path needs at least two values")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise CorruptStateError(f"non-finite value {values[bad[0]]!r} at step {bad[0]}")
    return grid.indices(values)


def accumulate_transitions(counts: TransitionCounts, path, grid: StateGrid) -> TransitionCounts:
    """Record every step ``s[t-1] -> s[t]`` of `path`; exactly T increments."""
    idx = _path_indices(path, grid)
    np.add.at(counts.counts, (idx[:-1], idx[1:]), 1)
    return counts


def record_terminal_transition(counts: TransitionCounts, path, grid: StateGrid) -> TransitionCounts:
    """Record only the endpoint pair ``s[0] -> s[T]``."""
    idx = _path_indices(path, grid)
    counts.counts[idx[0], idx[-1]] += 1
    return counts


def transition_codes(values: np.ndarray, grid: StateGrid) -> np.ndarray:
    """Flat ``from * n + to`` codes for every step of every path, shape (N, T)."""
    idx = grid.indices(values)
    return idx[:, :-1] * grid.n_states + idx[:, 1:]


def accumulate_ensemble(counts: TransitionCounts, values: np.ndarray, grid: StateGrid) -> TransitionCounts:
    """Vectorised :func:`accumulate_transitions` over the rows of an (N, T+1) array."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] < 2:
        raise ValueError("expected an (N, T+1) array with T >= 1")
    codes = transition_codes(values, grid)
    counts.add_flat(np.bincount(codes.ravel(), minlength=grid.n_states**2))
    return counts


def normalize_rows(counts: TransitionCounts, repair: str = "restrict") -> StochasticMatrix:
    """Turn counts into a row-stochastic matrix, repairing rows with no exits.

    restrict
        drop states never touched (zero row and zero column); a state that was
        entered but never left becomes absorbing.
    self-loop
        keep every state; zero rows become absorbing.
    uniform-row
        keep every state; zero rows become ``1/n``.
    """
    if repair not in REPAIRS:
        raise ValueError(f"repair must be one of {REPAIRS}, got {repair!r}")
    c = counts.counts
    if counts.total_transitions == 0:
        raise EmptyChainError("no transitions recorded")
    n = counts.n_states
    if repair == "restrict":
        keep = np.flatnonzero((c.sum(axis=1) > 0) | (c.sum(axis=0) > 0))
        c = c[np.ix_(keep, keep)]
    else:
        keep = np.arange(n)
    c = c.astype(float)
    row_sums = c.sum(axis=1)
    empty = row_sums == 0
    probs = np.divide(c, row_sums[:, None], out=np.zeros_like(c), where=~empty[:, None])
    if repair == "uniform-row":
        probs[empty] = 1.0 / len(keep)
    else:
        probs[np.flatnonzero(empty), np.flatnonzero(empty)] = 1.0
    return StochasticMatrix(probs, keep, n, repair)


def terminal_histogram(ensemble, grid: StateGrid) -> DistributionVector:
    """Share of paths whose final value falls in each grid state."""
    values = ensemble.values if hasattr(ensemble, "values") else np.asarray(ensemble, dtype=float)
    if values.ndim != 2 or len(values) == 0:
        raise ValueError("expected a non-empty (N, T+1) ensemble")
    final = grid.indices(values[:, -1])
    mass = np.bincount(final, minlength=grid.n_states) / len(final)
    return DistributionVector(mass, "terminal-histogram")
