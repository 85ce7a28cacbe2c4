"""Uniform state grids mapping continuous simulated values to Markov states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CorruptStateError(ValueError):
    """Raised when a simulated value is NaN or infinite."""


@dataclass(frozen=True)
class StateGrid:
    """Uniformly spaced states ``lower_value + i * increment`` for ``i < n_states``.

    Values outside the covered range are clamped into the boundary states.
    """

    lower_value: float
    increment: float
    n_states: int

    def __post_init__(self):
        if not np.isfinite(self.lower_value):
            raise ValueError("lower_value must be finite")
        if not (np.isfinite(self.increment) and self.increment > 0):
            raise ValueError(f"increment must be > 0, got {self.increment!r}")
        if int(self.n_states) != self.n_states or self.n_states < 2:
            raise ValueError(f"n_states must be an integer >= 2, got {self.n_states!r}")
        object.__setattr__(self, "lower_value", float(self.lower_value))
        object.__setattr__(self, "increment", float(self.increment))
        object.__setattr__(self, "n_states", int(self.n_states))

    @property
    def upper_value(self) -> float:
        return self.lower_value + (self.n_states - 1) * self.increment

    @property
    def values(self) -> np.ndarray:
        """Representative value of every state, in index order."""
        return self.lower_value + np.arange(self.n_states) * self.increment

    def indices(self, values) -> np.ndarray:
        """Vectorised :func:`value_to_index` over an array of any shape."""
        v = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise CorruptStateError("non-finite simulated value")
        # nearest index, exact halves go to the lower index
        idx = np.ceil((v - self.lower_value) / self.increment - 0.5)
        return np.clip(idx, 0, self.n_states - 1).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "lower_value": self.lower_value,
            "increment": self.increment,
            "n_states": self.n_states,
        }


def value_to_index(grid: StateGrid, value: float) -> int:
    """Index of the state nearest to `value`, clamped to the grid."""
    if not np.isfinite(value):
        raise CorruptStateError(f"non-finite simulated value {value!r}")
    return int(grid.indices(value))


def index_to_value(grid: StateGrid, index: int) -> float:
    """Representative value of state `index`."""
    if int(index) != index or not 0 <= index < grid.n_states:
        raise IndexError(f"state index {index!r} outside [0, {grid.n_states - 1}]")
    return grid.lower_value + int(index) * grid.increment


BINOMIAL_GRID = StateGrid(0.0, 0.1, 21)
DIFFUSION_GRID = StateGrid(80.0, 1.0, 41)
