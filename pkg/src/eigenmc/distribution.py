"""Probability vectors over grid states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROVENANCES = ("eigen", "power", "svd", "terminal-histogram", "average")
NEGATIVE_SLACK = 1e-14
SUM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class DistributionVector:
    """Nonnegative masses over grid states summing to one.

    Entries in ``[-1e-14, 0)`` are floating-point noise and are clipped to 0.
    """

    probs: np.ndarray
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("a distribution is a non-empty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("distribution has non-finite entries")
        if p.min() < -NEGATIVE_SLACK:
            raise ValueError(f"negative probability mass {p.min():.3e}")
        p[p < 0] = 0.0
        if abs(p.sum() - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    @classmethod
    def from_weights(cls, weights, provenance: str) -> "DistributionVector":
        """Normalise nonnegative weights to sum one."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0:
            raise ValueError("weights must have a positive sum")
        return cls(w / total, provenance)
