"""Steady-state distributions of row-stochastic matrices.

Three solvers share one contract: take a :class:`StochasticMatrix`, return a
:class:`DistributionVector` over the full grid together with a
:class:`SolverReport`.

``stationary_eigen`` is the reference.  It splits the chain into closed
communicating classes, solves the left eigenproblem on each, and when several
classes exist (a reducible chain, eigenvalue 1 repeated) keeps the classes of
largest support and averages their stationary vectors uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .chain import StochasticMatrix
from .distribution import DistributionVector

SOLVERS = ("eigen", "power", "svd")
RESIDUAL_TOLERANCE = 1e-10
SIGN_TOLERANCE = 1e-10


class StationaryConvergenceError(RuntimeError):
    """The eigen solver could not produce a valid stationary vector."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class SolverReport:
    method: str
    lambda_max: float
    iterations: int
    residual: float
    converged: bool
    multiplicity: int = 1
    warnings: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "lambda_max": self.lambda_max,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "multiplicity": self.multiplicity,
            "warnings": list(self.warnings),
        }


def _as_matrix(P) -> StochasticMatrix:
    return P if isinstance(P, StochasticMatrix) else StochasticMatrix.from_array(P)


def _residual(pi, P):
    return float(np.max(np.abs(pi @ P - pi)))


def spectral_check(P) -> float:
    """Modulus of the largest-magnitude eigenvalue; 1 for any row-stochastic matrix."""
    return float(np.max(np.abs(np.linalg.eigvals(_as_matrix(P).probs))))


def closed_classes(P: np.ndarray) -> list[np.ndarray]:
    """Closed communicating classes of the chain, ordered by smallest member."""
    n_comp, labels = connected_components(P > 0, directed=True, connection="strong")
    classes = []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        outside = np.ones(len(P), dtype=bool)
        outside[members] = False
        if not np.any(P[np.ix_(members, outside)] > 0):
            classes.append(members)
    return sorted(classes, key=lambda m: m[0])


def _irreducible_stationary(block):
    """Left Perron vector of an irreducible stochastic block."""
    if len(block) == 1:
        return np.ones(1)
    evals, evecs = np.linalg.eig(block.T)
    k = int(np.argmin(np.abs(evals - 1.0)))
    if abs(evals[k].imag) > SIGN_TOLERANCE or abs(evals[k].real - 1.0) > 1e-8:
        raise StationaryConvergenceError(f"no real unit eigenvalue, nearest is {evals[k]}")
    v = evecs[:, k].real
    v = v / v.sum()
    if v.min() < -SIGN_TOLERANCE:
        raise StationaryConvergenceError("Perron vector has mixed signs", _residual(v, block))
    v = np.clip(v, 0.0, None)
    return v / v.sum()


def stationary_eigen(P) -> tuple[DistributionVector, SolverReport]:
    """Stationary distribution from the left eigenvector for eigenvalue 1."""
    P = _as_matrix(P)
    T = P.probs
    classes = closed_classes(T)
    largest = max(len(c) for c in classes)
    chosen = [c for c in classes if len(c) == largest]
    pi = np.zeros(P.size)
    for members in chosen:
        pi[members] += _irreducible_stationary(T[np.ix_(members, members)]) / len(chosen)
    residual = _residual(pi, T)
    warnings = ()
    if len(classes) > 1:
        warnings = (f"reducible chain: {len(classes)} closed classes, averaged {len(chosen)} of size {largest}",)
    if residual > RESIDUAL_TOLERANCE:
        raise StationaryConvergenceError("eigenvector is not a fixed point", residual)
    report = SolverReport("eigen", spectral_check(P), 1, residual, True, len(classes), warnings)
    return DistributionVector(P.embed(pi), "eigen"), report


def stationary_power(P, tol: float = 1e-12, max_iter: int = 1_000_000) -> tuple[DistributionVector, SolverReport]:
    """Damped power iteration ``pi <- pi (I + P) / 2`` from the uniform vector.

    Damping leaves the fixed points unchanged and removes the oscillation of
    periodic chains.  Stops once ``max|pi P - pi| <= tol``; if `max_iter` runs
    out first the last iterate is returned with ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    P = _as_matrix(P)
    T = P.probs
    pi = np.full(P.size, 1.0 / P.size)
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        step = pi @ T
        residual = float(np.max(np.abs(step - pi)))
        if residual <= tol:
            break
        pi = 0.5 * (pi + step)
        if it % 1024 == 0:
            pi /= pi.sum()
    converged = residual <= tol
    warnings = () if converged else (f"max_iter={max_iter} reached",)
    report = SolverReport("power", spectral_check(P), it, residual, converged, 1, warnings)
    return DistributionVector.from_weights(P.embed(np.clip(pi, 0.0, None)), "power"), report


def stationary_svd(P) -> tuple[DistributionVector, SolverReport]:
    """Normalised leading right singular vector of ``P.T``.

    This is a singular vector, not an eigenvector, so for non-normal matrices
    it can differ from the stationary distribution; the report's residual and
    warnings show by how much.  A repeated leading singular value is resolved
    by projecting the all-ones vector onto the leading singular subspace.
    """
    P = _as_matrix(P)
    T = P.probs
    _, s, vh = np.linalg.svd(T.T)
    lead = vh[s >= s[0] - 1e-10]
    v = lead.T @ (lead @ np.ones(P.size)) if len(lead) > 1 else lead[0]
    if v.sum() < 0:
        v = -v
    warnings = []
    if v.min() < -SIGN_TOLERANCE * np.abs(v).max():
        warnings.append(f"singular vector has mixed signs (min {v.min():.3e}); negatives clipped")
    v = np.clip(v, 0.0, None)
    if not v.sum() > 0:
        raise StationaryConvergenceError("singular vector has no positive mass")
    v = v / v.sum()
    residual = _residual(v, T)
    converged = residual <= RESIDUAL_TOLERANCE
    if not converged:
        warnings.append(f"singular vector is not stationary: max|pi P - pi| = {residual:.3e}")
    report = SolverReport("svd", spectral_check(P), 1, residual, converged, len(lead), tuple(warnings))
    return DistributionVector(P.embed(v), "svd"), report


def solve(P, method: str = "eigen", **kwargs) -> tuple[DistributionVector, SolverReport]:
    """Dispatch to one of the solvers by name."""
    if method == "eigen":
        return stationary_eigen(P)
    if method == "power":
        return stationary_power(P, **kwargs)
    if method == "svd":
        return stationary_svd(P)
    raise ValueError(f"solver must be one of {SOLVERS}, got {method!r}")
