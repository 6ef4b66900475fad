"""Confidence sets, safe set, maximizers, expanders and acquisition on a grid."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .domain import DomainGrid
from .gp import ConfidenceParams, GaussianProcess
from .kernels import KernelSpec, semimetric_matrix

__all__ = [
    "ConfidenceState",
    "NoCandidate",
    "update_confidence",
    "compute_safe_set",
    "compute_maximizers",
    "compute_expanders",
    "acquire",
]

logger = logging.getLogger(__name__)

NO_WITNESS = -1


class NoCandidate(Exception):
    """Neither a maximizer nor an expander is available."""


@dataclass(frozen=True)
class ConfidenceState:
    """Per-grid-point intersected intervals and set memberships.

    ``witness[i]`` is the grid index that certified point ``i`` as safe, or
    ``-1`` for retained seed points and unsafe points.
    """

    lower: np.ndarray
    upper: np.ndarray
    std: np.ndarray = None
    safe: np.ndarray = None
    maximizers: np.ndarray = None
    expanders: np.ndarray = None
    witness: np.ndarray = None
    B: float = np.inf
    beta: float = np.inf
    warnings: tuple = ()

    @classmethod
    def initial(cls, size: int) -> "ConfidenceState":
        """``C_0 = R`` at every grid point."""
        false = np.zeros(size, dtype=bool)
        return cls(lower=np.full(size, -np.inf), upper=np.full(size, np.inf),
                   std=np.full(size, np.nan), safe=false, maximizers=false,
                   expanders=false, witness=np.full(size, NO_WITNESS))

    def __len__(self):
        return len(self.lower)

    @property
    def omega(self) -> np.ndarray:
        """Scaled uncertainty ``beta * sigma``."""
        return self.beta * self.std


def update_confidence(state: ConfidenceState, gp: GaussianProcess,
                      cp: ConfidenceParams, grid: DomainGrid) -> ConfidenceState:
    """Intersect the running intervals with ``mu -/+ beta sigma``.

    A point whose intersection would be empty (model misspecification) is
    reset to the new interval and a warning is recorded.
    """
    mean, var = gp.predict(grid.points)
    beta = gp.beta(cp)
    std = np.sqrt(var)
    q_lo = mean - beta * std
    q_hi = mean + beta * std
    lower = np.maximum(state.lower, q_lo)
    upper = np.minimum(state.upper, q_hi)
    empty = lower > upper
    warnings = ()
    if np.any(empty):
        lower[empty] = q_lo[empty]
        upper[empty] = q_hi[empty]
        msg = f"empty confidence intersection at {int(empty.sum())} points; reset"
        logger.warning(msg)
        warnings = (msg,)
    return replace(state, lower=lower, upper=upper, std=std, B=cp.B, beta=beta,
                   warnings=warnings)


def _penalized(values, B, dist):
    """``values[:, None] - B * dist`` with ``inf * 0 = 0``."""
    if np.isinf(B):
        pen = np.where(dist > 0, np.inf, 0.0)
    else:
        pen = B * dist
    return values[:, None] - pen


def compute_safe_set(lower, grid: DomainGrid, kernel: KernelSpec, B: float, h: float,
                     previous_safe, seed, distances=None):
    """One expansion step of the safe set.

    A grid point is safe if some previously safe point ``a`` satisfies
    ``lower(a) - B d_k(a, a') >= h``. Seed points are always kept.

    Returns
    -------
    safe : bool array
    witness : int array (``-1`` where no witness exists)
    """
    lower = np.asarray(lower, dtype=float)
    seed = np.asarray(seed, dtype=bool)
    prev = np.flatnonzero(np.asarray(previous_safe, dtype=bool) | seed)
    safe = seed.copy()
    witness = np.full(len(lower), NO_WITNESS)
    if len(prev):
        if distances is None:
            dist = semimetric_matrix(kernel, grid.points[prev], grid.points)
        else:
            dist = distances[prev]
        score = _penalized(lower[prev], B, dist)
        best = np.argmax(score, axis=0)
        certified = score[best, np.arange(len(lower))] >= h
        safe |= certified
        witness[certified] = prev[best[certified]]
    return safe, witness


def compute_maximizers(lower, upper, safe) -> np.ndarray:
    """Safe points whose upper bound reaches the best safe lower bound."""
    safe = np.asarray(safe, dtype=bool)
    if not safe.any():
        return np.zeros_like(safe)
    best = np.max(np.asarray(lower)[safe])
    return safe & (np.asarray(upper) >= best)


def compute_expanders(upper, grid: DomainGrid, kernel: KernelSpec, B: float, h: float,
                      safe, distances=None) -> np.ndarray:
    """Safe points that could optimistically certify a currently unsafe point."""
    safe = np.asarray(safe, dtype=bool)
    upper = np.asarray(upper, dtype=float)
    out = np.zeros_like(safe)
    s_idx = np.flatnonzero(safe)
    u_idx = np.flatnonzero(~safe)
    if len(s_idx) == 0 or len(u_idx) == 0:
        return out
    # only points with u >= h can certify anything
    s_idx = s_idx[upper[s_idx] >= h]
    if len(s_idx) == 0:
        return out
    if distances is None:
        dist = semimetric_matrix(kernel, grid.points[s_idx], grid.points[u_idx])
    else:
        dist = distances[np.ix_(s_idx, u_idx)]
    out[s_idx] = np.any(_penalized(upper[s_idx], B, dist) >= h, axis=1)
    return out


def acquire(omega, candidates):
    """Index and value of the largest ``omega`` among candidates.

    Ties go to the lowest grid index.
    """
    idx = np.flatnonzero(np.asarray(candidates, dtype=bool))
    if len(idx) == 0:
        raise NoCandidate("no maximizer or expander left")
    omega = np.asarray(omega, dtype=float)[idx]
    k = int(np.argmax(omega))  # argmax returns the first maximum
    return int(idx[k]), float(omega[k])
