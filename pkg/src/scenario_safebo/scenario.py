"""Sampling-and-discarding over-estimation of the RKHS norm.

Given ``m`` sorted norms of random functions, the certificate discards the
``r`` largest ones, where ``r`` is the largest count whose lower binomial
tail stays below the confidence budget ``kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numba as nb
import numpy as np
from scipy.special import logsumexp

__all__ = [
    "ScenarioParams",
    "Branch",
    "NormCertificate",
    "binomial_tail",
    "log_binomial_terms",
    "max_admissible_r",
    "theorem_precondition",
    "certify_norm",
]


@nb.njit(cache=True)
def _log_comb(m, r):
    # compensated running sum, so the error does not grow with r
    out = np.zeros(r + 1)
    total = 0.0
    comp = 0.0
    for k in range(1, r + 1):
        term = math.log(m - k + 1.0) - math.log(k)
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s
        out[k] = total + comp
    return out


def log_binomial_terms(m: int, r: int, gamma: float) -> np.ndarray:
    """``log[C(m, i) gamma^i (1-gamma)^(m-i)]`` for ``i = 0..r``."""
    i = np.arange(r + 1, dtype=float)
    # log C(m, i) as a running sum of log((m - k + 1) / k); log-gamma
    # differences lose about 1e-11 relative accuracy for m in the thousands
    log_comb = _log_comb(m, r)
    return log_comb + i * math.log(gamma) + (m - i) * math.log1p(-gamma)


def binomial_tail(m: int, r: int, gamma: float) -> float:
    """Lower binomial CDF ``sum_{i<=r} C(m,i) gamma^i (1-gamma)^(m-i)``."""
    if not 0 <= r <= m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if r == m:
        return 1.0
    return float(min(1.0, math.exp(logsumexp(log_binomial_terms(m, r, gamma)))))


def max_admissible_r(m: int, gamma: float, kappa: float) -> int:
    """Largest ``r`` in ``[0, m-1]`` with ``binomial_tail(m, r, gamma) <= kappa``.

    Returns 0 when no ``r`` qualifies.
    """
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    log_cdf = np.logaddexp.accumulate(log_binomial_terms(m, m - 1, gamma))
    admissible = np.flatnonzero(log_cdf <= math.log(kappa))
    # the CDF is nondecreasing in r, so the admissible set is a prefix
    return int(admissible[-1]) if len(admissible) else 0


def theorem_precondition(m: int, gamma: float, kappa: float) -> bool:
    """``(1-gamma)^(m-1) (1 + gamma (m-1)) <= kappa``, evaluated in log space."""
    if not (0.0 < gamma < 1.0 and 0.0 < kappa < 1.0):
        raise ValueError("gamma and kappa must lie in (0, 1)")
    lhs = (m - 1) * math.log1p(-gamma) + math.log1p(gamma * (m - 1))
    return lhs <= math.log(kappa)


@dataclass(frozen=True)
class ScenarioParams:
    """Violation level ``gamma``, confidence level ``kappa``, ensemble size ``m``."""

    gamma: float = 0.1
    kappa: float = 0.01
    m: int = 1000

    def __post_init__(self):
        if not theorem_precondition(self.m, self.gamma, self.kappa):
            raise ValueError(
                f"(1-gamma)^(m-1)(1+gamma(m-1)) > kappa for m={self.m}, "
                f"gamma={self.gamma}, kappa={self.kappa}")

    @property
    def max_r(self) -> int:
        return max_admissible_r(self.m, self.gamma, self.kappa)


class Branch(str, Enum):
    HEURISTIC_DOMINATES = "heuristic"
    DISCARDED = "discarded"
    CARRIED_PREVIOUS = "carried"


@dataclass(frozen=True)
class NormCertificate:
    B: float
    r_used: int
    heuristic_B: float
    previous_B: float
    branch: Branch


def certify_norm(sorted_norms, heuristic_B: float, previous_B: float,
                 params: ScenarioParams) -> NormCertificate:
    """Turn sorted ensemble norms into a nonincreasing norm certificate.

    Parameters
    ----------
    sorted_norms : array of length ``params.m``, ascending
    heuristic_B : float
        Heuristic lower guess; it is never undercut.
    previous_B : float
        Certificate of the previous iteration (``inf`` initially).
    params : ScenarioParams
    """
    norms = np.asarray(sorted_norms, dtype=float)
    m = len(norms)
    if m != params.m:
        raise ValueError(f"expected {params.m} norms, got {m}")
    if np.any(np.diff(norms) < 0):
        raise ValueError("norms must be sorted in ascending order")
    if heuristic_B < 0:
        raise ValueError(f"heuristic_B must be nonnegative, got {heuristic_B}")

    if heuristic_B >= norms[-1]:
        candidate, r_used, branch = float(heuristic_B), 0, Branch.HEURISTIC_DOMINATES
    else:
        n_above = m - int(np.searchsorted(norms, heuristic_B, side="right"))
        # heuristic_B < norms[m-1-r]  <=>  r <= n_above - 1
        r_star = min(params.max_r, n_above - 1)
        if r_star >= 1:
            candidate, r_used = float(norms[m - 1 - r_star]), r_star
        else:
            candidate, r_used = float(norms[-1]), 0
        branch = Branch.DISCARDED
    if previous_B < candidate:
        return NormCertificate(float(previous_B), r_used, float(heuristic_B),
                               float(previous_B), Branch.CARRIED_PREVIOUS)
    return NormCertificate(candidate, r_used, float(heuristic_B), float(previous_B), branch)
