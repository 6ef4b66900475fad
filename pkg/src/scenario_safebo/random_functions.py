"""Random pre-RKHS functions that interpolate noisy data.

Each random function is ``rho = sum_s alpha_s k(., x_s)``. The first centers
are the (distinct) sampled inputs and their coefficients are fixed by
interpolating the observations perturbed with fresh Gaussian noise; the
remaining centers and coefficients are drawn uniformly from the box and
from ``[-alpha_bar, alpha_bar]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import rng as _rng
from .domain import Box
from .gp import Dataset, GaussianProcess
from .kernels import KernelSpec, RkhsFunction, gram, kernel_sums

__all__ = [
    "RandomFunctionConfig",
    "HeuristicEstimator",
    "GpMeanNormHeuristic",
    "default_heuristic",
    "expansion_size",
    "merge_duplicates",
    "sample_random_function",
    "sample_batch",
    "sample_norms",
]


def expansion_size(box: Box, t: int, per_width: int = 500, extra: int = 10) -> int:
    """``max(ceil(per_width * width(box)), t + extra)``."""
    return max(math.ceil(per_width * box.width - 1e-9), t + extra)


@dataclass(frozen=True)
class RandomFunctionConfig:
    """Hyperparameters of the random function ensemble.

    ``n_centers=None`` picks the expansion size from the box width and the
    data size (see :func:`expansion_size`); ``jitter=None`` uses
    ``max(1e-10, 1e-4 * noise_std**2)``.
    """

    m: int = 1000
    alpha_bar: float = 1.0
    noise_std: float = 1e-2
    box: Box = Box.unit(1)
    base_seed: int = 0
    n_centers: Optional[int] = None
    jitter: Optional[float] = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if not self.alpha_bar > 0:
            raise ValueError(f"alpha_bar must be positive, got {self.alpha_bar}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be nonnegative, got {self.noise_std}")

    def size_for(self, t: int) -> int:
        N = self.n_centers if self.n_centers is not None else expansion_size(self.box, t)
        if N <= t:
            raise ValueError(f"expansion size {N} must exceed the data size {t}")
        return N

    @property
    def head_jitter(self) -> float:
        if self.jitter is not None:
            return self.jitter
        return max(1e-10, 1e-4 * self.noise_std ** 2)


def merge_duplicates(data: Dataset) -> Dataset:
    """Collapse repeated inputs into one sample with the averaged observation."""
    if len(data) == 0:
        return data
    uniq, inverse = np.unique(data.inputs, axis=0, return_inverse=True)
    if len(uniq) == len(data):
        return data
    inverse = inverse.ravel()
    counts = np.bincount(inverse)
    y = np.bincount(inverse, weights=data.observations) / counts
    return Dataset(uniq, y)


class _Batch:
    __slots__ = ("centers", "coefficients", "noise", "norms")

    def __init__(self, centers, coefficients, noise, norms):
        self.centers = centers
        self.coefficients = coefficients
        self.noise = noise
        self.norms = norms


def _draw(cfg: RandomFunctionConfig, t: int, N: int, iteration: int, stream: int):
    """Random parts of the whole ensemble from one counter-based stream.

    Draw order: tail centers, tail coefficients, observation noise, each for
    all ``m`` functions at once, so row ``j`` does not depend on how the
    later linear algebra is split.
    """
    g = _rng.counter_rng(cfg.base_seed, _rng.RANDOM_FUNCTIONS, iteration, stream)
    n_tail = N - t
    tail = cfg.box.sample(g, cfg.m * n_tail).reshape(cfg.m, n_tail, cfg.box.dim)
    alpha = g.uniform(-cfg.alpha_bar, cfg.alpha_bar, (cfg.m, n_tail))
    if cfg.noise_std > 0:
        noise = g.normal(0.0, cfg.noise_std, (cfg.m, t))
    else:
        noise = np.zeros((cfg.m, t))
    return tail, alpha, noise


def _solve(cfg: RandomFunctionConfig, data: Dataset, kernel: KernelSpec,
           tail, alpha, noise, zero_tail: bool = False) -> _Batch:
    t = len(data)
    m, n_tail = alpha.shape
    centers = np.empty((m, t + n_tail, cfg.box.dim))
    centers[:, :t] = data.inputs
    centers[:, t:] = tail
    coefficients = np.zeros((m, t + n_tail))
    if not zero_tail:
        coefficients[:, t:] = alpha

    # v = K[:, tail] @ alpha_tail at every center
    v = kernel_sums(kernel, centers, coefficients)
    tail_sq = np.einsum("ij,ij->i", coefficients[:, t:], v[:, t:])
    if t == 0:
        norms_sq = tail_sq
    else:
        K_head = gram(kernel, data.inputs)
        A = K_head + cfg.head_jitter * np.eye(t)
        try:
            factor = cho_factor(A, lower=True)
        except LinAlgError as err:
            raise LinAlgError(
                f"head Gram is singular after jitter {cfg.head_jitter:.1e} "
                f"(cond={np.linalg.cond(A):.3e})") from err
        rhs = data.observations[None, :] + noise - v[:, :t]
        head = cho_solve(factor, rhs.T).T
        coefficients[:, :t] = head
        norms_sq = (tail_sq + 2.0 * np.einsum("ij,ij->i", head, v[:, :t])
                    + np.einsum("ij,jk,ik->i", head, K_head, head))
    norms = np.sqrt(np.clip(norms_sq, 0.0, None))
    return _Batch(centers, coefficients, noise, norms)


def _generate(cfg, data, kernel, iteration, stream, workers=1, rows=None,
              zero_tail=False) -> _Batch:
    data = merge_duplicates(data)
    t = len(data)
    tail, alpha, noise = _draw(cfg, t, cfg.size_for(t), iteration, stream)
    if rows is not None:
        tail, alpha, noise = tail[rows], alpha[rows], noise[rows]
    if workers is None or workers <= 1 or len(alpha) < 2:
        return _solve(cfg, data, kernel, tail, alpha, noise, zero_tail)
    chunks = [c for c in np.array_split(np.arange(len(alpha)), workers) if len(c)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(
            lambda c: _solve(cfg, data, kernel, tail[c], alpha[c], noise[c], zero_tail),
            chunks))
    return _Batch(*(np.concatenate([getattr(p, name) for p in parts])
                    for name in _Batch.__slots__))


def sample_random_function(cfg: RandomFunctionConfig, data: Dataset, kernel: KernelSpec,
                           j: int, iteration: int = 0, stream: int = 0,
                           zero_tail: bool = False, return_noise: bool = False):
    """Draw the ``j``-th random function of the ensemble.

    The result depends only on the data, ``cfg`` and ``(iteration, stream, j)``.
    With ``zero_tail=True`` the random tail coefficients are set to zero,
    which leaves the regularized interpolant of the perturbed data.
    """
    b = _generate(cfg, data, kernel, iteration, stream, rows=[j], zero_tail=zero_tail)
    f = RkhsFunction(b.centers[0], b.coefficients[0], kernel)
    return (f, b.noise[0]) if return_noise else f


def sample_batch(cfg: RandomFunctionConfig, data: Dataset, kernel: KernelSpec,
                 iteration: int = 0, stream: int = 0, workers: int = 1):
    """All ``m`` random functions with their norms, sorted by ascending norm."""
    b = _generate(cfg, data, kernel, iteration, stream, workers)
    order = np.argsort(b.norms, kind="stable")
    return [(RkhsFunction(b.centers[i], b.coefficients[i], kernel), float(b.norms[i]))
            for i in order]


def sample_norms(cfg: RandomFunctionConfig, data: Dataset, kernel: KernelSpec,
                 iteration: int = 0, stream: int = 0, workers: int = 1) -> np.ndarray:
    """Sorted RKHS norms of the ensemble without materializing the functions."""
    b = _generate(cfg, data, kernel, iteration, stream, workers)
    return np.sort(b.norms, kind="stable")


class HeuristicEstimator(Protocol):
    """Heuristic (non-certified) guess of the RKHS norm from data."""

    def __call__(self, data: Dataset, kernel: KernelSpec, domain: Box) -> float:
        ...


@dataclass(frozen=True)
class GpMeanNormHeuristic:
    """Estimate the norm by the RKHS norm of the GP posterior mean."""

    noise_std: float = 1e-2
    ridge: str = "variance"

    def __call__(self, data: Dataset, kernel: KernelSpec, domain: Box) -> float:
        return default_heuristic(data, kernel, domain, self.noise_std, self.ridge)


def default_heuristic(data: Dataset, kernel: KernelSpec, domain: Box = None,
                      noise_std: float = 1e-2, ridge: str = "variance") -> float:
    if len(data) == 0:
        return 0.0
    gp = GaussianProcess(data, kernel, noise_std, ridge)
    return max(gp.mean_function_norm(), 0.0)
