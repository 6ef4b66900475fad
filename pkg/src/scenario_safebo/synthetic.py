"""Seeded ground-truth RKHS functions and noisy oracles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .domain import Box, DomainGrid
from .kernels import KernelSpec, RkhsFunction, rkhs_norm, scale_to_norm

__all__ = ["SyntheticTruth", "NoisyOracle", "generate_truth", "probe_safe_seed"]


@dataclass(frozen=True)
class SyntheticTruth:
    """A ground-truth reward with known RKHS norm."""

    function: RkhsFunction
    norm: float
    domain: Box
    recipe: dict = field(default_factory=dict)

    def __call__(self, a):
        return self.function(a)

    def to_text(self) -> str:
        """Plain-text serialization (kernel, norm, recipe, centers, coefficients)."""
        k = self.function.kernel
        lines = [
            f"kernel = {k.family.value}",
            f"lengthscale = {k.lengthscale!r}",
            f"output_scale = {k.output_scale!r}",
            f"norm = {self.norm!r}",
            "domain_lo = " + " ".join(repr(float(v)) for v in self.domain.lo),
            "domain_hi = " + " ".join(repr(float(v)) for v in self.domain.hi),
        ]
        lines += [f"recipe.{key} = {value}" for key, value in self.recipe.items()]
        lines.append("centers coefficient")
        for x, a in zip(self.function.centers, self.function.coefficients):
            lines.append(" ".join(repr(float(v)) for v in x) + f" {float(a)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SyntheticTruth":
        head, _, body = text.partition("centers coefficient\n")
        meta = {}
        for line in head.splitlines():
            key, _, value = line.partition(" = ")
            meta[key] = value
        rows = np.array([[float(v) for v in line.split()] for line in body.splitlines()
                         if line.strip()])
        kernel = KernelSpec(meta["kernel"], float(meta["lengthscale"]),
                            float(meta["output_scale"]))
        domain = Box([float(v) for v in meta["domain_lo"].split()],
                     [float(v) for v in meta["domain_hi"].split()])
        recipe = {k[len("recipe."):]: v for k, v in meta.items() if k.startswith("recipe.")}
        f = RkhsFunction(rows[:, :-1], rows[:, -1], kernel)
        return cls(f, float(meta["norm"]), domain, recipe)


def generate_truth(seed: int, domain: Box = None, center_count=1000, norm=5.0,
                   kernel: KernelSpec = None, index: int = 0) -> SyntheticTruth:
    """Random expansion with uniform centers and coefficients, rescaled in norm.

    Parameters
    ----------
    seed : int
    domain : Box, default unit interval
    center_count : int or (low, high)
        Fixed count, or an inclusive range to draw it from uniformly.
    norm : float or (low, high)
        Target RKHS norm, or a range to draw it from uniformly.
    kernel : KernelSpec, default Matern32 with lengthscale 0.1
    index : int
        Selects one member of a family of truths sharing ``seed``.
    """
    domain = domain or Box.unit(1)
    kernel = kernel or KernelSpec()
    for attempt in range(100):
        g = _rng.counter_rng(seed, _rng.TRUTH, index, attempt)
        if np.ndim(center_count) == 0:
            n_centers = int(center_count)
        else:
            n_centers = int(g.integers(center_count[0], center_count[1], endpoint=True))
        target = float(norm) if np.ndim(norm) == 0 else float(g.uniform(norm[0], norm[1]))
        raw = RkhsFunction(domain.sample(g, n_centers), g.uniform(-1.0, 1.0, n_centers),
                           kernel)
        if rkhs_norm(raw) > 0:
            break
    else:  # pragma: no cover - probability zero
        raise RuntimeError("could not draw a function with nonzero norm")
    f = scale_to_norm(raw, target)
    recipe = {"seed": seed, "index": index, "attempt": attempt, "centers": n_centers,
              "target_norm": target}
    return SyntheticTruth(f, target, domain, recipe)


class NoisyOracle:
    """``y = f(a) + eps`` with Gaussian noise drawn per (seed, call counter)."""

    def __init__(self, truth: SyntheticTruth, noise_std: float = 1e-2, seed: int = 0,
                 stream: int = 0):
        self.truth = truth
        self.noise_std = float(noise_std)
        self.seed = seed
        self.stream = stream
        self.calls = 0

    def true_value(self, a) -> float:
        return float(self.truth.function(np.asarray(a, dtype=float).reshape(1, -1))[0])

    def __call__(self, a) -> float:
        value = self.true_value(a)
        eps = 0.0
        if self.noise_std > 0:
            g = _rng.counter_rng(self.seed, _rng.OBSERVATION_NOISE, self.stream, self.calls)
            eps = self.noise_std * g.standard_normal()
        self.calls += 1
        return value + eps


def probe_safe_seed(truth: SyntheticTruth, grid: DomainGrid, seed: int,
                    n_probe: int = 20) -> np.ndarray:
    """Best grid point (by true value) among a seeded random probe set."""
    g = _rng.counter_rng(seed, _rng.PROBE)
    probe = g.choice(len(grid), size=min(n_probe, len(grid)), replace=False)
    values = truth.function(grid.points[probe])
    return grid.points[probe[int(np.argmax(values))]]
