"""Experiment configuration as a flat ``key = value`` text file."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .kernels import KernelSpec
from .scenario import ScenarioParams, theorem_precondition

__all__ = ["ExperimentConfig", "parse_config", "load_config"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Hyperparameters of a safe BO run.

    Defaults: Matern32 with lengthscale 0.1, ``sigma = delta = 1e-2``,
    ``gamma = 0.1``, ``kappa = 0.01``, ``alpha_bar = 1``, ``m = 1000``.
    """

    kernel: str = "matern32"
    lengthscale: float = 0.1
    sigma: float = 1e-2
    delta: float = 1e-2
    gamma: float = 0.1
    kappa: float = 0.01
    alpha_bar: float = 1.0
    m: int = 1000
    n_cubes: int = 5
    delta_cube: float = 0.1
    grid_points: int = 1000
    iterations: int = 30
    threshold: float = 0.0
    seed: int = 0
    # optional; "variance" -> ridge sigma**2, "std" -> ridge sigma
    ridge: str = "variance"

    def __post_init__(self):
        KernelSpec(self.kernel, self.lengthscale)
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not theorem_precondition(self.m, self.gamma, self.kappa):
            raise ValueError(
                f"(m, gamma, kappa) = ({self.m}, {self.gamma}, {self.kappa}) violates "
                "(1-gamma)^(m-1)(1+gamma(m-1)) <= kappa")
        if not self.alpha_bar > 0:
            raise ValueError("alpha_bar must be positive")
        if self.n_cubes < 0:
            raise ValueError("n_cubes must be nonnegative")
        if self.n_cubes > 0 and not self.delta_cube > 0:
            raise ValueError("delta_cube must be positive when n_cubes > 0")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.ridge not in ("variance", "std"):
            raise ValueError(f"ridge must be 'variance' or 'std', got {self.ridge!r}")

    @property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, self.lengthscale)

    @property
    def scenario(self) -> ScenarioParams:
        return ScenarioParams(self.gamma, self.kappa, self.m)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_text(self) -> str:
        return "".join(f"{k} = {_format(v)}\n" for k, v in asdict(self).items())

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _format(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_CASTS = {"str": str, "float": float, "int": int}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keyword ``overrides`` that are not ``None`` win over the file.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        cast = _CASTS[_TYPES[key]]
        try:
            values[key] = int(float(value)) if cast is int and "e" in value.lower() \
                else cast(value)
        except ValueError:
            raise ValueError(f"line {lineno}: bad value for {key}: {value!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), **overrides)
