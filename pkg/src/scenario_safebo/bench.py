"""Experiment drivers: scenario tables, the norm study, the 1D toy benchmark
and safe optimization of external objectives."""

from __future__ import annotations

import io
import math
import shlex
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import rng as _rng
from .config import ExperimentConfig
from .domain import Box, DomainGrid
from .gp import Dataset
from .locality import ObjectiveError, run_fixed_b, run_localized
from .random_functions import RandomFunctionConfig, default_heuristic, sample_norms
from .runlog import RunLog, format_value
from .scenario import binomial_tail, certify_norm, max_admissible_r
from .synthetic import NoisyOracle, generate_truth, probe_safe_seed

__all__ = [
    "SCENARIO_TABLES",
    "scenario_table",
    "write_table",
    "NormStudyResult",
    "norm_study",
    "toy_problem",
    "toy1d",
    "ExternalObjective",
    "optimize",
]


# kind -> (parameter column, default grid, value function)
SCENARIO_TABLES = {
    "r-vs-gamma": ("gamma", np.round(np.arange(1, 100) * 1e-3, 3),
                   lambda g: max_admissible_r(2500, float(g), 1e-3)),
    "r-vs-m": ("m", np.arange(500, 7001, 500),
               lambda m: max_admissible_r(int(m), 1e-2, 1e-3)),
    "kappa-vs-m": ("m", np.arange(500, 7001, 500),
                   lambda m: binomial_tail(int(m), 0, 1e-2)),
}


def scenario_table(kind: str, values=None):
    """Rows ``(parameter, value)`` of one scenario hyperparameter sweep.

    ``r-vs-gamma`` holds ``m = 2500, kappa = 1e-3``; ``r-vs-m`` holds
    ``gamma = 1e-2, kappa = 1e-3``; ``kappa-vs-m`` is the confidence of
    discarding nothing at ``gamma = 1e-2``.
    """
    if kind not in SCENARIO_TABLES:
        raise ValueError(f"unknown table {kind!r}; choose from {sorted(SCENARIO_TABLES)}")
    _, grid, fn = SCENARIO_TABLES[kind]
    values = grid if values is None else values
    return [(v.item() if hasattr(v, "item") else v, fn(v)) for v in values]


def write_table(kind: str, target, values=None) -> None:
    """Write a sweep as ``parameter,value`` CSV to a path or text stream."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_table(kind, fh, values)
        return
    param = SCENARIO_TABLES[kind][0]
    target.write(f"{param},value\n")
    for p, v in scenario_table(kind, values):
        target.write(f"{format_value(float(p))},{format_value(v)}\n")


# -- norm study ---------------------------------------------------------------

_STUDY_COLUMNS = ("function", "t", "norm", "B", "ratio", "r_used", "branch")


@dataclass
class NormStudyResult:
    """Per (function, t) certificates relative to the true norm."""

    config: ExperimentConfig
    n_functions: int
    iterations: int
    rows: list

    def ratios(self) -> np.ndarray:
        """``(n_functions, iterations)`` array of ``B_t / ||f||``."""
        out = np.empty((self.n_functions, self.iterations))
        for r in self.rows:
            out[r["function"], r["t"] - 1] = r["ratio"]
        return out

    def summary(self):
        """Rows ``(t, mean ratio, std ratio, functions under-estimated at t)``."""
        R = self.ratios()
        return [(t + 1, float(R[:, t].mean()), float(R[:, t].std()), int((R[:, t] < 1).sum()))
                for t in range(self.iterations)]

    @property
    def ever_under(self) -> int:
        """Number of functions whose certificate fell below the true norm."""
        return int(np.any(self.ratios() < 1.0, axis=1).sum())

    @property
    def final_mean(self) -> float:
        return float(self.ratios()[:, -1].mean())

    def _head(self, target):
        target.write(f"# config_hash = {self.config.digest()}\n")
        target.write(f"# seed = {self.config.seed}\n")
        target.write(f"# n_functions = {self.n_functions}\n")

    def write_csv(self, target) -> None:
        if isinstance(target, (str, Path)):
            with open(target, "w", encoding="utf-8", newline="") as fh:
                self.write_csv(fh)
            return
        self._head(target)
        target.write(",".join(_STUDY_COLUMNS) + "\n")
        for r in self.rows:
            target.write(",".join(format_value(r[c]) for c in _STUDY_COLUMNS) + "\n")

    def write_summary(self, target) -> None:
        if isinstance(target, (str, Path)):
            with open(target, "w", encoding="utf-8", newline="") as fh:
                self.write_summary(fh)
            return
        self._head(target)
        target.write(f"# ever_under = {self.ever_under}\n")
        target.write("t,mean_ratio,std_ratio,n_under\n")
        for row in self.summary():
            target.write(",".join(format_value(v) for v in row) + "\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _study_one(config: ExperimentConfig, iterations: int, j: int):
    domain = Box.unit(1)
    kernel = config.kernel_spec
    truth = generate_truth(config.seed, domain, center_count=(100, 1000), norm=(1.0, 10.0),
                           kernel=kernel, index=j)
    oracle = NoisyOracle(truth, config.sigma, config.seed, stream=j)
    rf = RandomFunctionConfig(m=config.m, alpha_bar=config.alpha_bar,
                              noise_std=config.sigma, box=domain, base_seed=config.seed)
    params = config.scenario
    xs, ys, rows = [], [], []
    previous = math.inf
    for t in range(1, iterations + 1):
        # uniform (not safe) acquisition
        a = domain.sample(_rng.counter_rng(config.seed, _rng.NORM_STUDY, j, t), 1)[0]
        xs.append(a)
        ys.append(oracle(a))
        data = Dataset(np.array(xs), np.array(ys))
        norms = sample_norms(rf, data, kernel, iteration=t, stream=j)
        heuristic = default_heuristic(data, kernel, domain, config.sigma, config.ridge)
        cert = certify_norm(norms, heuristic, previous, params)
        previous = cert.B
        rows.append({"function": j, "t": t, "norm": truth.norm, "B": cert.B,
                     "ratio": cert.B / truth.norm, "r_used": cert.r_used,
                     "branch": cert.branch.value})
    return rows


def norm_study(config: ExperimentConfig, n_functions: int = 50, iterations: int = 30,
               workers: int = 1) -> NormStudyResult:
    """Certificate tightness on random truths under uniform sampling.

    Truth ``j`` has a norm uniform in ``[1, 10]`` and a center count uniform
    in ``[100, 1000]`` on the unit interval. At every step one uniformly
    drawn parameter is observed and the certificate is recomputed with the
    carry from the previous step.

    Functions are independent, so ``workers > 1`` spreads them over
    processes without changing the output.
    """
    job = partial(_study_one, config, iterations)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_functions)))
    else:
        parts = [job(j) for j in range(n_functions)]
    rows = [r for part in parts for r in part]
    return NormStudyResult(config, n_functions, iterations, rows)


# -- toy benchmark ------------------------------------------------------------

def toy_problem(config: ExperimentConfig, norm: float = 5.0, center_count: int = 1000):
    """Seeded 1D truth, its noisy oracle and a verified initial safe point.

    Raises
    ------
    ValueError
        If the probed initial point lies below the threshold.
    """
    domain = Box.unit(1)
    truth = generate_truth(config.seed, domain, center_count=center_count, norm=norm,
                           kernel=config.kernel_spec)
    grid = DomainGrid.regular(domain, config.grid_points)
    seed_point = probe_safe_seed(truth, grid, config.seed)
    value = float(truth(seed_point.reshape(1, -1))[0])
    if value < config.threshold:
        raise ValueError(f"initial point {seed_point} has f = {value:.6g} below the "
                         f"threshold {config.threshold:.6g}")
    return truth, NoisyOracle(truth, config.sigma, config.seed), seed_point


def toy1d(config: ExperimentConfig, mode: str = "ours", fixed_b: float = 25.0) -> RunLog:
    """One run on the seeded 1D toy problem.

    ``mode="ours"`` runs the localized certified loop with
    ``config.n_cubes`` cubes; ``mode="fixed"`` runs the global loop with the
    constant bound ``fixed_b``.
    """
    _, oracle, seed_point = toy_problem(config)
    if mode == "ours":
        return run_localized(config, oracle, Box.unit(1), [seed_point])
    if mode == "fixed":
        return run_fixed_b(replace(config, n_cubes=0), fixed_b, oracle, Box.unit(1),
                           [seed_point])
    raise ValueError(f"mode must be 'ours' or 'fixed', got {mode!r}")


# -- external objectives ------------------------------------------------------

class ExternalObjective:
    """Reward from a child process, one process per evaluation.

    The parameter vector is written to standard input as one line of
    space-separated decimals with 17 significant digits; the process must
    print one decimal reward and exit with status 0.
    """

    def __init__(self, command, timeout: float = None):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ValueError("empty objective command")
        self.timeout = timeout
        self.calls = 0

    def __call__(self, a) -> float:
        line = " ".join("%.17g" % v for v in np.ravel(a)) + "\n"
        self.calls += 1
        try:
            proc = subprocess.run(self.argv, input=line, capture_output=True, text=True,
                                  timeout=self.timeout)
        except (OSError, subprocess.SubprocessError) as err:
            raise ObjectiveError(f"could not run {self.argv[0]!r}: {err}") from err
        if proc.returncode != 0:
            detail = " ".join(proc.stderr.split())
            raise ObjectiveError(f"{self.argv[0]!r} exited with status {proc.returncode}"
                                 + (f": {detail}" if detail else ""))
        lines = proc.stdout.strip().splitlines()
        if len(lines) != 1:
            raise ObjectiveError(f"expected one output line, got {proc.stdout!r}")
        try:
            return float(lines[0])
        except ValueError:
            raise ObjectiveError(f"unparsable reward {lines[0]!r}") from None


BUILTIN_OBJECTIVES = ("toy1d",)


def builtin_objective(name: str, config: ExperimentConfig):
    """``(objective, domain, safe_seeds)`` for a named synthetic problem."""
    if name != "toy1d":
        raise ValueError(f"unknown builtin objective {name!r}; choose from "
                         f"{list(BUILTIN_OBJECTIVES)}")
    _, oracle, seed_point = toy_problem(config)
    return oracle, Box.unit(1), np.atleast_2d(seed_point)


def optimize(config: ExperimentConfig, objective, domain: Box, safe_seeds) -> RunLog:
    """Localized certified safe BO on an arbitrary objective."""
    return run_localized(config, objective, domain, safe_seeds)

