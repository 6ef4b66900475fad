"""Safe BO loops: global, fixed-norm baseline, and adaptive local cubes.

Cube ``0`` is the whole domain. With ``N`` cubes per sample, cube
``c >= 1`` is centred on sample ``ceil(c / N)`` with edge length
``(((c - 1) mod N) + 1) * delta_cube``, clipped to the domain. Every cube
keeps its own confidence intervals, safe set and norm certificate across
iterations; its grid is the part of the global grid inside its box.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .config import ExperimentConfig
from .domain import Box, DomainGrid
from .exploration import (ConfidenceState, NoCandidate, acquire, compute_expanders,
                          compute_maximizers, compute_safe_set, update_confidence)
from .gp import ConfidenceParams, Dataset, GaussianProcess
from .kernels import semimetric_matrix
from .random_functions import (GpMeanNormHeuristic, HeuristicEstimator,
                               RandomFunctionConfig, sample_norms)
from .runlog import RunLog
from .scenario import certify_norm

__all__ = ["Cube", "enumerate_cubes", "run_localized", "run_global", "run_fixed_b"]

logger = logging.getLogger(__name__)

# full semimetric matrices are cached up to this many grid points
_DENSE_DISTANCE_LIMIT = 4000


@dataclass(frozen=True)
class Cube:
    """Label ``c``, its anchor sample (1-based, 0 for the domain) and box."""

    c: int
    sample: int
    multiplier: int
    box: Box


def cube_label(c: int, N: int):
    """``(sample, multiplier)`` for cube label ``c``; ``(0, 0)`` is the domain."""
    if c == 0:
        return 0, 0
    return math.ceil(c / N), (c - 1) % N + 1


def enumerate_cubes(samples, N: int, delta: float, domain: Box):
    """Domain plus ``N`` nested cubes around every sample.

    Parameters
    ----------
    samples : (t, n) array
    N : int
        Cubes per sample; 0 keeps only the domain.
    delta : float
        Edge length of the smallest cube.
    domain : Box
    """
    samples = np.asarray(samples, dtype=float).reshape(-1, domain.dim)
    cubes = [Cube(0, 0, 0, domain)]
    if N == 0:
        return cubes
    for c in range(1, len(samples) * N + 1):
        i, w = cube_label(c, N)
        half = 0.5 * w * delta
        centre = samples[i - 1]
        cubes.append(Cube(c, i, w, domain.intersect(Box(centre - half, centre + half))))
    return cubes


class _CubeRecord:
    """Mutable per-cube bookkeeping that persists across iterations."""

    def __init__(self, grid_idx, grid: DomainGrid):
        self.grid_idx = grid_idx
        self.grid = grid
        self.state = ConfidenceState.initial(len(grid_idx))
        self.previous_B = math.inf
        self.visited = False


@dataclass
class _CubeResult:
    cube: Cube
    record: _CubeRecord
    candidate: Optional[int]  # global grid index
    omega: float
    r_used: int
    branch: str


BSchedule = Union[float, Callable[[int, int], float]]


class _Engine:
    def __init__(self, config: ExperimentConfig, objective, domain: Box, safe_seeds,
                 b_fixed: Optional[BSchedule] = None,
                 heuristic: Optional[HeuristicEstimator] = None, workers: int = 1):
        self.config = config
        self.objective = objective
        self.domain = domain
        self.kernel = config.kernel_spec
        self.params = config.scenario
        self.h = config.threshold
        self.workers = workers
        seeds = np.asarray(safe_seeds, dtype=float).reshape(-1, domain.dim)
        if len(seeds) == 0:
            raise ValueError("at least one initial safe parameter is required")
        if not np.all(domain.contains(seeds)):
            raise ValueError("initial safe parameters must lie in the domain")
        self.grid = DomainGrid.regular(domain, config.grid_points, extra=seeds)
        self.seed_idx = sorted({self.grid.index_of(s) for s in seeds})
        self.seed_mask = np.zeros(len(self.grid), dtype=bool)
        self.seed_mask[self.seed_idx] = True
        if callable(b_fixed) or b_fixed is None:
            self.b_fixed = b_fixed
        else:
            value = float(b_fixed)
            self.b_fixed = lambda it, c: value
        self.heuristic = heuristic or GpMeanNormHeuristic(config.sigma, config.ridge)
        self.distances = None
        if len(self.grid) <= _DENSE_DISTANCE_LIMIT:
            self.distances = semimetric_matrix(self.kernel, self.grid.points,
                                               self.grid.points)
        self.records = {}
        self.sample_idx = []
        self.y = []

    # -- helpers -------------------------------------------------------------

    def data(self) -> Dataset:
        if not self.sample_idx:
            return Dataset.empty(self.domain.dim)
        return Dataset(self.grid.points[self.sample_idx], np.array(self.y))

    def record(self, cube: Cube) -> _CubeRecord:
        rec = self.records.get(cube.c)
        if rec is None:
            idx = np.flatnonzero(cube.box.contains(self.grid.points))
            rec = _CubeRecord(idx, DomainGrid(cube.box, self.grid.points[idx]))
            self.records[cube.c] = rec
        return rec

    def _sets(self, rec: _CubeRecord, state: ConfidenceState, seed_local, B):
        local_d = None
        if self.distances is not None:
            local_d = self.distances[np.ix_(rec.grid_idx, rec.grid_idx)]
        if not rec.visited:
            safe = seed_local.copy()
            witness = np.full(len(safe), -1)
        else:
            safe, witness = compute_safe_set(state.lower, rec.grid, self.kernel, B, self.h,
                                             rec.state.safe, seed_local, distances=local_d)
        maxi = compute_maximizers(state.lower, state.upper, safe)
        expa = compute_expanders(state.upper, rec.grid, self.kernel, B, self.h, safe,
                                 distances=local_d)
        return replace(state, safe=safe, witness=witness, maximizers=maxi, expanders=expa)

    def step_cube(self, cube: Cube, it: int, data: Dataset, global_lower) -> _CubeResult:
        """Sample acquisition restricted to one cube."""
        rec = self.record(cube)
        seed_local = self.seed_mask[rec.grid_idx].copy()
        if cube.c != 0:
            # samples inside the cube that the global model already certifies
            certified = [i for i in self.sample_idx if global_lower[i] >= self.h]
            seed_local |= np.isin(rec.grid_idx, certified)
        if not seed_local.any():
            return _CubeResult(cube, rec, None, -math.inf, 0, "skipped")

        sub = data.subset(cube.box.contains(data.inputs))
        gp = GaussianProcess(sub, self.kernel, self.config.sigma, self.config.ridge)
        if self.b_fixed is not None:
            B, r_used, branch = float(self.b_fixed(it, cube.c)), 0, "fixed"
        else:
            rf = RandomFunctionConfig(m=self.config.m, alpha_bar=self.config.alpha_bar,
                                      noise_std=self.config.sigma, box=cube.box,
                                      base_seed=self.config.seed)
            norms = sample_norms(rf, sub, self.kernel, iteration=it, stream=cube.c,
                                 workers=self.workers)
            heuristic_B = float(self.heuristic(sub, self.kernel, cube.box))
            cert = certify_norm(norms, heuristic_B, rec.previous_B, self.params)
            B, r_used, branch = cert.B, cert.r_used, cert.branch.value
            rec.previous_B = B
        state = update_confidence(rec.state, gp, ConfidenceParams(B, self.config.delta),
                                  rec.grid)
        state = self._sets(rec, state, seed_local, B)
        rec.state = state
        rec.visited = True
        try:
            local, omega = acquire(state.omega, state.maximizers | state.expanders)
            candidate = int(rec.grid_idx[local])
        except NoCandidate:
            candidate, omega = None, -math.inf
        return _CubeResult(cube, rec, candidate, omega, r_used, branch)

    def union(self, results, name):
        mask = np.zeros(len(self.grid), dtype=bool)
        for res in results:
            if res.branch != "skipped":
                mask[res.record.grid_idx] |= getattr(res.record.state, name)
        return mask

    def best_safe(self, results):
        best_val, best_idx = -math.inf, None
        for res in results:
            st = res.record.state
            if res.branch == "skipped" or not st.safe.any():
                continue
            local = np.flatnonzero(st.safe)
            k = local[np.argmax(st.lower[local])]
            g = int(res.record.grid_idx[k])
            if st.lower[k] > best_val or (st.lower[k] == best_val and g < best_idx):
                best_val, best_idx = float(st.lower[k]), g
        return best_idx, best_val

    # -- main loop -----------------------------------------------------------

    def run(self, n_cubes: int, header: dict, trace=None) -> RunLog:
        cfg = self.config
        log = RunLog(dim=self.domain.dim, header=header)
        try:
            for i in self.seed_idx:
                self.evaluate(i)
            for it in range(1, cfg.iterations + 1):
                data = self.data()
                cubes = enumerate_cubes(data.inputs, n_cubes, cfg.delta_cube, self.domain)
                results = [self.step_cube(cubes[0], it, data, None)]
                global_lower = np.full(len(self.grid), -math.inf)
                global_lower[results[0].record.grid_idx] = results[0].record.state.lower
                results += [self.step_cube(cube, it, data, global_lower)
                            for cube in cubes[1:]]
                if trace is not None:
                    trace(it, results)
                live = [r for r in results if r.candidate is not None]
                if not live:
                    log.stop_reason = f"no candidate at iteration {it}"
                    break
                # max omega, ties to the lowest cube label
                win = max(live, key=lambda r: (r.omega, -r.cube.c))
                point = self.grid.points[win.candidate]
                y, f_true = self.evaluate(win.candidate)
                log.rows.append(self.row(it, point, y, f_true, win, results))
        except ObjectiveError as err:
            log.stop_reason = f"objective error: {err}"
            logger.error("run aborted: %s", err)
            return log

        # read out the best safely evaluable parameter from the final global model
        data = self.data()
        final = self.step_cube(Cube(0, 0, 0, self.domain), cfg.iterations + 1, data, None)
        idx, val = self.best_safe([final])
        log.best_point = self.grid.points[idx]
        log.best_lower = val
        return log

    def evaluate(self, grid_index: int):
        point = self.grid.points[grid_index]
        y = self.objective(point)
        try:
            y = float(y)
        except (TypeError, ValueError) as err:
            raise ObjectiveError(f"non-numeric objective value {y!r}") from err
        if not math.isfinite(y):
            raise ObjectiveError(f"non-finite objective value {y!r}")
        self.sample_idx.append(int(grid_index))
        self.y.append(y)
        true_value = getattr(self.objective, "true_value", None)
        f_true = float(true_value(point)) if true_value is not None else math.nan
        return y, f_true

    def row(self, it, point, y, f_true, win, results):
        g = results[0].record.state
        safe = self.union(results, "safe")
        maxi = self.union(results, "maximizers")
        expa = self.union(results, "expanders")
        _, best = self.best_safe(results)
        reference = y if math.isnan(f_true) else f_true
        row = {"t": it}
        row.update({f"a_{i}": float(v) for i, v in enumerate(point)})
        row.update({
            "y": y, "f_true": f_true, "violation": reference < self.h,
            "B": g.B, "beta": g.beta, "omega": win.omega,
            "n_safe": int(safe.sum()), "n_max": int(maxi.sum()), "n_exp": int(expa.sum()),
            "max_lower": best, "cube_id": win.cube.c, "cube_width": win.cube.box.width,
            "cube_B": win.record.state.B, "r_used": win.r_used, "branch": win.branch,
            "warnings": "|".join(w for r in results if r.branch != "skipped"
                                 for w in r.record.state.warnings).replace(",", ";"),
        })
        return row


class ObjectiveError(RuntimeError):
    """The objective could not produce a finite reward."""


def _header(config: ExperimentConfig, mode: str, fixed: str = "") -> dict:
    header = {"mode": mode, "config_hash": config.digest(), "seed": config.seed}
    if fixed:
        header["fixed_B"] = fixed
    header["config"] = config.to_text()
    return header


def run_localized(config: ExperimentConfig, objective, domain: Box, safe_seeds,
                  heuristic: Optional[HeuristicEstimator] = None,
                  workers: int = 1, trace=None) -> RunLog:
    """Safe BO over the domain plus ``config.n_cubes`` local cubes per sample.

    Parameters
    ----------
    config : ExperimentConfig
    objective : callable
        Maps a parameter vector to an observed reward. If it has a
        ``true_value`` method, violations are judged on the noise-free value.
    domain : Box
    safe_seeds : (k, n) array
        Initial parameters known to satisfy the threshold.
    heuristic : HeuristicEstimator, optional
        Defaults to the RKHS norm of the GP posterior mean.
    workers : int
        Threads used for random-function generation; results do not depend
        on it.
    trace : callable, optional
        Called as ``trace(iteration, results)`` before each acquisition, where
        ``results`` holds one entry per cube with its ``cube``, ``record``
        (grid indices and confidence state), ``candidate`` and ``omega``.
    """
    engine = _Engine(config, objective, domain, safe_seeds, heuristic=heuristic,
                     workers=workers)
    return engine.run(config.n_cubes, _header(config, "scenario"), trace)


def run_global(config: ExperimentConfig, objective, domain: Box, safe_seeds,
               heuristic: Optional[HeuristicEstimator] = None, workers: int = 1,
               trace=None) -> RunLog:
    """Safe BO on the whole domain only (no local cubes)."""
    return run_localized(replace(config, n_cubes=0), objective, domain, safe_seeds,
                         heuristic, workers, trace)


def run_fixed_b(config: ExperimentConfig, B_fixed: BSchedule, objective, domain: Box,
                safe_seeds, trace=None) -> RunLog:
    """Baseline with a supplied norm bound instead of the certificate.

    ``B_fixed`` is a constant or a callable ``(iteration, cube label) -> B``.
    Local cubes follow ``config.n_cubes`` (set it to 0 for the plain
    global baseline).
    """
    engine = _Engine(config, objective, domain, safe_seeds, b_fixed=B_fixed)
    label = "schedule" if callable(B_fixed) else "%.12g" % float(B_fixed)
    return engine.run(config.n_cubes, _header(config, "fixed", label), trace)
