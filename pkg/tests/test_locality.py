import math
from dataclasses import replace

import numpy as np
import pytest

from scenario_safebo.bench import toy_problem
from scenario_safebo.config import ExperimentConfig
from scenario_safebo.domain import Box, DomainGrid
from scenario_safebo.gp import Dataset
from scenario_safebo.locality import (ObjectiveError, cube_label, enumerate_cubes,
                                      run_fixed_b, run_global, run_localized)
from scenario_safebo.random_functions import RandomFunctionConfig, sample_norms

SMALL = ExperimentConfig(m=100, grid_points=200, iterations=8, n_cubes=3, delta_cube=0.1,
                         seed=3)


def problem(config):
    _, oracle, seed_point = toy_problem(config)
    return oracle, Box.unit(1), [seed_point]


def test_cube_enumeration():
    samples = np.array([[0.3], [0.6]])
    cubes = enumerate_cubes(samples, 3, 0.1, Box.unit(1))
    assert [c.c for c in cubes] == list(range(7))
    c5 = cubes[5]
    assert (c5.sample, c5.multiplier) == (2, 2)
    np.testing.assert_allclose(c5.box.lo, [0.5])
    np.testing.assert_allclose(c5.box.hi, [0.7])
    assert cube_label(4, 3) == (2, 1) and cube_label(3, 3) == (1, 3)
    assert len(enumerate_cubes(samples, 0, 0.1, Box.unit(1))) == 1


def test_cube_clipping_at_corner():
    cubes = enumerate_cubes(np.array([[0.0, 1.0]]), 1, 0.2, Box.unit(2))
    np.testing.assert_allclose(cubes[1].box.lo, [0.0, 0.9])
    np.testing.assert_allclose(cubes[1].box.hi, [0.1, 1.0])
    np.testing.assert_allclose(cubes[1].box.hi - cubes[1].box.lo, [0.1, 0.1])


def test_global_equals_localized_with_no_cubes():
    cfg = replace(SMALL, n_cubes=0)
    a = run_localized(cfg, *problem(cfg)).to_csv()
    b = run_global(SMALL, *problem(SMALL)).to_csv()
    assert a == b


def test_determinism():
    a = run_localized(SMALL, *problem(SMALL)).to_csv()
    b = run_localized(SMALL, *problem(SMALL)).to_csv()
    assert a == b
    c = run_localized(replace(SMALL, seed=4), *problem(replace(SMALL, seed=4))).to_csv()
    assert a != c


class Recorder:
    def __init__(self):
        self.steps = []

    def __call__(self, it, results):
        self.steps.append((it, [(r.cube, r.record.grid_idx, r.record.state, r.candidate,
                                 r.omega, r.branch) for r in results]))


def test_structural_invariants():
    rec = Recorder()
    oracle, domain, seeds = problem(SMALL)
    log = run_localized(SMALL, oracle, domain, seeds, trace=rec)
    assert len(log) == len(rec.steps) == SMALL.iterations
    last = {}
    for row, (it, cubes) in zip(log.rows, rec.steps):
        live = [c for c in cubes if c[3] is not None]
        win = max(live, key=lambda c: (c[4], -c[0].c))
        assert row["omega"] == win[4] == max(c[4] for c in live)
        assert row["cube_id"] == win[0].c
        for cube, idx, state, cand, omega, branch in cubes:
            if branch == "skipped":
                continue
            assert not np.any((state.maximizers | state.expanders) & ~state.safe)
            if cand is not None:
                assert state.safe[np.searchsorted(idx, cand)]
            prev = last.get(cube.c)
            if prev is not None:
                assert state.B <= prev.B
                if not state.warnings:
                    assert np.all(state.lower >= prev.lower)
                    assert np.all(state.upper <= prev.upper)
                # safe seeds are kept
                assert np.all(state.safe[prev.safe & (prev.witness < 0)])
            last[cube.c] = state
    assert np.all(np.diff(log.column("B")) <= 0)
    assert log.violations == 0


def test_cube_data_subset_and_candidates():
    """Two samples and N = 3 give seven cubes; the winner is the best cube candidate."""
    cfg = replace(SMALL, iterations=1)
    rec = Recorder()
    oracle, domain, seeds = problem(cfg)
    seeds = np.vstack([seeds[0], np.clip(seeds[0] + 0.05, 0, 1)])
    log = run_localized(cfg, oracle, domain, seeds, trace=rec)
    _, cubes = rec.steps[0]
    assert len(cubes) == 7
    points = _grid_points(cfg, seeds)
    for cube, idx, *_ in cubes:
        assert np.array_equal(idx, np.flatnonzero(cube.box.contains(points)))
    # exhaustive recomputation of the winner over all cube candidates
    best = None
    for cube, idx, state, cand, omega, branch in cubes:
        if cand is not None and (best is None or omega > best[1]):
            best = (cube.c, omega, cand)
    assert log.rows[0]["cube_id"] == best[0]
    assert log.rows[0]["a_0"] == points[best[2], 0]


def _grid_points(cfg, seeds):
    return DomainGrid.regular(Box.unit(1), cfg.grid_points, extra=seeds).points


def test_fixed_schedule_reproduces_certified_trajectory():
    rec = Recorder()
    oracle, domain, seeds = problem(SMALL)
    ours = run_localized(SMALL, oracle, domain, seeds, trace=rec)
    table = {(it, c[0].c): c[2].B for it, cubes in rec.steps for c in cubes
             if c[5] != "skipped"}
    oracle2, _, _ = problem(SMALL)
    fixed = run_fixed_b(SMALL, lambda it, c: table.get((it, c), math.inf), oracle2, domain,
                        seeds)
    for col in ("a_0", "y", "B", "beta", "omega", "n_safe", "cube_id", "cube_B"):
        np.testing.assert_array_equal(ours.column(col), fixed.column(col))


def test_fixed_bound_degenerate_and_conservative():
    cfg = replace(SMALL, n_cubes=0)
    oracle, domain, seeds = problem(cfg)
    zero = run_fixed_b(cfg, 0.0, oracle, domain, seeds)
    assert len(zero) == cfg.iterations
    big = run_fixed_b(cfg, 25.0, *problem(cfg))
    certified = run_global(cfg, *problem(cfg))
    assert big.column("n_safe")[-1] <= certified.column("n_safe")[-1]


def test_local_cube_certificate_matches_domain_computation():
    """A cube covering the domain sees the same data and ensemble as the domain."""
    oracle, domain, seeds = problem(SMALL)
    cube = enumerate_cubes(np.array([[0.5]]), 1, 2.0, domain)[1]
    assert np.array_equal(cube.box.lo, domain.lo) and np.array_equal(cube.box.hi, domain.hi)
    r = np.random.default_rng(0)
    x = r.uniform(size=(5, 1))
    data = Dataset(x, oracle.truth(x))
    sub = data.subset(cube.box.contains(data.inputs))
    a = sample_norms(RandomFunctionConfig(m=50, box=cube.box), sub, SMALL.kernel_spec,
                     iteration=2, stream=7)
    b = sample_norms(RandomFunctionConfig(m=50, box=domain), data, SMALL.kernel_spec,
                     iteration=2, stream=7)
    assert a.tobytes() == b.tobytes()


def test_objective_error_stops_cleanly():
    calls = []

    def flaky(a):
        calls.append(a)
        if len(calls) > 3:
            raise ObjectiveError("sensor offline")
        return 1.0

    log = run_localized(replace(SMALL, n_cubes=0), flaky, Box.unit(1), [[0.5]])
    assert len(log) == 2
    assert log.stop_reason.startswith("objective error: sensor offline")
    assert "stop_reason = objective error" in log.to_csv()


def test_non_finite_reward_aborts():
    log = run_localized(replace(SMALL, n_cubes=0), lambda a: math.nan, Box.unit(1), [[0.5]])
    assert len(log) == 0 and "non-finite" in log.stop_reason


def test_invalid_seeds():
    with pytest.raises(ValueError):
        run_localized(SMALL, lambda a: 0.0, Box.unit(1), np.zeros((0, 1)))
    with pytest.raises(ValueError):
        run_localized(SMALL, lambda a: 0.0, Box.unit(1), [[1.5]])
