import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenario_safebo.domain import Box, DomainGrid
from scenario_safebo.exploration import (ConfidenceState, NoCandidate, acquire,
                                         compute_expanders, compute_maximizers,
                                         compute_safe_set, update_confidence)
from scenario_safebo.gp import ConfidenceParams, Dataset, GaussianProcess
from scenario_safebo.kernels import KernelSpec, semimetric, semimetric_matrix

K32 = KernelSpec("matern32", 0.1)


def brute_safe(lower, points, B, h, prev, seed):
    out = seed.copy()
    for j in range(len(points)):
        for i in range(len(points)):
            if (prev[i] or seed[i]) and lower[i] - B * semimetric(K32, points[i], points[j]) >= h:
                out[j] = True
    return out


def brute_maximizers(lower, upper, safe):
    best = max(lower[i] for i in range(len(lower)) if safe[i])
    return np.array([bool(safe[i] and upper[i] >= best) for i in range(len(lower))])


def brute_expanders(upper, points, B, h, safe):
    out = np.zeros(len(upper), dtype=bool)
    for i in range(len(upper)):
        if not safe[i]:
            continue
        for j in range(len(upper)):
            if not safe[j] and upper[i] - B * semimetric(K32, points[i], points[j]) >= h:
                out[i] = True
    return out


def random_state(seed, n):
    r = np.random.default_rng(seed)
    grid = DomainGrid.regular(Box.unit(1), n)
    centre = r.normal(size=n).cumsum() / 4
    width = r.uniform(0.05, 0.6, n)
    lower, upper = centre - width, centre + width
    prev = r.uniform(size=n) < 0.1
    seed_mask = np.zeros(n, dtype=bool)
    seed_mask[r.integers(n)] = True
    return grid, lower, upper, prev, seed_mask


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("B", [0.0, 0.7, 3.0])
def test_sets_match_brute_force(seed, B):
    n = 60 if seed < 5 else 200
    grid, lower, upper, prev, seed_mask = random_state(seed, n)
    h = float(np.median(lower))
    safe, witness = compute_safe_set(lower, grid, K32, B, h, prev, seed_mask)
    np.testing.assert_array_equal(safe, brute_safe(lower, grid.points, B, h, prev, seed_mask))
    certified = witness >= 0
    assert np.all(safe[certified])
    for j in np.flatnonzero(certified):
        i = witness[j]
        assert lower[i] - B * semimetric(K32, grid.points[i], grid.points[j]) >= h
    maxi = compute_maximizers(lower, upper, safe)
    np.testing.assert_array_equal(maxi, brute_maximizers(lower, upper, safe))
    expa = compute_expanders(upper, grid, K32, B, h, safe)
    np.testing.assert_array_equal(expa, brute_expanders(upper, grid.points, B, h, safe))
    assert not np.any((maxi | expa) & ~safe)


def test_infinite_bound_only_keeps_certified_points():
    grid, lower, _, prev, seed_mask = random_state(9, 30)
    safe, _ = compute_safe_set(lower, grid, K32, math.inf, -10.0, prev, seed_mask)
    np.testing.assert_array_equal(safe, prev | seed_mask)


def test_precomputed_distances_agree():
    grid, lower, upper, prev, seed_mask = random_state(4, 80)
    D = semimetric_matrix(K32, grid.points, grid.points)
    h = float(np.median(lower))
    a = compute_safe_set(lower, grid, K32, 1.2, h, prev, seed_mask)
    b = compute_safe_set(lower, grid, K32, 1.2, h, prev, seed_mask, distances=D)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(compute_expanders(upper, grid, K32, 1.2, h, a[0]),
                                  compute_expanders(upper, grid, K32, 1.2, h, a[0], D))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=30),
       st.lists(st.booleans(), min_size=30, max_size=30))
def test_acquire_matches_exhaustive_scan(omega, mask):
    omega = np.array(omega)
    mask = np.array(mask[:len(omega)])
    if not mask.any():
        with pytest.raises(NoCandidate):
            acquire(omega, mask)
        return
    idx, value = acquire(omega, mask)
    best_i, best_v = None, -math.inf
    for i in range(len(omega)):
        if mask[i] and omega[i] > best_v:
            best_i, best_v = i, omega[i]
    assert (idx, value) == (best_i, best_v)


def test_acquire_ties_go_to_lowest_index():
    assert acquire([1.0, 2.0, 2.0, 2.0], [False, False, True, True]) == (2, 2.0)


def test_update_confidence_nests():
    grid = DomainGrid.regular(Box.unit(1), 50)
    r = np.random.default_rng(0)
    x = r.uniform(size=(6, 1))
    y = np.sin(6 * x[:, 0])
    state = ConfidenceState.initial(len(grid))
    cp = ConfidenceParams(B=3.0)
    for t in range(1, 7):
        gp = GaussianProcess(Dataset(x[:t], y[:t]), K32)
        new = update_confidence(state, gp, cp, grid)
        assert np.all(new.lower >= state.lower) and np.all(new.upper <= state.upper)
        assert np.all(new.lower <= new.upper)
        state = new


def test_empty_intersection_resets_with_warning():
    grid = DomainGrid.regular(Box.unit(1), 10)
    state = ConfidenceState.initial(10)
    state = ConfidenceState(lower=np.full(10, 5.0), upper=np.full(10, 6.0),
                            std=state.std, safe=state.safe, maximizers=state.maximizers,
                            expanders=state.expanders, witness=state.witness)
    gp = GaussianProcess(Dataset([[0.5]], [0.0]), K32)
    new = update_confidence(state, gp, ConfidenceParams(B=1.0), grid)
    assert new.warnings and "empty" in new.warnings[0]
    assert np.all(new.lower < 5.0)
