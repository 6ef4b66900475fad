import math

import numpy as np
import pytest

from scenario_safebo.gp import (ConfidenceParams, Dataset, FactorizationError,
                                GaussianProcess, beta, confidence_interval,
                                mean_function_norm, posterior_mean_var)
from scenario_safebo.kernels import KernelSpec, RkhsFunction, eval_kernel, gram, rkhs_norm

K32 = KernelSpec("matern32", 0.1)


def direct_posterior(kernel, x, y, lam, a):
    """Textbook formulas with an explicit inverse."""
    K = np.array([[eval_kernel(kernel, p, q) for q in x] for p in x])
    kx = np.array([eval_kernel(kernel, a, p) for p in x])
    inv = np.linalg.inv(K + lam * np.eye(len(x)))
    return kx @ inv @ y, eval_kernel(kernel, a, a) - kx @ inv @ kx


def test_prior():
    gp = GaussianProcess(Dataset.empty(1), K32)
    assert gp.posterior_mean_var([0.3]) == (0.0, 1.0)
    assert gp.log_det == 0.0


def test_interpolation_limit():
    data = Dataset([[0.4]], [1.3])
    gp = GaussianProcess(data, K32, noise_std=1e-6)
    mean, var = gp.posterior_mean_var([0.4])
    assert mean == pytest.approx(1.3, abs=1e-9)
    assert var == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("t", [1, 2, 3])
@pytest.mark.parametrize("ridge", ["variance", "std"])
def test_matches_direct_inverse(t, ridge):
    r = np.random.default_rng(t)
    x, y = r.uniform(size=(t, 1)), r.normal(size=t)
    gp = GaussianProcess(Dataset(x, y), K32, noise_std=0.05, ridge=ridge)
    lam = 0.05 ** 2 if ridge == "variance" else 0.05
    assert gp.lam == lam
    for a in r.uniform(size=(5, 1)):
        mean, var = gp.posterior_mean_var(a)
        m_ref, v_ref = direct_posterior(K32, x, y, lam, a)
        assert mean == pytest.approx(m_ref, abs=1e-8)
        assert var == pytest.approx(v_ref, abs=1e-8)
        assert posterior_mean_var(gp, a) == (mean, var)


def test_variance_bounds():
    r = np.random.default_rng(0)
    x = r.uniform(size=(40, 1))
    gp = GaussianProcess(Dataset(x, r.normal(size=40)), K32)
    _, var = gp.predict(np.linspace(0, 1, 200))
    assert np.all(var >= 0) and np.all(var <= 1.0 + 1e-8)


def test_beta_closed_forms():
    cp = ConfidenceParams(B=2.0, delta=1e-2)
    gp0 = GaussianProcess(Dataset.empty(1), K32)
    lam = 1e-4
    assert beta(gp0, cp) == pytest.approx(2.0 + math.sqrt(-2 * lam * math.log(1e-2)), rel=1e-14)
    gp1 = GaussianProcess(Dataset([[0.5]], [0.1]), K32, noise_std=1e-2)
    expected = 2.0 + math.sqrt(1e-4 * math.log(1 + 1e4) + 2e-4 * math.log(100))
    assert gp1.beta(cp) == pytest.approx(expected, rel=1e-12)
    assert gp1.beta(cp) > cp.B


def test_log_det_monotone_in_data():
    r = np.random.default_rng(3)
    for _ in range(20):
        x = r.uniform(size=(8, 1))
        dets = [GaussianProcess(Dataset(x[:t], np.zeros(t)), K32).log_det for t in range(9)]
        assert np.all(np.diff(dets) >= -1e-10)
        K = gram(K32, x)
        ref = np.linalg.slogdet(np.eye(8) + K / 1e-4)[1]
        assert dets[-1] == pytest.approx(ref, rel=1e-10)


def test_confidence_interval():
    cp = ConfidenceParams(B=1.0)
    gp0 = GaussianProcess(Dataset.empty(1), K32)
    lo, hi = confidence_interval(gp0, cp, [0.2])
    assert lo == pytest.approx(-gp0.beta(cp)) and hi == pytest.approx(gp0.beta(cp))
    r = np.random.default_rng(4)
    x, y = r.uniform(size=(6, 1)), r.normal(size=6)
    gp = GaussianProcess(Dataset(x, y), K32)
    a = np.array([0.37])
    m, v = direct_posterior(K32, x, y, gp.lam, a)
    b = gp.beta(cp)
    lo, hi = gp.confidence_interval(cp, a)
    assert lo == pytest.approx(m - b * math.sqrt(v), abs=1e-8)
    assert hi == pytest.approx(m + b * math.sqrt(v), abs=1e-8)


def test_mean_function_norm():
    assert mean_function_norm(GaussianProcess(Dataset([[0.5]], [0.0]), K32)) == 0.0
    r = np.random.default_rng(5)
    x, y = r.uniform(size=(2, 1)), r.normal(size=2)
    gp = GaussianProcess(Dataset(x, y), K32)
    K = gram(K32, x)
    A = np.linalg.inv(K + gp.lam * np.eye(2))
    assert gp.mean_function_norm() == pytest.approx(math.sqrt(y @ A @ K @ A @ y), rel=1e-10)
    with pytest.raises(ValueError):
        GaussianProcess(Dataset.empty(1), K32).mean_function_norm()


def test_mean_norm_below_interpolated_function():
    r = np.random.default_rng(6)
    g = RkhsFunction(r.uniform(size=(30, 1)), r.uniform(-1, 1, 30), K32)
    x = r.uniform(size=(15, 1))
    gp = GaussianProcess(Dataset(x, g(x)), K32, noise_std=1e-6)
    assert gp.mean_function_norm() <= rkhs_norm(g) + 1e-6


def test_factorization_error_reports_conditioning():
    x = np.linspace(0, 1, 60).reshape(-1, 1)
    with pytest.raises(FactorizationError) as info:
        GaussianProcess(Dataset(x, np.zeros(60)), KernelSpec("se", 1.0), noise_std=1e-12)
    assert info.value.condition_number > 1e15


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset([[0.1], [0.2]], [1.0])
    d = Dataset([0.1, 0.2], [1.0, 2.0])
    assert d.inputs.shape == (2, 1) and len(d) == 2
    assert len(d.subset(np.array([True, False]))) == 1
    with pytest.raises(ValueError):
        Dataset([[0.1]], [np.nan])
    with pytest.raises(ValueError):
        ConfidenceParams(B=1.0, delta=1.0)
    with pytest.raises(ValueError):
        ConfidenceParams(B=-1.0)
