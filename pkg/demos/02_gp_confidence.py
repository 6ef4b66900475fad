"""
GP posterior and confidence bands
=================================

Noisy samples of a known function, the posterior, and the band
``mu +- beta * std`` for a given norm bound ``B``.
"""

# %%
import numpy as np

from scenario_safebo.gp import ConfidenceParams, Dataset, GaussianProcess
from scenario_safebo.kernels import KernelSpec
from scenario_safebo.synthetic import NoisyOracle, generate_truth

truth = generate_truth(seed=1, norm=3.0)
oracle = NoisyOracle(truth, noise_std=0.01, seed=1)
x = np.linspace(0.1, 0.9, 8).reshape(-1, 1)
data = Dataset(x, [oracle(a) for a in x])

# %%
gp = GaussianProcess(data, KernelSpec("matern32", 0.1), noise_std=0.01)
grid = np.linspace(0, 1, 11)
mean, var = gp.predict(grid)
for B in (1.0, 3.0, 10.0):
    cp = ConfidenceParams(B=B, delta=0.01)
    beta = gp.beta(cp)
    inside = np.abs(truth(grid) - mean) <= beta * np.sqrt(var)
    print(f"B={B:5.1f}  beta={beta:.3f}  truth inside band at {inside.sum()}/11 points")

# %% The band is widest far from the data
print(np.round(np.sqrt(var), 3))
