"""
Scenario certificates
=====================

How many sampled norms may be discarded for a given confidence budget, and
what the certificate looks like for a batch of sampled norms.
"""

# %%
import math

import numpy as np

from scenario_safebo.bench import scenario_table
from scenario_safebo.scenario import (ScenarioParams, binomial_tail, certify_norm,
                                      max_admissible_r)

print("tail(500, 0, 0.01) =", binomial_tail(500, 0, 0.01))
for m, r in scenario_table("r-vs-m"):
    print(f"m={m:5d}  discardable r={r}")

# %% More samples buy more discards at a fixed kappa
print([max_admissible_r(2500, g, 1e-3) for g in (0.004, 0.01, 0.05)])

# %% Certify a batch: drop the r largest norms, never go above the previous bound
params = ScenarioParams(gamma=0.1, kappa=0.01, m=1000)
norms = np.sort(np.random.default_rng(0).lognormal(size=1000))
first = certify_norm(norms, 0.0, math.inf, params)
print(first)
second = certify_norm(norms * 1.5, 0.0, first.B, params)
print(second)
