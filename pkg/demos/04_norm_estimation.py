"""
Estimating an unknown RKHS norm from data
=========================================

Random functions that fit the data give a cloud of plausible norms; the
scenario certificate turns the cloud into a bound. The ratio to the true
norm shrinks as data accumulates and stays above one.
"""

# %%
from scenario_safebo.bench import norm_study
from scenario_safebo.config import ExperimentConfig

cfg = ExperimentConfig(m=500, seed=0)
study = norm_study(cfg, n_functions=5, iterations=10)

# %%
for t, mean, std, under in study.summary():
    print(f"t={t:2d}  mean B/||f|| = {mean:.3f} +- {std:.3f}  under: {under}")
print("functions ever under-estimated:", study.ever_under)
