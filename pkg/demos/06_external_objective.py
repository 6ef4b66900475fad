"""
Optimizing an external program
==============================

Any executable that reads a point on stdin and prints a reward can be
optimized. Here the "program" is a one-line Python script.
"""

# %%
import sys

from scenario_safebo.bench import ExternalObjective, optimize
from scenario_safebo.config import ExperimentConfig
from scenario_safebo.domain import Box

reward = ExternalObjective(
    [sys.executable, "-c",
     "import sys; x = float(sys.stdin.read()); print(repr(1 - 4 * (x - 0.7) ** 2))"])
cfg = ExperimentConfig(m=200, grid_points=200, iterations=12, n_cubes=2, threshold=0.0)
log = optimize(cfg, reward, Box.unit(1), [[0.5]])

# %%
print("calls:", reward.calls, "stop:", log.stop_reason)
print("best point:", log.best_point, "certified lower bound:", round(log.best_lower, 4))
print(log.to_csv().splitlines()[-1])
