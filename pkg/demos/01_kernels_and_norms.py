"""
Kernels, RKHS norms and the continuity bound
============================================

A finite kernel expansion has a closed-form RKHS norm, and that norm bounds
how fast the function can change in the kernel's own metric.
"""

# %%
import numpy as np

from scenario_safebo.kernels import (KernelSpec, RkhsFunction, gram, rkhs_norm,
                                     scale_to_norm, semimetric_matrix)

k = KernelSpec("matern32", lengthscale=0.1)
x = np.linspace(0, 1, 5)
print(np.round(gram(k, x), 3))

# %% A random expansion, rescaled to norm 5
rng = np.random.default_rng(0)
f = RkhsFunction(rng.uniform(size=(200, 1)), rng.uniform(-1, 1, 200), k)
f5 = scale_to_norm(f, 5.0)
print("norm before", rkhs_norm(f), "after", rkhs_norm(f5))

# %% |f(a) - f(b)| never exceeds ||f|| * d_k(a, b)
grid = np.linspace(0, 1, 400)
values = f5(grid)
slack = 5.0 * semimetric_matrix(k, grid, grid) - np.abs(values[:, None] - values[None, :])
print("smallest slack over all pairs:", slack.min())
