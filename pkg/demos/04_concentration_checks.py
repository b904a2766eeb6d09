"""
Monte Carlo checks of the concentration bounds
==============================================

Each check draws many independent trials and compares an empirical
failure rate (or mean) with what the theory allows.
"""

# %%
import numpy as np

from npdiffusion import Phenomenon
from npdiffusion import concentration as lab

r = lab.selfnorm_violation_rate(100, 1.0, 0.05, "uniform_unit", replications=10_000, seed=7)
print(f"self-normalised sum: violation rate {r.value:.4f} +/- {r.standard_error:.4f} (delta 0.05)")

# %% [markdown]
# Rescaling the noise rescales the bound too, so the rate does not depend
# on sigma. Only drawing noise smaller than the sigma in the bound helps.

# %%
for scale in (1.0, 0.5, 0.0):
    r = lab.selfnorm_violation_rate(100, 1.0, 0.05, replications=10_000, seed=7, noise_scale=scale)
    print(f"noise scale {scale}: {r.value:.4f}")

# %%
m = lab.martingale_mean(50, 0.5, 1.0, replications=100_000, seed=7)
print(f"exponential supermartingale mean {m.value:.4f} +/- {m.standard_error:.4f} (should not exceed 1)")

# %%
design = np.random.default_rng(3).uniform(4.0, 6.0, 200)
for h in (0.1, 0.5, 1.0):
    c = lab.local_bound_coverage(5.0, design, h, Phenomenon(), 0.3, 0.05, replications=5000, seed=7)
    print(f"local bound at x=5, h={h}: violation rate {c.value:.4f}")
