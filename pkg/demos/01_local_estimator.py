"""
A single sensor's local estimate
================================

One agent with noisy readings of a smooth function, and the error bar
that comes with a box-kernel average.
"""

# %%
import numpy as np

from npdiffusion import BoundParams, KernelConfig, Phenomenon, evaluate, optimize_bandwidth
from npdiffusion.estimator import alpha

f = Phenomenon()
rng = np.random.default_rng(0)
xi = rng.uniform(3.0, 7.0, 400)
y = f(xi) + rng.normal(0, 0.3, xi.size)

# %% [markdown]
# With a fixed window the bound has two parts: a bias term that grows with
# the window and a noise term that shrinks with the number of points inside.

# %%
params = BoundParams(lipschitz_L=1.0, sigma=0.3, delta=0.01)
for h in (0.05, 0.2, 0.8):
    ev = evaluate(5.0, xi, y, KernelConfig.fixed(h), params)
    print(f"h={h:<5} kappa={ev.kappa:4.0f}  mu_hat={ev.mu_hat:.4f}  beta={ev.beta:.4f}  "
          f"true={float(f(5.0)):.4f}")

# %%
# letting the bandwidth follow the query point picks the best trade-off
h_star, b_star = optimize_bandwidth(5.0, xi, params, 0.001, 5.0)
print(f"best h={h_star:.4f}, beta={b_star:.4f}")

# %%
# outside the sampled region the window is empty and no bound exists
print(evaluate(9.5, xi, y, KernelConfig.fixed(0.2), params))

# %% [markdown]
# The confidence level enters only through a logarithm, so tightening it a
# hundredfold barely moves the noise term.

# %%
for k in (10, 100, 1000):
    print(k, round(float(alpha(k, 1e-4) / alpha(k, 1e-2)), 4))
