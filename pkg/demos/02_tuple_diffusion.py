"""
Sharing estimates between two agents
====================================

Agents never exchange raw readings. They trade (location, estimate, bound)
tuples and keep only those that are not beaten by another after the
bound is carried over the distance between them.
"""

# %%
import numpy as np

from npdiffusion import Agent, BoundParams, EstimateTuple, KernelConfig, Phenomenon, TupleStore

store = TupleStore(lipschitz_L=1.0, domain=(0.0, 10.0))
for t in [EstimateTuple(2.0, 0.0, 0.5, 0, 0),
          EstimateTuple(2.1, 0.0, 0.9, 1, 0),   # 0.5 + 0.1 <= 0.9: dominated, rejected
          EstimateTuple(2.1, 0.0, 0.2, 2, 0),   # evicts the first one
          EstimateTuple(6.0, 0.0, 0.4, 3, 0)]:
    print(t.xi, t.beta, store.append(t).status.name)
print([(t.xi, t.beta) for t in store])

# %%
f = Phenomenon()
rng = np.random.default_rng(1)
params = BoundParams(1.0, 0.3, 0.01)
kernel = KernelConfig.per_query(0.001, 5.0)
left, right = Agent(0, params, kernel, (0, 10)), Agent(1, params, kernel, (0, 10))
for n in range(300):
    for agent, (lo, hi) in ((left, (0, 5)), (right, (5, 10))):
        x = rng.uniform(lo, hi)
        agent.observe(x, float(f(x)) + rng.normal(0, 0.3), n)

# %% [markdown]
# Before any exchange the left agent knows nothing about the right half.

# %%
xs = np.linspace(0, 10, 11)
print([round(r.bound, 3) for r in left.exploit_many(xs)])

# %%
for _ in range(200):
    t = right.answer_request(float(rng.uniform(0, 10)))
    if t is not None:
        left.receive_tuple(t)

for x, r in zip(xs, left.exploit_many(xs)):
    print(f"x={x:4.1f}  source={r.source:8s}  bound={r.bound:.3f}  |err|={abs(r.m_hat - float(f(x))):.3f}")
