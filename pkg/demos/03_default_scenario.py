"""
Fifty agents on a random geometric graph
========================================

The shipped scenario: 1000 rounds, one reading per agent per round, one
request per agent per round. Takes under half a minute per confidence level.
"""

# %%
import sys
from pathlib import Path

import numpy as np

from npdiffusion import load_config, run

cfg = load_config(Path(__file__).resolve().parents[1] / "configs" / "default.json")
if len(sys.argv) > 1:  # optional shorter horizon, e.g. `python 03_default_scenario.py 200`
    from npdiffusion import parse_config

    raw = dict(cfg.raw, horizon=int(sys.argv[1]))
    raw["metrics"] = dict(raw["metrics"], grid_rounds=[r for r in raw["metrics"]["grid_rounds"] if r <= raw["horizon"]])
    cfg = parse_config(raw)

res = run(cfg)
print(f"{len(res.graph.edges())} edges, {res.shares_delivered} tuples delivered")

# %% [markdown]
# Bounds shrink as readings accumulate and as tuples spread.

# %%
for t in cfg.grid_rounds:
    reps = res.reports_at(t)
    bound = np.concatenate([r.bound for r in reps])
    ok = np.concatenate([(np.abs(r.m_hat - r.m_true) <= r.bound)[r.usable] for r in reps])
    src = np.concatenate([r.source for r in reps])
    print(f"round {t:5d}  finite {np.isfinite(bound).mean():6.1%}  "
          f"median bound {np.median(bound):8.3f}  contained {ok.mean():6.1%}  "
          f"acquired {(src == 'acquired').mean():5.1%}")

# %%
# a well-connected agent against a poorly connected one
deg = np.array([res.graph.degree(k) for k in range(len(res.agents))])
final = res.reports_at(cfg.grid_rounds[-1])
for k in (int(deg.argmax()), int(deg.argmin())):
    print(f"agent {k} degree {deg[k]}: mean bound {final[k].bound.mean():.3f}")
