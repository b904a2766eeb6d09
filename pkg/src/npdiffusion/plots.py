"""Optional SVG line charts of a scenario run. CSV files remain the contract."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


def _pick_agents(graph) -> list[int]:
    degrees = [graph.degree(k) for k in range(graph.node_count)]
    hi = int(np.argmax(degrees))
    lo = int(np.argmin(degrees))
    return [hi] if hi == lo else [hi, lo]


def write_plots(outputs, out_dir) -> list[Path]:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib unavailable, skipping plots")
        return []

    matplotlib.rcParams["svg.hashsalt"] = "npdiffusion"
    res = outputs.main
    out = Path(out_dir)
    paths = []
    last = max(r.round for r in res.grid_reports) if res.grid_reports else None
    for k in _pick_agents(res.graph):
        if last is None:
            break
        rep = next(r for r in res.grid_reports if r.round == last and r.agent == k)
        agent = res.agents[k]
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.scatter(agent.xi, agent.y, s=4, alpha=0.3, label="local measurements")
        ax.plot(rep.x, rep.m_true, "k-", label="m(x)")
        ok = np.isfinite(rep.bound)
        ax.plot(rep.x[ok], rep.m_hat[ok], "-", label="estimate")
        ax.fill_between(rep.x[ok], (rep.m_hat - rep.bound)[ok], (rep.m_hat + rep.bound)[ok],
                        alpha=0.3, color="tab:orange", label="error bound")
        ax.set_xlabel("x")
        ax.set_title(f"agent {k} (degree {res.graph.degree(k)}), round {last}")
        ax.legend(loc="best", fontsize="small")
        p = out / f"agent_{k}_round_{last}.svg"
        fig.savefig(p, metadata={"Date": None})
        plt.close(fig)
        paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 4))
    for k in _pick_agents(res.graph):
        for delta in sorted({r.delta for r in outputs.evolution}, reverse=True):
            rows = [r for r in outputs.evolution if r.agent == k and r.delta == delta]
            ax.plot([r.round for r in rows], [r.mean_bound for r in rows],
                    label=f"agent {k}, delta={delta:g}")
    ax.set_yscale("log")
    ax.set_xlabel("round")
    ax.set_ylabel("mean error bound over grid")
    ax.legend(fontsize="small")
    p = out / "bound_evolution.svg"
    fig.savefig(p, metadata={"Date": None})
    plt.close(fig)
    paths.append(p)
    return paths
