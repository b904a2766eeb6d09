"""Synchronous round-based simulation of the diffusion protocol.

Every message is delivered exactly one round after it is sent. Within a
round each agent, independently of the others:

1. draws a local measurement and files its local tuple,
2. absorbs the tuples shared with it in the previous round,
3. answers the requests received in the previous round,
4. picks a new request argument and sends it to every neighbour.

Agents only interact through the message queue, which is sorted by
``(send_round, sender, receiver, kind)`` at each round boundary. Results are
therefore independent of the order, or parallelism, in which agents are
stepped.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import estimator as est
from .agent import Agent
from .config import ScenarioConfig
from .errors import IOFailure
from .metrics import (EvolutionRow, GridReport, collect_grid, evolution_rows, uniform_grid,
                      write_evolution_csv, write_grid_csv, write_rows)
from .network import (Graph, InputModel, Message, NoiseModel, generate_topology, sort_messages)

log = logging.getLogger(__name__)

# spawn keys of the independent random streams derived from the master seed
_TOPOLOGY, _SETUP, _DATA, _REQUESTS = 0, 1, 2, 3


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass
class World:
    config: ScenarioConfig
    graph: Graph
    agents: list[Agent]
    inputs: list[InputModel]
    noises: list[NoiseModel]
    data_rngs: list[np.random.Generator]

    def sample_input(self, k: int) -> float:
        return self.inputs[k].draw(self.data_rngs[k], self.config.domain)

    def sample_noise(self, k: int) -> float:
        return self.noises[k].draw(self.data_rngs[k])


@dataclass
class SimResult:
    config: ScenarioConfig
    graph: Graph
    agents: list[Agent]
    world: World
    grid_reports: list[GridReport] = field(default_factory=list)
    evolution: list[EvolutionRow] = field(default_factory=list)
    requests_delivered: int = 0
    shares_delivered: int = 0
    shares_per_round: list[int] = field(default_factory=list)
    message_log: list[dict] | None = None

    def reports_at(self, round_index: int) -> list[GridReport]:
        return [r for r in self.grid_reports if r.round == round_index]


def _per_agent(values: dict, key_list: str, key_range: str, count: int, rng, positive=False):
    if key_list in values:
        return [float(v) for v in values[key_list]]
    lo, hi = values[key_range]
    out = []
    for _ in range(count):
        v = float(rng.uniform(lo, hi))
        while positive and v <= 0.0:
            v = float(rng.uniform(lo, hi))
        out.append(v)
    return out


def build_world(config: ScenarioConfig) -> World:
    """Topology, per-agent data models and agents, all derived from the seed."""
    graph = generate_topology(config.topology, config.node_count, _stream(config.seed, _TOPOLOGY))
    setup = _stream(config.seed, _SETUP)
    M = config.node_count
    means = _per_agent(config.inputs, "means", "mean_range", M, setup)
    stds = _per_agent(config.inputs, "stds", "std_range", M, setup)
    noise_params = _per_agent(config.noise, "values", "range", M, setup, positive=True)
    inputs = [InputModel(m, s) for m, s in zip(means, stds)]
    noises = [NoiseModel(config.noise["kind"], p) for p in noise_params]
    agents = []
    for k in range(M):
        params = est.BoundParams(config.lipschitz_L, noises[k].variance_proxy, config.delta)
        agents.append(Agent(k, params, config.kernel, config.domain,
                            rng=_stream(config.seed, _REQUESTS, k),
                            request_strategy=config.request_strategy, capacity=config.capacity))
    data_rngs = [_stream(config.seed, _DATA, k) for k in range(M)]
    return World(config, graph, agents, inputs, noises, data_rngs)


def _step_agent(world: World, k: int, t: int, shares: list[Message], requests: list[Message]) -> list[Message]:
    agent = world.agents[k]
    xi = world.sample_input(k)
    y = float(world.config.phenomenon(xi)) + world.sample_noise(k)
    agent.observe(xi, y, t)
    for msg in shares:
        agent.receive_tuple(msg.tuple)
    out = []
    for msg in requests:
        tup = agent.answer_request(msg.xi_req)
        if tup is not None:
            out.append(Message("share", k, msg.sender, t, tuple=tup))
    xi_req = agent.select_request()
    out.extend(Message("request", k, j, t, xi_req=xi_req) for j in world.graph.neighbors(k))
    return out


def _evolution_due(t: int, config: ScenarioConfig) -> bool:
    return t == 1 or t == config.horizon or t % config.evolution_every == 0


def run(config: ScenarioConfig, workers: int = 1, log_messages: bool | None = None) -> SimResult:
    """Execute ``config.horizon`` rounds and collect grid and evolution metrics."""
    world = build_world(config)
    if log_messages is None:
        log_messages = config.message_log
    result = SimResult(config, world.graph, world.agents, world,
                       message_log=[] if log_messages else None)
    grid = uniform_grid(config.domain, config.grid_size)
    M = config.node_count
    pending: list[Message] = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for t in range(1, config.horizon + 1):
            shares = [[] for _ in range(M)]
            requests = [[] for _ in range(M)]
            for msg in pending:
                assert msg.delivery_round == t
                (shares if msg.kind == "share" else requests)[msg.receiver].append(msg)
            n_shares = sum(map(len, shares))
            result.shares_delivered += n_shares
            result.requests_delivered += sum(map(len, requests))
            result.shares_per_round.append(n_shares)

            args = [(world, k, t, shares[k], requests[k]) for k in range(M)]
            if pool is None:
                outs = [_step_agent(*a) for a in args]
            else:
                outs = list(pool.map(lambda a: _step_agent(*a), args))
            pending = sort_messages([m for out in outs for m in out])
            if result.message_log is not None:
                result.message_log.extend(m.to_record() for m in pending)

            snap = t in config.grid_rounds
            if snap or _evolution_due(t, config):
                reports = collect_grid(world.agents, config.phenomenon, grid, t)
                if snap:
                    result.grid_reports.extend(reports)
                if _evolution_due(t, config):
                    result.evolution.extend(evolution_rows(reports, config.delta))
            if t % 100 == 0:
                log.debug("round %d/%d done", t, config.horizon)
    finally:
        if pool is not None:
            pool.shutdown()
    return result


@dataclass
class RunOutputs:
    main: SimResult
    evolution: list[EvolutionRow]


def run_scenario(config: ScenarioConfig, workers: int = 1) -> RunOutputs:
    """Run the configured scenario plus one rerun per extra confidence level.

    Reruns share the seed, so every confidence level sees the same
    measurements (and, under the uniform strategy, the same requests).
    """
    main = run(config, workers)
    evolution = list(main.evolution)
    for d in config.extra_deltas:
        evolution.extend(run(config.with_delta(d), workers, log_messages=False).evolution)
    evolution.sort(key=lambda r: (r.round, r.agent, -r.delta))
    return RunOutputs(main, evolution)


def agent_table(world: World) -> list[tuple]:
    return [(k, world.graph.degree(k), world.inputs[k].mean, world.inputs[k].std,
             world.noises[k].kind, world.noises[k].param, world.agents[k].bound_params.sigma)
            for k in range(len(world.agents))]


AGENT_HEADER = ("agent", "degree", "input_mean", "input_std", "noise_kind", "noise_param", "sigma_bound")


def write_outputs(outputs: RunOutputs, out_dir: str | Path) -> list[Path]:
    """Write every artifact of a scenario run into ``out_dir``."""
    out = Path(out_dir)
    res = outputs.main
    paths = [out / "grid.csv", out / "bound_evolution.csv", out / "agents.csv", out / "topology.txt"]
    write_grid_csv(res.grid_reports, paths[0])
    write_evolution_csv(outputs.evolution, paths[1])
    write_rows(paths[2], AGENT_HEADER, agent_table(res.world))
    try:
        paths[3].write_text(res.graph.edge_list_text())
        if res.message_log is not None:
            p = out / "messages.jsonl"
            with p.open("w") as fh:
                for rec in res.message_log:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
            paths.append(p)
    except OSError as e:
        raise IOFailure(f"cannot write to {out}: {e}") from e
    if res.config.plots:
        from .plots import write_plots

        paths.extend(write_plots(outputs, out))
    return paths
