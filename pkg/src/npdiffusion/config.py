"""Scenario configuration: JSON loading, validation and the default experiment."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .agent import RequestStrategy
from .errors import ConfigInvalid, IOFailure
from .estimator import KernelConfig
from .network import Phenomenon, TopologySpec

DEFAULT_CONFIG: dict[str, Any] = {
    "node_count": 50,
    "horizon": 1000,
    "domain": [0.0, 10.0],
    "delta": 0.01,
    "lipschitz_L": 1.0,
    "kernel": {"bandwidth": "per_query", "h_min": 0.001, "h_max": 5.0, "search": "breakpoints"},
    "topology": {"kind": "geometric", "radius": 0.25, "max_attempts": 1000},
    "phenomenon": {"kind": "sin_exp_offset", "a": 1.0, "b": -0.2, "c": 3.0},
    "inputs": {"mean_range": [0.0, 10.0], "std_range": [0.1, 1.0]},
    "noise": {"kind": "gaussian", "sigma_range": [0.0, 0.7]},
    "request_strategy": {"kind": "uniform"},
    "capacity": None,
    "seed": 2023,
    "metrics": {
        "grid_size": 101,
        "grid_rounds": [1, 100, 500, 1000],
        "evolution_every": 10,
        "extra_deltas": [0.001, 0.0001],
    },
    "output": {"message_log": False, "plots": False},
}

_SECTIONS = {
    "kernel": {"bandwidth", "h", "h_min", "h_max", "search"},
    "topology": {"kind", "radius", "p", "edges", "max_attempts"},
    "phenomenon": {"kind", "a", "b", "c", "points"},
    "inputs": {"mean_range", "std_range", "means", "stds"},
    "noise": {"kind", "sigma_range", "sigmas", "width_range", "widths"},
    "request_strategy": {"kind", "grid_size"},
    "metrics": {"grid_size", "grid_rounds", "evolution_every", "extra_deltas"},
    "output": {"message_log", "plots"},
}
_TOP = {"node_count", "horizon", "domain", "delta", "lipschitz_L", "capacity", "seed"} | set(_SECTIONS)


@dataclass(frozen=True)
class ScenarioConfig:
    node_count: int
    horizon: int
    domain: tuple[float, float]
    delta: float
    lipschitz_L: float
    kernel: KernelConfig
    topology: TopologySpec
    phenomenon: Phenomenon
    inputs: dict
    noise: dict
    request_strategy: RequestStrategy
    capacity: int | None
    seed: int
    grid_size: int
    grid_rounds: tuple[int, ...]
    evolution_every: int
    extra_deltas: tuple[float, ...]
    message_log: bool
    plots: bool
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def with_delta(self, delta: float) -> "ScenarioConfig":
        raw = copy.deepcopy(self.raw)
        raw["delta"] = delta
        return parse_config(raw)

    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(data: dict) -> str:
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    leaf = key.split(".")[-1].split("[")[0]
    m = re.search(r'"%s"\s*:' % re.escape(leaf), text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


class _Parser:
    def __init__(self, data: dict, text: str | None):
        self.data = data
        self.text = text

    def fail(self, name: str, reason: str):
        raise ConfigInvalid(name, reason, _line_of(self.text, name))

    def number(self, value, name, lo=None, hi=None, lo_open=False, hi_open=False, integer=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(name, "must be a number")
        if integer and not (isinstance(value, int) or float(value).is_integer()):
            self.fail(name, "must be an integer")
        v = int(value) if integer else float(value)
        if not math.isfinite(v):
            self.fail(name, "must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            self.fail(name, f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and (v >= hi if hi_open else v > hi):
            self.fail(name, f"must be {'<' if hi_open else '<='} {hi}")
        return v

    def pair(self, value, name):
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            self.fail(name, "must be a two-element list [lo, hi]")
        a = self.number(value[0], name)
        b = self.number(value[1], name)
        if not a <= b:
            self.fail(name, "lower end must not exceed upper end")
        return a, b

    def number_list(self, value, name, count, lo=None, lo_open=False):
        if not isinstance(value, list) or len(value) != count:
            self.fail(name, f"must be a list of {count} numbers")
        return tuple(self.number(v, name, lo=lo, lo_open=lo_open) for v in value)

    def section(self, key):
        value = self.data.get(key, DEFAULT_CONFIG[key])
        if not isinstance(value, dict):
            self.fail(key, "must be an object")
        unknown = sorted(set(value) - _SECTIONS[key])
        if unknown:
            self.fail(f"{key}.{unknown[0]}", "unknown key")
        return value


def parse_config(data: dict, text: str | None = None) -> ScenarioConfig:
    """Validate a config object. Missing keys take the default experiment's
    values except ``seed``, which is required."""
    p = _Parser(data, text)
    if not isinstance(data, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    unknown = sorted(set(data) - _TOP)
    if unknown:
        p.fail(unknown[0], "unknown key")
    if "seed" not in data:
        raise ConfigInvalid("seed", "required")

    get = lambda k: data.get(k, DEFAULT_CONFIG[k])  # noqa: E731
    seed = p.number(data["seed"], "seed", lo=0, integer=True)
    node_count = p.number(get("node_count"), "node_count", lo=2, integer=True)
    horizon = p.number(get("horizon"), "horizon", lo=1, integer=True)
    domain = p.pair(get("domain"), "domain")
    if not domain[0] < domain[1]:
        p.fail("domain", "need lo < hi")
    delta = get("delta")
    if isinstance(delta, bool) or not isinstance(delta, (int, float)) or not (0.0 < delta < 1.0):
        p.fail("delta", "must lie in (0,1)")
    delta = float(delta)
    L = p.number(get("lipschitz_L"), "lipschitz_L", lo=0)
    capacity = get("capacity")
    if capacity is not None:
        capacity = p.number(capacity, "capacity", lo=1, integer=True)

    k = p.section("kernel")
    mode = k.get("bandwidth", "per_query")
    try:
        if mode == "fixed":
            if "h" not in k:
                p.fail("kernel.h", "required for fixed bandwidth")
            kernel = KernelConfig.fixed(p.number(k["h"], "kernel.h", lo=0, lo_open=True))
        elif mode == "per_query":
            h_min = p.number(k.get("h_min", 0.001), "kernel.h_min", lo=0, lo_open=True)
            h_max = p.number(k.get("h_max", 5.0), "kernel.h_max", lo=h_min, lo_open=True)
            kernel = KernelConfig.per_query(h_min, h_max, k.get("search", "breakpoints"))
        else:
            p.fail("kernel.bandwidth", "must be 'fixed' or 'per_query'")
    except ValueError as e:
        if isinstance(e, ConfigInvalid):
            raise
        p.fail("kernel", str(e))

    t = p.section("topology")
    kind = t.get("kind", "geometric")
    if kind not in ("geometric", "erdos_renyi", "star", "path", "edges"):
        p.fail("topology.kind", f"unknown kind {kind!r}")
    edges = ()
    if kind == "edges":
        raw_edges = t.get("edges")
        if not isinstance(raw_edges, list) or not raw_edges:
            p.fail("topology.edges", "required non-empty list of [i, j] pairs")
        for e in raw_edges:
            if (not isinstance(e, list) or len(e) != 2
                    or not all(isinstance(v, int) and 0 <= v < node_count for v in e) or e[0] == e[1]):
                p.fail("topology.edges", f"bad edge {e!r}")
        edges = tuple((int(a), int(b)) for a, b in raw_edges)
    topology = TopologySpec(
        kind=kind,
        radius=p.number(t.get("radius", 0.25), "topology.radius", lo=0, lo_open=True),
        p=p.number(t.get("p", 0.1), "topology.p", lo=0, hi=1, lo_open=True),
        edges=edges,
        max_attempts=p.number(t.get("max_attempts", 1000), "topology.max_attempts", lo=1, integer=True),
    )

    ph = p.section("phenomenon")
    pk = ph.get("kind", "sin_exp_offset")
    if pk == "sin_exp_offset":
        phenomenon = Phenomenon(pk, *(p.number(ph.get(c, d), f"phenomenon.{c}")
                                      for c, d in (("a", 1.0), ("b", -0.2), ("c", 3.0))))
    elif pk == "tabulated":
        pts = ph.get("points")
        if not isinstance(pts, list) or len(pts) < 2:
            p.fail("phenomenon.points", "need at least two [x, y] points")
        points = []
        for q in pts:
            if not isinstance(q, list) or len(q) != 2:
                p.fail("phenomenon.points", "each point must be [x, y]")
            points.append((p.number(q[0], "phenomenon.points"), p.number(q[1], "phenomenon.points")))
        phenomenon = Phenomenon(pk, points=tuple(points))
    else:
        p.fail("phenomenon.kind", f"unknown kind {pk!r}")
    phenomenon.check_lipschitz(domain, L)

    inp = p.section("inputs")
    inputs: dict = {}
    if "means" in inp:
        inputs["means"] = p.number_list(inp["means"], "inputs.means", node_count)
    else:
        inputs["mean_range"] = p.pair(inp.get("mean_range", list(domain)), "inputs.mean_range")
    if "stds" in inp:
        inputs["stds"] = p.number_list(inp["stds"], "inputs.stds", node_count, lo=0)
    else:
        inputs["std_range"] = p.pair(inp.get("std_range", [0.1, 1.0]), "inputs.std_range")
        if inputs["std_range"][0] < 0:
            p.fail("inputs.std_range", "must be non-negative")

    nz = p.section("noise")
    nkind = nz.get("kind", "gaussian")
    if nkind not in ("gaussian", "uniform_bounded"):
        p.fail("noise.kind", f"unknown kind {nkind!r}")
    list_key, range_key = ("sigmas", "sigma_range") if nkind == "gaussian" else ("widths", "width_range")
    noise: dict = {"kind": nkind}
    if list_key in nz:
        noise["values"] = p.number_list(nz[list_key], f"noise.{list_key}", node_count, lo=0, lo_open=True)
    else:
        if range_key not in nz and nkind == "uniform_bounded":
            p.fail(f"noise.{range_key}", "required")
        lo, hi = p.pair(nz.get(range_key, [0.0, 0.7]), f"noise.{range_key}")
        if lo < 0 or not hi > 0:
            p.fail(f"noise.{range_key}", "must satisfy 0 <= lo <= hi with hi > 0")
        noise["range"] = (lo, hi)

    rs = p.section("request_strategy")
    try:
        strategy = RequestStrategy(rs.get("kind", "uniform"),
                                   p.number(rs.get("grid_size", 101), "request_strategy.grid_size",
                                            lo=2, integer=True))
    except ValueError as e:
        if isinstance(e, ConfigInvalid):
            raise
        p.fail("request_strategy.kind", str(e))

    m = p.section("metrics")
    grid_size = p.number(m.get("grid_size", 101), "metrics.grid_size", lo=2, integer=True)
    if "grid_rounds" in m and m is data.get("metrics"):
        rounds = m["grid_rounds"]
    else:
        rounds = [r for r in DEFAULT_CONFIG["metrics"]["grid_rounds"] if r <= horizon] + [horizon]
    if not isinstance(rounds, list):
        p.fail("metrics.grid_rounds", "must be a list of round indices")
    rounds = tuple(sorted({p.number(r, "metrics.grid_rounds", lo=1, hi=horizon, integer=True) for r in rounds}))
    every = p.number(m.get("evolution_every", 10), "metrics.evolution_every", lo=1, integer=True)
    extra = m.get("extra_deltas", [])
    if not isinstance(extra, list):
        p.fail("metrics.extra_deltas", "must be a list")
    for d in extra:
        if isinstance(d, bool) or not isinstance(d, (int, float)) or not (0.0 < d < 1.0):
            p.fail("metrics.extra_deltas", "must lie in (0,1)")
    extra = tuple(float(d) for d in extra if float(d) != delta)

    out = p.section("output")
    for key in ("message_log", "plots"):
        if not isinstance(out.get(key, False), bool):
            p.fail(f"output.{key}", "must be true or false")

    raw = copy.deepcopy(data)
    return ScenarioConfig(
        node_count=node_count, horizon=horizon, domain=domain, delta=delta, lipschitz_L=L,
        kernel=kernel, topology=topology, phenomenon=phenomenon, inputs=inputs, noise=noise,
        request_strategy=strategy, capacity=capacity, seed=seed, grid_size=grid_size,
        grid_rounds=rounds, evolution_every=every, extra_deltas=extra,
        message_log=bool(out.get("message_log", False)), plots=bool(out.get("plots", False)),
        raw=raw,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise IOFailure(f"cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigInvalid("<json>", e.msg, e.lineno) from e
    return parse_config(data, text)


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def dump_config(data: dict, path: str | Path) -> None:
    try:
        Path(path).write_text(json.dumps(data, indent=2) + "\n")
    except OSError as e:
        raise IOFailure(f"cannot write config {path}: {e}") from e
