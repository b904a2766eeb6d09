"""Graphs, data-generating processes and the message type of the simulator."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigInvalid, TopologyUnconnectable, TruncationExhausted
from .tuples import EstimateTuple

MAX_REDRAWS = 10_000


@dataclass(frozen=True)
class Graph:
    node_count: int
    adjacency: tuple[tuple[int, ...], ...]
    positions: np.ndarray | None = None

    def __post_init__(self):
        if len(self.adjacency) != self.node_count:
            raise ValueError("adjacency length must equal node_count")
        for i, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbour list of {i} must be sorted and duplicate-free")
            if i in nbrs:
                raise ValueError(f"self-loop at node {i}")
            for j in nbrs:
                if i not in self.adjacency[j]:
                    raise ValueError(f"edge {i}-{j} is not symmetric")

    @classmethod
    def from_edges(cls, node_count: int, edges, positions=None) -> "Graph":
        adj: list[set[int]] = [set() for _ in range(node_count)]
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            adj[i].add(j)
            adj[j].add(i)
        return cls(node_count, tuple(tuple(sorted(a)) for a in adj), positions)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.adjacency) for j in nbrs if i < j]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.adjacency[i]

    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            for j in self.adjacency[queue.popleft()]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return len(seen) == self.node_count

    def edge_list_text(self) -> str:
        return "".join(f"{i} {j}\n" for i, j in self.edges())


@dataclass(frozen=True)
class TopologySpec:
    """``kind`` is one of ``geometric``, ``erdos_renyi``, ``star``, ``path``, ``edges``."""

    kind: str = "geometric"
    radius: float = 0.25
    p: float = 0.1
    edges: tuple[tuple[int, int], ...] = ()
    max_attempts: int = 1000


def generate_topology(spec: TopologySpec, node_count: int, rng: np.random.Generator) -> Graph:
    """Build a connected undirected graph; random kinds resample until connected."""
    if node_count < 2:
        raise ValueError("node_count must be at least 2")
    kind = spec.kind
    if kind == "star":
        return Graph.from_edges(node_count, [(0, j) for j in range(1, node_count)])
    if kind == "path":
        return Graph.from_edges(node_count, [(j, j + 1) for j in range(node_count - 1)])
    if kind == "edges":
        g = Graph.from_edges(node_count, spec.edges)
        if not g.is_connected():
            raise TopologyUnconnectable("explicit edge list is not connected")
        return g
    for _ in range(spec.max_attempts):
        if kind == "geometric":
            pos = rng.uniform(0.0, 1.0, size=(node_count, 2))
            close = squareform(pdist(pos)) <= spec.radius
        elif kind == "erdos_renyi":
            pos = None
            draw = rng.uniform(size=(node_count, node_count))
            close = np.triu(draw < spec.p, 1)
            close = close | close.T
        else:
            raise ValueError(f"unknown topology kind {kind!r}")
        np.fill_diagonal(close, False)
        ii, jj = np.nonzero(np.triu(close, 1))
        g = Graph.from_edges(node_count, zip(ii.tolist(), jj.tolist()), pos)
        if g.is_connected():
            return g
    raise TopologyUnconnectable(f"no connected {kind} graph after {spec.max_attempts} attempts")


@dataclass(frozen=True)
class Phenomenon:
    """Latent function. ``sin_exp_offset`` is ``a*sin(x)*exp(b*x) + c``;
    ``tabulated`` interpolates linearly between ``points``."""

    kind: str = "sin_exp_offset"
    a: float = 1.0
    b: float = -0.2
    c: float = 3.0
    points: tuple[tuple[float, float], ...] = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "sin_exp_offset":
            out = self.a * np.sin(x) * np.exp(self.b * x) + self.c
        elif self.kind == "tabulated":
            px, py = zip(*self.points)
            out = np.interp(x, px, py)
        else:
            raise ValueError(f"unknown phenomenon kind {self.kind!r}")
        return float(out) if out.ndim == 0 else out

    def max_slope(self, domain: tuple[float, float], n: int = 100_001) -> float:
        if self.kind == "tabulated":
            px, py = (np.asarray(v, dtype=float) for v in zip(*self.points))
            return float(np.max(np.abs(np.diff(py) / np.diff(px))))
        grid = np.linspace(domain[0], domain[1], n)
        return float(np.max(np.abs(np.diff(self(grid)) / np.diff(grid))))

    def check_lipschitz(self, domain, lipschitz_L: float) -> None:
        if self.kind == "tabulated":
            px = [p[0] for p in self.points]
            if len(px) < 2 or any(b <= a for a, b in zip(px, px[1:])):
                raise ConfigInvalid("phenomenon.points", "need at least two points with increasing x")
        slope = self.max_slope(domain)
        if slope > lipschitz_L:
            raise ConfigInvalid("lipschitz_L", f"phenomenon slope {slope:.6g} exceeds L={lipschitz_L}")


@dataclass(frozen=True)
class NoiseModel:
    """Per-agent noise. ``param`` is the Gaussian standard deviation, or the
    full width ``b - a`` of a centred uniform distribution."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform_bounded"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not self.param > 0:
            raise ValueError("noise parameter must be positive")

    @property
    def variance_proxy(self) -> float:
        """Sub-Gaussian scale used in the bounds (Hoeffding: (b-a)/2 for uniform)."""
        return self.param if self.kind == "gaussian" else self.param / 2.0

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "gaussian":
            return float(rng.normal(0.0, self.param))
        half = self.param / 2.0
        return float(rng.uniform(-half, half))


@dataclass(frozen=True)
class InputModel:
    mean: float
    std: float

    def draw(self, rng: np.random.Generator, domain: tuple[float, float]) -> float:
        lo, hi = domain
        if self.std == 0:
            if lo <= self.mean <= hi:
                return float(self.mean)
            raise TruncationExhausted(f"degenerate input {self.mean} outside [{lo}, {hi}]")
        for _ in range(MAX_REDRAWS):
            v = float(rng.normal(self.mean, self.std))
            if lo <= v <= hi:
                return v
        raise TruncationExhausted(
            f"N({self.mean}, {self.std}) gave no value in [{lo}, {hi}] after {MAX_REDRAWS} draws")


@dataclass(frozen=True)
class Message:
    """Either a request for an argument or a shared tuple.

    There is deliberately no field for raw measurements.
    """

    kind: str  # "request" or "share"
    sender: int
    receiver: int
    send_round: int
    xi_req: float | None = None
    tuple: EstimateTuple | None = None

    def __post_init__(self):
        if self.kind == "request":
            if self.xi_req is None or self.tuple is not None:
                raise ValueError("a request carries an argument only")
        elif self.kind == "share":
            if self.tuple is None or self.xi_req is not None:
                raise ValueError("a share carries a tuple only")
        else:
            raise ValueError(f"unknown message kind {self.kind!r}")

    @property
    def delivery_round(self) -> int:
        return self.send_round + 1

    def sort_key(self):
        return (self.send_round, self.sender, self.receiver, self.kind)

    def to_record(self) -> dict:
        if self.kind == "request":
            payload = {"xi_req": self.xi_req}
        else:
            t = self.tuple
            payload = {"xi": t.xi, "mu_hat": t.mu_hat, "beta": t.beta,
                       "origin": t.origin, "created_at": t.created_at}
        return {"kind": self.kind, "from": self.sender, "to": self.receiver,
                "send_round": self.send_round, "payload": payload}


def sort_messages(messages: Sequence[Message]) -> list[Message]:
    return sorted(messages, key=Message.sort_key)

