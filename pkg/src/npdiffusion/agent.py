"""A single network node: local learning, tuple exchange and exploitation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import estimator as est
from .errors import DomainViolation
from .tuples import AppendOutcome, EstimateTuple, TupleStore, nearest_in


@dataclass(frozen=True)
class RequestStrategy:
    """How an agent picks the argument it asks its neighbours about.

    ``"uniform"`` draws uniformly over the domain. ``"max_bound"`` is a
    heuristic of this package: it asks for the grid point where the agent's
    current exploit bound is largest.
    """

    kind: str = "uniform"
    grid_size: int = 101

    def __post_init__(self):
        if self.kind not in ("uniform", "max_bound"):
            raise ValueError(f"unknown request strategy {self.kind!r}")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")


@dataclass(frozen=True)
class ExploitResult:
    m_hat: float
    bound: float
    source: str  # "local", "acquired" or "none"
    tuple: EstimateTuple | None = None
    # bound carried by the chosen tuple itself, before transport to x
    tuple_beta: float | None = None

    @property
    def usable(self) -> bool:
        return self.source != "none"


class Agent:
    """One node running the diffusion learning protocol.

    The agent only ever sees its own samples and tuples received from
    neighbours; raw outputs of other agents never reach it.
    """

    def __init__(self, agent_id: int, bound_params: est.BoundParams, kernel: est.KernelConfig,
                 domain: tuple[float, float], rng: np.random.Generator | None = None,
                 request_strategy: RequestStrategy | None = None, capacity: int | None = None):
        self.id = agent_id
        self.bound_params = bound_params
        self.kernel = kernel
        self.domain = (float(domain[0]), float(domain[1]))
        self.rng = rng if rng is not None else np.random.default_rng(agent_id)
        self.request_strategy = request_strategy or RequestStrategy()
        L = bound_params.lipschitz_L
        self.local_store = TupleStore(L, self.domain, capacity)
        self.acquired_store = TupleStore(L, self.domain, capacity)
        self._xi = np.empty(64)
        self._y = np.empty(64)
        self._n = 0

    @property
    def n_samples(self) -> int:
        return self._n

    @property
    def xi(self) -> np.ndarray:
        return self._xi[: self._n]

    @property
    def y(self) -> np.ndarray:
        return self._y[: self._n]

    @property
    def samples(self) -> list[est.Sample]:
        return [est.Sample(float(a), float(b)) for a, b in zip(self.xi, self.y)]

    def _check_domain(self, x: float) -> None:
        lo, hi = self.domain
        if not (lo <= x <= hi):
            raise DomainViolation(f"argument {x} outside [{lo}, {hi}]")

    def local_evaluation(self, x: float) -> est.LocalEvaluation:
        return est.evaluate(x, self.xi, self.y, self.kernel, self.bound_params)

    def observe(self, xi: float, y: float, round_index: int) -> AppendOutcome | None:
        """Store a measurement, evaluate at it and file the local tuple."""
        self._check_domain(xi)
        if self._n == len(self._xi):
            self._xi = np.resize(self._xi, 2 * self._n)
            self._y = np.resize(self._y, 2 * self._n)
        self._xi[self._n] = xi
        self._y[self._n] = y
        self._n += 1
        ev = self.local_evaluation(xi)
        if not math.isfinite(ev.beta):
            return None
        t = EstimateTuple(float(xi), ev.mu_hat, ev.beta, self.id, round_index)
        return self.local_store.append(t)

    def answer_request(self, xi_req: float) -> EstimateTuple | None:
        return nearest_in([self.local_store, self.acquired_store], xi_req)

    def receive_tuple(self, t: EstimateTuple) -> AppendOutcome:
        return self.acquired_store.append(t)

    def select_request(self) -> float:
        lo, hi = self.domain
        if self.request_strategy.kind == "uniform":
            return float(self.rng.uniform(lo, hi))
        grid = np.linspace(lo, hi, self.request_strategy.grid_size)
        bounds = np.array([r.bound for r in self.exploit_many(grid)])
        return float(grid[int(np.argmax(bounds))])  # first maximum = smallest x

    def exploit(self, x: float) -> ExploitResult:
        """Best available estimate at ``x`` and its error bound.

        Acquired tuples are candidates only when transporting their bound to
        ``x`` strictly beats the local bound. Among candidates the smallest
        transported bound wins. The reported bound is the transported one,
        ``beta_j + L*|x - xi_j|``, which is what actually holds at ``x``.
        """
        return self.exploit_many([x])[0]

    def exploit_many(self, xs) -> list[ExploitResult]:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        for x in xs:
            self._check_domain(x)
        mu_loc, _, beta_loc, _ = est.evaluate_many(xs, self.xi, self.y, self.kernel, self.bound_params)
        L = self.bound_params.lipschitz_L
        chosen = np.full(xs.shape, -1)
        transported_best = np.full(xs.shape, np.inf)
        if len(self.acquired_store):
            acq_x, acq_b = self.acquired_store.arrays()
            dist = L * np.abs(xs[:, None] - acq_x[None, :])
            members = dist < beta_loc[:, None] - acq_b[None, :]
            transported = np.where(members, dist + acq_b[None, :], np.inf)
            j = np.argmin(transported, axis=1)  # entries sorted by xi: ties go to smaller xi
            has = members.any(axis=1)
            chosen = np.where(has, j, -1)
            transported_best = transported[np.arange(len(xs)), j]

        out = []
        for i in range(len(xs)):
            if chosen[i] >= 0:
                t = self.acquired_store.entry(int(chosen[i]))
                b = min(float(beta_loc[i]), float(transported_best[i]))
                out.append(ExploitResult(t.mu_hat, b, "acquired", t, t.beta))
            elif np.isnan(mu_loc[i]):
                out.append(ExploitResult(0.0, math.inf, "none"))
            else:
                out.append(ExploitResult(float(mu_loc[i]), float(beta_loc[i]), "local"))
        return out
