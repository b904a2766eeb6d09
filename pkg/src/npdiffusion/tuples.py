"""Collections of estimate tuples with Lipschitz dominance pruning."""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation


@dataclass(frozen=True)
class EstimateTuple:
    """An argument, the estimate made there, and its confidence bound."""

    xi: float
    mu_hat: float
    beta: float
    origin: int
    created_at: int

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError("tuple bound must be finite and positive")
        if not (math.isfinite(self.xi) and math.isfinite(self.mu_hat)):
            raise ValueError("tuple argument and estimate must be finite")

    @property
    def key(self) -> tuple[int, int, float]:
        return (self.origin, self.created_at, self.xi)

    def transported_bound(self, x: float, lipschitz_L: float) -> float:
        return self.beta + lipschitz_L * abs(x - self.xi)

    def dominates(self, other: "EstimateTuple", lipschitz_L: float) -> bool:
        return self.beta + lipschitz_L * abs(self.xi - other.xi) <= other.beta


class AppendStatus(enum.Enum):
    INSERTED = "inserted"
    REJECTED = "rejected"
    INSERTED_EVICTING = "inserted_evicting"


@dataclass(frozen=True)
class AppendOutcome:
    status: AppendStatus
    evicted: tuple[EstimateTuple, ...] = ()

    @property
    def inserted(self) -> bool:
        return self.status is not AppendStatus.REJECTED


@dataclass
class TupleStore:
    """Tuples kept sorted by argument, with no entry dominated by another.

    Tuple ``a`` dominates ``b`` when ``a.beta + L*|a.xi - b.xi| <= b.beta``,
    i.e. ``a`` certifies at least as tight a bound at ``b``'s own argument.
    On an exact tie in both directions the incumbent is kept. Two entries can
    never share an argument, since one of them always dominates the other.
    """

    lipschitz_L: float
    domain: tuple[float, float] = (-math.inf, math.inf)
    capacity: int | None = None
    _entries: list[EstimateTuple] = field(default_factory=list, repr=False)
    _xl: list[float] = field(default_factory=list, repr=False)
    _xs: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    _betas: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def __post_init__(self):
        if self.capacity is not None and self.capacity < 1:
            raise ValueError("capacity must be a positive integer or None")

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(list(self._entries))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Read-only ``(xi, beta)`` arrays in ascending ``xi``."""
        xs = self._xs.view()
        bs = self._betas.view()
        xs.flags.writeable = False
        bs.flags.writeable = False
        return xs, bs

    def entry(self, i: int) -> EstimateTuple:
        return self._entries[i]

    def append(self, t: EstimateTuple) -> AppendOutcome:
        lo, hi = self.domain
        if not (lo <= t.xi <= hi):
            raise DomainViolation(f"tuple argument {t.xi} outside [{lo}, {hi}]")
        evicted: list[EstimateTuple] = []
        if self._entries:
            spread = self.lipschitz_L * np.abs(self._xs - t.xi)
            if (self._betas + spread <= t.beta).any():
                return AppendOutcome(AppendStatus.REJECTED)
            victims = t.beta + spread <= self._betas
            if victims.any():
                evicted = [e for e, v in zip(self._entries, victims) if v]
                keep = ~victims
                self._entries = [e for e, k in zip(self._entries, keep) if k]
                self._xl = [x for x, k in zip(self._xl, keep) if k]
                self._xs = self._xs[keep]
                self._betas = self._betas[keep]
        self._insert(t)

        if self.capacity is not None and len(self._entries) > self.capacity:
            # evict the loosest bound; ties go to the newest, then the largest argument
            worst = max(range(len(self._entries)),
                        key=lambda i: (self._entries[i].beta, self._entries[i].created_at, self._entries[i].xi))
            dropped = self._entries[worst]
            self._remove_at(worst)
            if dropped is t:
                # t is gone again, so restore what it displaced: the store is unchanged
                for e in evicted:
                    self._insert(e)
                return AppendOutcome(AppendStatus.REJECTED)
            evicted.append(dropped)

        if evicted:
            return AppendOutcome(AppendStatus.INSERTED_EVICTING, tuple(evicted))
        return AppendOutcome(AppendStatus.INSERTED)

    def _insert(self, t: EstimateTuple) -> None:
        pos = bisect.bisect_left(self._xl, t.xi)
        self._entries.insert(pos, t)
        self._xl.insert(pos, t.xi)
        self._xs = np.concatenate((self._xs[:pos], (t.xi,), self._xs[pos:]))
        self._betas = np.concatenate((self._betas[:pos], (t.beta,), self._betas[pos:]))

    def _remove_at(self, i: int) -> None:
        del self._entries[i]
        del self._xl[i]
        self._xs = np.delete(self._xs, i)
        self._betas = np.delete(self._betas, i)

    def nearest(self, xi_req: float) -> EstimateTuple | None:
        """Closest stored tuple; equal distances go to the smaller argument."""
        if not self._entries:
            return None
        pos = bisect.bisect_left(self._xl, xi_req)
        if pos == 0:
            return self._entries[0]
        if pos == len(self._xl):
            return self._entries[-1]
        left, right = self._entries[pos - 1], self._entries[pos]
        if abs(right.xi - xi_req) < abs(left.xi - xi_req):
            return right
        return left

    def snapshot(self) -> list[EstimateTuple]:
        return list(self._entries)


def _nearest_key(t: EstimateTuple, xi_req: float):
    return (abs(t.xi - xi_req), t.xi, t.created_at)


def nearest_in(stores: list[TupleStore], xi_req: float) -> EstimateTuple | None:
    """Nearest tuple over the union of several stores.

    Ties go to the smaller argument, then the earlier creation round.
    """
    found = [t for t in (s.nearest(xi_req) for s in stores) if t is not None]
    if not found:
        return None
    return min(found, key=lambda t: _nearest_key(t, xi_req))
