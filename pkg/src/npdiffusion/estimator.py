"""Box-kernel Nadaraya-Watson estimation with finite-sample error bounds.

All functions are pure. Samples are passed as parallel arrays of explanatory
values ``xi`` and outputs ``y``; :func:`as_arrays` converts a list of
:class:`Sample` records into that form.

Arithmetic is plain float64 and comparisons are exact. The box kernel window
is closed, so a sample at distance exactly ``h`` from the query point is
counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidRange

SQRT2 = math.sqrt(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Sample:
    xi: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.xi) and math.isfinite(self.y)):
            raise ValueError("sample values must be finite")


@dataclass(frozen=True)
class KernelConfig:
    """Box kernel with either a fixed bandwidth or a per-query optimal one.

    ``search`` selects how the per-query bandwidth is found: ``"breakpoints"``
    (exact enumeration, the default) or ``"golden"`` (golden section search).
    """

    h: float | None = None
    h_min: float | None = None
    h_max: float | None = None
    search: str = "breakpoints"
    kind: str = "box"

    def __post_init__(self):
        if self.kind != "box":
            raise ValueError(f"unsupported kernel kind {self.kind!r}")
        if self.h is not None:
            if not (self.h > 0 and math.isfinite(self.h)):
                raise ValueError("bandwidth h must be positive and finite")
            if self.h_min is not None or self.h_max is not None:
                raise ValueError("give either a fixed h or an [h_min, h_max] range, not both")
        else:
            if self.h_min is None or self.h_max is None:
                raise ValueError("per-query bandwidth needs h_min and h_max")
            if not self.h_min > 0:
                raise ValueError("h_min must be positive")
            if not self.h_min < self.h_max:
                raise ValueError("h_min must be smaller than h_max")
            if not math.isfinite(self.h_max):
                raise ValueError("h_max must be finite")
        if self.search not in ("breakpoints", "golden"):
            raise ValueError(f"unknown bandwidth search {self.search!r}")

    @classmethod
    def fixed(cls, h: float) -> "KernelConfig":
        return cls(h=h)

    @classmethod
    def per_query(cls, h_min: float, h_max: float, search: str = "breakpoints") -> "KernelConfig":
        return cls(h_min=h_min, h_max=h_max, search=search)

    @property
    def is_fixed(self) -> bool:
        return self.h is not None


@dataclass(frozen=True)
class BoundParams:
    lipschitz_L: float
    sigma: float
    delta: float

    def __post_init__(self):
        if not (self.lipschitz_L >= 0 and math.isfinite(self.lipschitz_L)):
            raise ValueError("Lipschitz constant must be finite and non-negative")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0,1)")


@dataclass(frozen=True)
class LocalEvaluation:
    mu_hat: float | None
    kappa: float
    beta: float
    h_used: float

    @property
    def has_mass(self) -> bool:
        return self.kappa > 0


def as_arrays(samples: Iterable[Sample]) -> tuple[np.ndarray, np.ndarray]:
    samples = list(samples)
    xi = np.fromiter((s.xi for s in samples), dtype=float, count=len(samples))
    y = np.fromiter((s.y for s in samples), dtype=float, count=len(samples))
    return xi, y


def kernel_eval(v: float) -> float:
    return 1.0 if abs(v) <= 1.0 else 0.0


def _in_window(x: float, xi: np.ndarray, h: float) -> np.ndarray:
    return np.abs(x - np.asarray(xi, dtype=float)) <= h


def kappa(x: float, xi: Sequence[float] | np.ndarray, h: float) -> float:
    """Kernel mass at ``x``: the number of samples within distance ``h``."""
    return float(np.count_nonzero(_in_window(x, xi, h)))


def nw_estimate(x: float, xi, y, h: float) -> float | None:
    """Windowed mean of ``y`` around ``x``; ``None`` when the window is empty."""
    mask = _in_window(x, xi, h)
    if not mask.any():
        return None
    return float(np.mean(np.asarray(y, dtype=float)[mask]))


def alpha(kappa: float | np.ndarray, delta: float) -> float | np.ndarray:
    """Concentration term of the bound, natural logarithm throughout."""
    k = np.asarray(kappa, dtype=float)
    low = math.sqrt(math.log(SQRT2 / delta))
    with np.errstate(invalid="ignore", divide="ignore"):
        high = np.sqrt(k * np.log(np.sqrt(1.0 + k) / delta))
    out = np.where(k <= 1.0, low, high)
    if out.ndim == 0:
        return float(out)
    return out


_TERM_TABLES: dict[tuple[float, float], np.ndarray] = {}


def _alpha_scalar(k: int, delta: float) -> float:
    if k <= 1:
        return math.sqrt(math.log(SQRT2 / delta))
    return math.sqrt(k * math.log(math.sqrt(1.0 + k) / delta))


def noise_terms(n: int, sigma: float, delta: float) -> np.ndarray:
    """``2*sigma*alpha(k)/k`` for integer masses ``k = 0..n`` (``inf`` at 0).

    Box-kernel masses are integers, so every bound evaluation looks its noise
    term up here; scalar and vectorised callers then agree bit for bit.
    """
    key = (sigma, delta)
    table = _TERM_TABLES.get(key)
    if table is None or len(table) <= n:
        size = max(n + 1, 2 * (len(table) if table is not None else 0), 1024)
        vals = [math.inf] + [2.0 * sigma * _alpha_scalar(k, delta) / k for k in range(1, size)]
        table = np.array(vals)
        table.flags.writeable = False
        _TERM_TABLES[key] = table
    return table


def bound_from_mass(kappa, h, params: BoundParams):
    """``L*h + 2*sigma*alpha/kappa`` for integer masses, infinite where ``kappa == 0``."""
    k = np.asarray(kappa)
    ki = k.astype(np.int64)
    if np.any(ki != k) or np.any(ki < 0):
        raise ValueError("box-kernel masses must be non-negative integers")
    table = noise_terms(int(ki.max(initial=0)), params.sigma, params.delta)
    b = params.lipschitz_L * np.asarray(h, dtype=float) + table[ki]
    if b.ndim == 0:
        return float(b)
    return b


def beta_bound(x: float, xi, h: float, params: BoundParams) -> float:
    return bound_from_mass(kappa(x, xi, h), h, params)


def _breakpoint_search(x, xi, params, h_min, h_max):
    d = np.sort(np.abs(x - np.asarray(xi, dtype=float)))
    inside = d[(d >= h_min) & (d <= h_max)]
    cand = np.concatenate(([h_min], inside))
    counts = np.searchsorted(d, cand, side="right")
    betas = bound_from_mass(counts, cand, params)
    i = int(np.argmin(betas))  # first minimum: candidates ascend, so ties go to the smallest h
    return float(cand[i]), float(betas[i])


def _golden_search(x, xi, params, h_min, h_max, tol=1e-9, max_iter=200):
    xi = np.asarray(xi, dtype=float)

    def f(h):
        return beta_bound(x, xi, h, params)

    seen: dict[float, float] = {}

    def g(h):
        if h not in seen:
            seen[h] = f(h)
        return seen[h]

    a, b = h_min, h_max
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, b):
            break
        if g(c) <= g(d):
            b, d = d, c
            c = b - GOLDEN * (b - a)
        else:
            a, c = c, d
            d = a + GOLDEN * (b - a)
    g(h_min)
    g(h_max)
    h_best = min(seen, key=lambda h: (seen[h], h))
    return float(h_best), float(seen[h_best])


def optimize_bandwidth(x: float, xi, params: BoundParams, h_min: float, h_max: float,
                       search: str = "breakpoints") -> tuple[float, float]:
    """Bandwidth in ``[h_min, h_max]`` minimising the bound at ``x``.

    For the box kernel the mass is a right-continuous step function of ``h``
    that jumps at the sample distances, and the bound grows linearly in ``h``
    between jumps. The minimiser is therefore one of ``h_min`` or a sample
    distance inside the range, and ``"breakpoints"`` checks all of them.
    Ties resolve to the smallest ``h``. If no sample is within ``h_max`` the
    result is ``(h_min, inf)``.

    ``"golden"`` runs a golden section search instead. It is not exact here
    because the bound is not unimodal in ``h``.
    """
    if not (h_min > 0):
        raise InvalidRange(f"h_min must be positive, got {h_min}")
    if not (h_min < h_max):
        raise InvalidRange(f"need h_min < h_max, got [{h_min}, {h_max}]")
    if search == "breakpoints":
        return _breakpoint_search(x, xi, params, h_min, h_max)
    if search == "golden":
        h, b = _golden_search(x, xi, params, h_min, h_max)
        if math.isinf(b):
            return float(h_min), b
        return h, b
    raise ValueError(f"unknown bandwidth search {search!r}")


def evaluate(x: float, xi, y, kernel: KernelConfig, params: BoundParams) -> LocalEvaluation:
    if kernel.is_fixed:
        h = kernel.h
    else:
        h, _ = optimize_bandwidth(x, xi, params, kernel.h_min, kernel.h_max, kernel.search)
    k = kappa(x, xi, h)
    mu = nw_estimate(x, xi, y, h) if k > 0 else None
    return LocalEvaluation(mu_hat=mu, kappa=k, beta=bound_from_mass(k, h, params), h_used=float(h))


def _sorted_counts(d_sorted: np.ndarray) -> np.ndarray:
    """Per row, the number of entries <= each entry of an ascending array."""
    n = d_sorted.shape[1]
    idx = np.broadcast_to(np.arange(n), d_sorted.shape)
    group_end = np.ones(d_sorted.shape, dtype=bool)
    group_end[:, :-1] = d_sorted[:, :-1] != d_sorted[:, 1:]
    ends = np.where(group_end, idx, n)
    ends = np.minimum.accumulate(ends[:, ::-1], axis=1)[:, ::-1]
    return ends + 1


def optimize_bandwidth_many(xs, xi, params: BoundParams, h_min: float, h_max: float):
    """Breakpoint bandwidth search at several query points at once.

    Returns ``(h_star, beta_star)`` arrays matching :func:`optimize_bandwidth`.
    """
    if not (h_min > 0):
        raise InvalidRange(f"h_min must be positive, got {h_min}")
    if not (h_min < h_max):
        raise InvalidRange(f"need h_min < h_max, got [{h_min}, {h_max}]")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    xi = np.asarray(xi, dtype=float)
    if xi.size == 0:
        return np.full(xs.shape, float(h_min)), np.full(xs.shape, np.inf)
    d = np.sort(np.abs(xs[:, None] - xi[None, :]), axis=1)
    n = d.shape[1]
    if (d[:, 1:] == d[:, :-1]).any():
        counts = _sorted_counts(d)
    else:
        counts = np.broadcast_to(np.arange(1, n + 1), d.shape)
    table = noise_terms(n, params.sigma, params.delta)
    betas = params.lipschitz_L * d + table[counts]
    betas[(d < h_min) | (d > h_max)] = np.inf
    base = bound_from_mass(np.count_nonzero(d <= h_min, axis=1), h_min, params)
    rows = np.arange(len(xs))
    j = np.argmin(betas, axis=1)
    best = betas[rows, j]
    take_base = base <= best  # h_min is the smallest candidate, so it wins ties
    h_star = np.where(take_base, h_min, d[rows, j])
    beta_star = np.where(take_base, base, best)
    return h_star, beta_star


def evaluate_many(xs, xi, y, kernel: KernelConfig, params: BoundParams):
    """Vectorised :func:`evaluate`: ``(mu_hat, kappa, beta, h_used)`` arrays.

    ``mu_hat`` is NaN where the kernel mass is zero. Window means come from
    prefix sums over the argument-sorted samples, so they can differ from
    :func:`nw_estimate` in the last few bits.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    xi = np.asarray(xi, dtype=float)
    y = np.asarray(y, dtype=float)
    if kernel.is_fixed:
        h = np.full(xs.shape, float(kernel.h))
    elif kernel.search == "breakpoints":
        h, _ = optimize_bandwidth_many(xs, xi, params, kernel.h_min, kernel.h_max)
    else:
        h = np.array([optimize_bandwidth(x, xi, params, kernel.h_min, kernel.h_max, kernel.search)[0]
                      for x in xs])
    if xi.size == 0:
        return np.full(xs.shape, np.nan), np.zeros(xs.shape), np.full(xs.shape, np.inf), h
    # a closed window is a contiguous run of the argument-sorted samples
    order = np.argsort(xi, kind="stable")
    xi_sorted = xi[order]
    prefix = np.concatenate(([0.0], np.cumsum(y[order])))
    inside = np.abs(xs[:, None] - xi_sorted[None, :]) <= h[:, None]
    k = np.count_nonzero(inside, axis=1)
    lo = np.argmax(inside, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mu = np.where(k > 0, (prefix[lo + k] - prefix[lo]) / k, np.nan)
    return mu, k.astype(float), bound_from_mass(k, h, params), h
