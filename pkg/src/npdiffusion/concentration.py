"""Monte-Carlo checks of the probabilistic guarantees behind the bounds.

Three experiments:

* :func:`local_bound_coverage` - how often the local estimator misses the truth by
  more than its bound on a fixed design;
* :func:`selfnorm_violation_rate` - how often a weighted noise sum exceeds the
  self-normalised tail bound;
* :func:`martingale_mean` - the mean of the exponential supermartingale, which
  must not exceed one.

Trials run in fixed-size chunks, each with its own seed derived from the
master seed, so results do not depend on the number of workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import estimator as est
from .config import config_hash
from .errors import ZeroMass

CHUNK = 2000


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    standard_error: float
    replications: int
    count: int | None = None  # number of violations, for rate estimates

    def __float__(self) -> float:
        return self.value


def selfnorm_bound(V, sigma: float, delta: float):
    """``sqrt(2 sigma^2 log(sqrt(1+V)/delta) (1+V))``."""
    V = np.asarray(V, dtype=float)
    out = np.sqrt(2.0 * sigma**2 * np.log(np.sqrt(1.0 + V) / delta) * (1.0 + V))
    return float(out) if out.ndim == 0 else out


def _chunks(total: int):
    start = 0
    i = 0
    while start < total:
        n = min(CHUNK, total - start)
        yield i, n
        start += n
        i += 1


def _map_chunks(fn, total: int, seed: int, workers: int):
    tasks = [(np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,))), n)
             for i, n in _chunks(total)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda a: fn(*a), tasks))
    return [fn(*a) for a in tasks]


def _draw_noise(rng, shape, sigma: float, kind: str):
    if kind == "gaussian":
        return rng.normal(0.0, sigma, size=shape)
    if kind == "uniform":
        # width 2*sigma, so the Hoeffding proxy equals sigma
        return rng.uniform(-sigma, sigma, size=shape)
    raise ValueError(f"unknown noise kind {kind!r}")


def _rate(count: int, R: int) -> MonteCarloEstimate:
    p = count / R
    return MonteCarloEstimate(p, math.sqrt(p * (1.0 - p) / R), R, count)


def selfnorm_violation_rate(t: int, sigma: float, delta: float, v_dist: str = "uniform_unit",
                            replications: int = 10_000, seed: int = 0, noise: str = "gaussian",
                            workers: int = 1, noise_scale: float | None = None) -> MonteCarloEstimate:
    """Fraction of trials with ``|S_t|`` above the self-normalised bound.

    ``v_dist`` is ``"uniform_unit"`` (weights uniform on [0, 1]) or
    ``"kernel_weights"`` (box-kernel weights of a uniform design spanning
    twice the window, so about half the weights are one).

    The noise is drawn with scale ``noise_scale`` (default ``sigma``) while
    the bound uses ``sigma``. With equal scales the rate does not depend on
    ``sigma`` at all, since both sides of the comparison scale with it.
    """
    if t < 1:
        raise ValueError("t must be positive")
    if replications < 100:
        raise ValueError("need at least 100 replications")
    if v_dist not in ("uniform_unit", "kernel_weights"):
        raise ValueError(f"unknown weight distribution {v_dist!r}")
    scale = sigma if noise_scale is None else noise_scale

    def chunk(rng, n):
        if v_dist == "uniform_unit":
            v = rng.uniform(0.0, 1.0, size=(n, t))
        else:
            design = rng.uniform(-2.0, 2.0, size=(n, t))
            v = (np.abs(design) <= 1.0).astype(float)
        eta = _draw_noise(rng, (n, t), scale, noise)
        S = np.sum(v * eta, axis=1)
        V = np.sum(v * v, axis=1)
        return int(np.count_nonzero(np.abs(S) > selfnorm_bound(V, sigma, delta)))

    return _rate(sum(_map_chunks(chunk, replications, seed, workers)), replications)


def martingale_mean(t: int, lam: float, sigma: float, replications: int = 100_000, seed: int = 0,
                    noise: str = "gaussian", workers: int = 1) -> MonteCarloEstimate:
    """Sample mean of ``exp(sum(lam*eta_n*v_n/sigma - lam^2 v_n^2 / 2))`` with ``v_n ~ U[0,1]``."""
    if replications < 1000:
        raise ValueError("need at least 1000 replications")

    def chunk(rng, n):
        v = rng.uniform(0.0, 1.0, size=(n, t))
        eta = _draw_noise(rng, (n, t), sigma, noise)
        w = np.exp(np.sum(lam * eta * v / sigma - 0.5 * lam**2 * v * v, axis=1))
        return float(np.sum(w)), float(np.sum(w * w))

    parts = _map_chunks(chunk, replications, seed, workers)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    R = replications
    mean = s1 / R
    var = max(s2 / R - mean * mean, 0.0) * R / (R - 1)
    return MonteCarloEstimate(mean, math.sqrt(var / R), R)


def local_bound_coverage(x: float, design, h: float, phenomenon, sigma: float, delta: float,
                    replications: int = 5000, seed: int = 0, lipschitz_L: float = 1.0,
                    noise: str = "gaussian", h_range: tuple[float, float] | None = None,
                    workers: int = 1) -> MonteCarloEstimate:
    """Violation rate of the local bound at ``x`` on a fixed design.

    Each replication redraws only the noise. With ``h_range`` the bandwidth
    is the bound-minimising one in that range instead of ``h``; for the box
    kernel that choice depends on the design alone, not on the noise.
    """
    design = np.asarray(design, dtype=float)
    params = est.BoundParams(lipschitz_L, sigma, delta)
    if h_range is not None:
        h, _ = est.optimize_bandwidth(x, design, params, *h_range)
    mask = np.abs(x - design) <= h
    k = int(np.count_nonzero(mask))
    if k == 0:
        raise ZeroMass(f"no design point within {h} of {x}")
    beta = est.bound_from_mass(k, h, params)
    m_in = np.asarray(phenomenon(design[mask]), dtype=float)
    m_x = float(phenomenon(x))

    def chunk(rng, n):
        eta = _draw_noise(rng, (n, k), sigma, noise)
        mu = np.mean(m_in[None, :] + eta, axis=1)
        return int(np.count_nonzero(np.abs(mu - m_x) > beta))

    return _rate(sum(_map_chunks(chunk, replications, seed, workers)), replications)


def lab_row(test: str, parameters: dict, result: MonteCarloEstimate) -> tuple:
    """One CSV row: test, config hash, canonical parameters, rate, standard error."""
    return (test, config_hash(parameters), json.dumps(parameters, sort_keys=True),
            result.value, result.standard_error)
