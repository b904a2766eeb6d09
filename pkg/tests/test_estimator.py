import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npdiffusion import estimator as est
from npdiffusion.errors import InvalidRange
from npdiffusion.network import Phenomenon

mp.mp.dps = 40


def mp_alpha(k, delta):
    k, delta = mp.mpf(k), mp.mpf(delta)
    if k <= 1:
        return mp.sqrt(mp.log(mp.sqrt(2) / delta))
    return mp.sqrt(k * mp.log(mp.sqrt(1 + k) / delta))


def grid_min_beta(x, xi, params, h_min, h_max, n=10_000):
    hs = np.linspace(h_min, h_max, n)
    d = np.abs(x - np.asarray(xi))
    counts = np.count_nonzero(d[None, :] <= hs[:, None], axis=1)
    return float(np.min(est.bound_from_mass(counts, hs, params)))


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


# kernel and mass

@pytest.mark.parametrize("v,expected", [(0.0, 1.0), (1.0, 1.0), (-1.0, 1.0), (1.5, 0.0), (-1.0000001, 0.0)])
def test_kernel_eval(v, expected):
    assert est.kernel_eval(v) == expected


def test_kappa_examples():
    assert est.kappa(1.1, [1.0, 1.2, 3.0], 0.2) == 2.0
    assert est.kappa(5.0, [], 1.0) == 0.0
    assert est.kappa(1.0, [0.5, 1.0, 3.0], 1.0) == 2.0


@given(st.lists(finite, max_size=40), finite, st.floats(0.01, 50))
def test_kappa_counts_closed_window(xi, x, h):
    assert est.kappa(x, xi, h) == sum(1 for v in xi if abs(x - v) <= h)


@given(st.lists(finite, max_size=40), finite, st.floats(0.01, 20), st.floats(0.0, 20))
def test_kappa_monotone_in_h(xi, x, h, extra):
    assert est.kappa(x, xi, h) <= est.kappa(x, xi, h + extra)


def test_nw_estimate_examples():
    xi, y = est.as_arrays([est.Sample(1.0, 2.0), est.Sample(1.2, 4.0), est.Sample(3.0, 10.0)])
    assert est.nw_estimate(1.1, xi, y, 0.2) == 3.0
    assert est.nw_estimate(0.0, [10.0], [7.0], 0.5) is None


def test_nw_estimate_within_lipschitz_envelope():
    rng = np.random.default_rng(11)
    m = Phenomenon()
    xi = rng.uniform(1.5, 2.5, 50)
    y = m(xi)
    got = est.nw_estimate(2.0, xi, y, 0.5)
    # oracle: the brute-force mean of m over the in-window points
    inside = [m(float(v)) for v in xi if abs(2.0 - v) <= 0.5]
    assert got == pytest.approx(math.fsum(inside) / len(inside), rel=1e-14)
    assert abs(got - m(2.0)) <= 0.5


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=30), st.randoms(use_true_random=False))
def test_nw_estimate_permutation_invariant(pairs, rnd):
    xi, y = map(np.array, zip(*pairs))
    x, h = float(xi[0]), 1.0
    perm = list(range(len(xi)))
    rnd.shuffle(perm)
    a = est.nw_estimate(x, xi, y, h)
    b = est.nw_estimate(x, xi[perm], y[perm], h)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


# alpha and beta

def test_alpha_high_precision():
    assert est.alpha(1, 0.01) == pytest.approx(float(mp_alpha(1, "0.01")), rel=1e-15)
    assert est.alpha(1, 0.01) == pytest.approx(2.22525, abs=1e-5)
    assert est.alpha(4, 0.1) == pytest.approx(float(mp_alpha(4, "0.1")), rel=1e-15)
    assert est.alpha(4, 0.1) == pytest.approx(3.52551, abs=1e-5)


@given(st.floats(0.0, 1e5), st.floats(1e-6, 0.99))
def test_alpha_matches_mpmath(k, delta):
    assert est.alpha(k, delta) == pytest.approx(float(mp_alpha(k, delta)), rel=1e-12)


@given(st.floats(1e-6, 0.99))
def test_alpha_branches_meet_at_one(delta):
    low = math.sqrt(math.log(math.sqrt(2) / delta))
    high = math.sqrt(1.0 * math.log(math.sqrt(1.0 + 1.0) / delta))
    assert low == high == est.alpha(1.0, delta)


@given(st.floats(1.0, 1e4), st.floats(0.0, 1e3), st.floats(1e-6, 0.99))
def test_alpha_nondecreasing_above_one(k, dk, delta):
    assert est.alpha(k, delta) <= est.alpha(k + dk, delta)


def test_beta_closed_form():
    params = est.BoundParams(1.0, 0.3, 0.01)
    expected = mp.mpf("0.5") + 2 * mp.mpf("0.3") * mp_alpha(2, "0.01") / 2
    got = est.beta_bound(0.0, [0.1, -0.4], 0.5, params)
    assert got == pytest.approx(float(expected), rel=1e-14)


def test_beta_infinite_without_mass():
    assert est.beta_bound(0.0, [5.0], 0.5, est.BoundParams(1.0, 0.3, 0.01)) == math.inf
    assert est.beta_bound(0.0, [], 0.5, est.BoundParams(1.0, 0.3, 0.01)) == math.inf


def test_beta_noise_free_limit():
    b = est.beta_bound(0.0, [0.0, 0.1], 0.5, est.BoundParams(2.0, 1e-300, 0.01))
    assert b == pytest.approx(1.0, abs=1e-250)


@pytest.mark.parametrize("bad", [dict(lipschitz_L=-1, sigma=1, delta=0.1), dict(lipschitz_L=1, sigma=0, delta=0.1),
                                 dict(lipschitz_L=1, sigma=1, delta=1.0), dict(lipschitz_L=1, sigma=1, delta=0.0)])
def test_bound_params_validation(bad):
    with pytest.raises(ValueError):
        est.BoundParams(**bad)


def test_noise_table_matches_scalar_formula():
    t = est.noise_terms(500, 0.4, 0.02)
    assert t[0] == math.inf
    for k in (1, 2, 17, 500):
        assert t[k] == 2 * 0.4 * est.alpha(k, 0.02) / k


def test_bound_from_mass_rejects_fractions():
    with pytest.raises(ValueError):
        est.bound_from_mass(1.5, 0.1, est.BoundParams(1, 1, 0.1))


# bandwidth search

def test_optimize_single_sample():
    params = est.BoundParams(1.0, 0.3, 0.01)
    h, b = est.optimize_bandwidth(0.0, [0.3], params, 0.01, 1.0)
    assert h == 0.3
    assert b == est.beta_bound(0.0, [0.3], 0.3, params)


def test_optimize_nothing_in_range():
    h, b = est.optimize_bandwidth(0.0, [5.0], est.BoundParams(1, 1, 0.1), 0.01, 1.0)
    assert (h, b) == (0.01, math.inf)
    assert est.optimize_bandwidth(0.0, [], est.BoundParams(1, 1, 0.1), 0.01, 1.0) == (0.01, math.inf)


@pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (2.0, 1.0), (0.0, 1.0)])
def test_optimize_invalid_range(lo, hi):
    with pytest.raises(InvalidRange):
        est.optimize_bandwidth(0.0, [0.1], est.BoundParams(1, 1, 0.1), lo, hi)
    with pytest.raises(InvalidRange):
        est.optimize_bandwidth_many([0.0], [0.1], est.BoundParams(1, 1, 0.1), lo, hi)


def test_optimize_ties_go_to_smallest_h():
    # L = 0 and two samples at the same distance: both candidates hold kappa 2
    params = est.BoundParams(0.0, 1.0, 0.1)
    h, _ = est.optimize_bandwidth(0.0, [-0.5, 0.5, 3.0], params, 0.5, 1.0)
    assert h == 0.5


def test_optimize_against_dense_grid():
    rng = np.random.default_rng(5)
    for _ in range(20):
        xi = rng.uniform(0, 10, 100)
        x = float(rng.uniform(0, 10))
        params = est.BoundParams(1.0, float(rng.uniform(0.05, 0.7)), 0.01)
        _, b = est.optimize_bandwidth(x, xi, params, 0.001, 5.0)
        assert b <= grid_min_beta(x, xi, params, 0.001, 5.0)


def test_golden_search_never_beats_breakpoints():
    rng = np.random.default_rng(6)
    for _ in range(20):
        xi = rng.uniform(0, 10, 60)
        x = float(rng.uniform(0, 10))
        params = est.BoundParams(1.0, 0.3, 0.01)
        _, exact = est.optimize_bandwidth(x, xi, params, 0.001, 5.0)
        h, approx = est.optimize_bandwidth(x, xi, params, 0.001, 5.0, search="golden")
        assert exact <= approx
        assert approx == est.beta_bound(x, xi, h, params)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=0, max_size=60), st.lists(st.floats(0, 10), min_size=1, max_size=15),
       st.floats(0.01, 1.0), st.floats(0.001, 0.2))
def test_vectorised_search_matches_scalar(xi, xs, sigma, delta):
    params = est.BoundParams(1.0, sigma, delta)
    # rounding to a coarse grid creates many tied distances
    xi = np.round(np.asarray(xi, dtype=float), 1)
    h_many, b_many = est.optimize_bandwidth_many(xs, xi, params, 0.001, 5.0)
    for x, h, b in zip(xs, h_many, b_many):
        assert (h, b) == est.optimize_bandwidth(x, xi, params, 0.001, 5.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(-5, 5)), max_size=50),
       st.lists(st.floats(0, 10), min_size=1, max_size=10), st.booleans())
def test_evaluate_many_matches_evaluate(pairs, xs, fixed):
    xi = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    kernel = est.KernelConfig.fixed(0.7) if fixed else est.KernelConfig.per_query(0.01, 3.0)
    params = est.BoundParams(1.0, 0.2, 0.05)
    mu, k, beta, h = est.evaluate_many(xs, xi, y, kernel, params)
    for i, x in enumerate(xs):
        ev = est.evaluate(x, xi, y, kernel, params)
        assert (k[i], beta[i], h[i]) == (ev.kappa, ev.beta, ev.h_used)
        if ev.mu_hat is None:
            assert math.isnan(mu[i])
        else:
            assert mu[i] == pytest.approx(ev.mu_hat, rel=1e-9, abs=1e-9)


# evaluate

def test_evaluate_fixed_is_composition():
    xi, y = [0.1, 0.4, 2.0], [1.0, 2.0, 3.0]
    params = est.BoundParams(1.0, 0.3, 0.01)
    ev = est.evaluate(0.2, xi, y, est.KernelConfig.fixed(0.3), params)
    assert ev.mu_hat == est.nw_estimate(0.2, xi, y, 0.3)
    assert ev.beta == est.beta_bound(0.2, xi, 0.3, params)
    assert ev.kappa == 2.0 and ev.h_used == 0.3


def test_evaluate_empty():
    params = est.BoundParams(1.0, 0.3, 0.01)
    ev = est.evaluate(0.0, [], [], est.KernelConfig.per_query(0.01, 1.0), params)
    assert ev == est.LocalEvaluation(None, 0.0, math.inf, 0.01)
    ev = est.evaluate(0.0, [], [], est.KernelConfig.fixed(0.2), params)
    assert ev == est.LocalEvaluation(None, 0.0, math.inf, 0.2)
    assert not ev.has_mass


def test_per_query_beats_every_fixed_bandwidth():
    rng = np.random.default_rng(9)
    xi = rng.uniform(0, 10, 80)
    y = rng.normal(size=80)
    params = est.BoundParams(1.0, 0.4, 0.01)
    for x in (0.0, 3.3, 9.9):
        best = est.evaluate(x, xi, y, est.KernelConfig.per_query(0.05, 4.0), params).beta
        for h in np.linspace(0.05, 4.0, 2000):
            assert best <= est.evaluate(x, xi, y, est.KernelConfig.fixed(float(h)), params).beta


@given(st.lists(st.floats(-10, 10), max_size=30), finite)
def test_mass_and_estimate_absent_together(xi, x):
    ev = est.evaluate(x, xi, [0.0] * len(xi), est.KernelConfig.fixed(0.5), est.BoundParams(1, 1, 0.1))
    assert (ev.mu_hat is None) == (ev.kappa == 0) == math.isinf(ev.beta)


@pytest.mark.parametrize("kw", [dict(h=0.0), dict(h=-1.0), dict(h_min=1.0, h_max=1.0), dict(h_min=0.0, h_max=1.0),
                                dict(h=1.0, h_min=0.1, h_max=2.0), dict(h_min=0.1, h_max=1.0, search="grid"),
                                dict(h=1.0, kind="gaussian")])
def test_kernel_config_validation(kw):
    with pytest.raises(ValueError):
        est.KernelConfig(**kw)


def test_sample_rejects_non_finite():
    with pytest.raises(ValueError):
        est.Sample(math.nan, 1.0)
