import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bsc, eps_values, joints
from pipriv.audit import Flavor, ip_delta, strong_ip_delta
from pipriv.convert import (
    chi2_tail,
    chi2_to_ip,
    fdiv_to_ip,
    ip_to_tv,
    kl_to_ip,
    strong_fdiv_to_strong_ip,
    strong_ip_to_dp,
    tv_to_ip,
    zeta,
    zeta_constraint,
)
from pipriv.dist import product_of_marginals
from pipriv.divergence import fdiv_privacy_leakage, strong_fdiv_leakage, total_variation
from pipriv.errors import AlphaOutOfRange, NotAbsolutelyContinuous

etas = st.floats(0.0, 2.0)


def _zeta_oracle(eta, eps, n=200_001):
    # dense scan of the constraint; returns the largest feasible grid point
    gamma = math.exp(eps)
    hi = 1.0 if gamma > 1 else gamma
    p = np.linspace(0.0, hi, n)[:-1] if gamma < 1 else np.linspace(0.0, 1.0, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(p >= 1, 0.0, (1 - p) * np.log((1 - p) / (gamma - p)))
    ok = f <= eta - eps
    return p[ok].max()


def test_tv_conversion_values():
    assert tv_to_ip(0.0, 0.7).delta == 0.0
    assert tv_to_ip(0.1, 1.0).delta == pytest.approx(0.15820, abs=1e-5)
    r = tv_to_ip(0.6, 0.5)
    assert r.vacuous and r.delta == 1.0 and r.raw == pytest.approx(1.525, abs=1e-3)


def test_zeta_values():
    assert zeta(0.5, 0.3) == 1.0
    assert 0.22 <= zeta(0.1, 1.0) <= 0.24
    assert 0.10 <= zeta(0.1, -1.0) <= 0.11
    for eta, eps in [(0.1, 1.0), (0.1, -1.0), (0.02, 0.5), (0.3, -2.0)]:
        assert zeta(eta, eps) == pytest.approx(_zeta_oracle(eta, eps), abs=2e-5)


def test_zeta_residual_at_root():
    for eta, eps in [(0.1, 1.0), (0.1, -1.0), (0.01, 0.2), (0.5, -0.4), (1e-4, 3.0)]:
        p = zeta(eta, eps)
        boundary = p in (0.0, 1.0) or abs(p - math.exp(eps)) < 1e-12
        assert boundary or abs(zeta_constraint(p, eps) - (eta - eps)) < 1e-9


def test_kl_conversion_values():
    r = kl_to_ip(0.1, 1.0)
    assert 0.32 <= r.delta <= 0.35
    assert kl_to_ip(0.5, 0.3).vacuous
    assert kl_to_ip(0.0, 0.5).delta < 1.0


def test_chi2_conversion_values():
    assert chi2_to_ip(0.0, 0.4).delta == 0.0
    assert chi2_to_ip(0.1, 1.0).delta == pytest.approx(0.16269, abs=1e-4)
    assert chi2_to_ip(0.36, 1.0).delta == pytest.approx(0.46979, abs=1e-4)


def test_strong_conversion_values():
    assert strong_fdiv_to_strong_ip(0.0, 0.4, 5, "tv").delta == 0.0
    assert strong_fdiv_to_strong_ip(0.1, 1.0, 2, "chi2").delta == pytest.approx(0.32537, abs=1e-4)
    assert strong_fdiv_to_strong_ip(0.3, 0.5, 4, "tv").vacuous


def test_strong_ip_to_dp_values():
    b = strong_ip_to_dp(0.7, 0.0, 0.3)
    assert b.flavor is Flavor.DP and b.eps == 1.4 and b.delta == 0.0
    b = strong_ip_to_dp(0.5, 0.02, 0.4)
    assert b.eps == pytest.approx(1.0) and b.delta == pytest.approx(0.05)
    with pytest.raises(AlphaOutOfRange):
        strong_ip_to_dp(0.5, 0.02, 0.0)


def test_ip_to_tv_values():
    assert ip_to_tv(1e-12, 0.0) == pytest.approx(0.0, abs=1e-11)
    assert ip_to_tv(0.1, 0.05) == pytest.approx(0.31034, abs=1e-4)
    assert ip_to_tv(1.0, 0.5) == 2.0


def test_conversion_accepts_budget_objects():
    b = fdiv_privacy_leakage(bsc(), "chi2")
    assert fdiv_to_ip(b, 1.0).delta == chi2_to_ip(0.36, 1.0).delta or \
        fdiv_to_ip(b, 1.0).delta == pytest.approx(chi2_to_ip(0.36, 1.0).delta)


def test_chi2_tail_shape():
    for eta in (0.05, 0.3, 1.0, 4.0):
        peak = math.sqrt(1 + eta)
        up = np.linspace(0.0, peak, 400)
        down = np.linspace(peak, 10.0, 400)
        assert np.all(np.diff([chi2_tail(g, eta) for g in up]) >= -1e-15)
        assert np.all(np.diff([chi2_tail(g, eta) for g in down]) <= 1e-15)
        for g in np.linspace(1.0, 1.0 + eta, 50):
            assert chi2_tail(g, eta) >= 1.0 - 1e-12


@settings(max_examples=200, deadline=None)
@given(etas, st.sampled_from(["tv", "kl", "chi2"]))
def test_delta_decreases_with_eps(eta, kind):
    d = [fdiv_to_ip(eta, e, kind).delta for e in np.linspace(0.02, 5.0, 120)]
    assert np.all(np.diff(d) <= 1e-12)


@settings(max_examples=200, deadline=None)
@given(eps_values, st.sampled_from(["tv", "kl", "chi2"]))
def test_delta_increases_with_eta(eps, kind):
    d = [fdiv_to_ip(eta, eps, kind).delta for eta in np.linspace(0.0, 3.0, 120)]
    assert np.all(np.diff(d) >= -1e-12)


@settings(max_examples=300, deadline=None)
@given(joints(max_dim=6), eps_values)
def test_divergence_bounds_are_sound(j, eps):
    oracle = ip_delta(j, eps)
    for kind in ("tv", "kl", "chi2"):
        assert oracle <= fdiv_to_ip(fdiv_privacy_leakage(j, kind), eps).delta + 1e-10


@settings(max_examples=300, deadline=None)
@given(joints(max_dim=6), eps_values)
def test_strong_bounds_are_sound(j, eps):
    oracle = strong_ip_delta(j, eps)
    for kind in ("tv", "kl", "chi2"):
        try:
            eta = strong_fdiv_leakage(j, kind)
        except NotAbsolutelyContinuous:
            continue
        assert oracle <= strong_fdiv_to_strong_ip(eta, eps, j.shape[0]).delta + 1e-10


@settings(max_examples=300, deadline=None)
@given(joints(max_dim=6), eps_values)
def test_tv_upper_bound_is_sound(j, eps):
    assert total_variation(j, product_of_marginals(j)) <= ip_to_tv(eps, ip_delta(j, eps)) + 1e-10
