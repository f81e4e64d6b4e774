import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipriv.convert import chi2_to_ip
from pipriv.errors import BadBudget, NonPositiveReference
from pipriv.gaussian import (
    GaussianMechanism,
    calibrate_sigma,
    dp_to_weak_dp_curve,
    gaussian_chi2,
    mixture_chi2_to_component,
    mixture_logpdf,
    normal_logpdf,
    offset_grid,
    quad_chi2,
)

S2 = 2 * math.log(25)  # calibrated variance at gap 1, eps 1, delta 0.05
EPS_SWEEP = np.round(np.arange(1, 13) * 0.1, 10)


def _span(mech):
    lo, hi = min(mech.mu0, mech.mu1), max(mech.mu0, mech.mu1)
    return lo - 40 * mech.sigma, hi + 40 * mech.sigma


def test_calibration():
    assert calibrate_sigma(1.0, 1.0, 0.05) == pytest.approx(6.43775, abs=1e-5)
    assert calibrate_sigma(2.0, 0.7, 0.1) == pytest.approx(4 * calibrate_sigma(1.0, 0.7, 0.1))
    with pytest.raises(BadBudget):
        calibrate_sigma(0.0, 1.0, 0.05)
    with pytest.raises(BadBudget):
        calibrate_sigma(1.0, 0.0, 0.05)
    with pytest.raises(BadBudget):
        calibrate_sigma(1.0, 1.0, 1.0)


def test_closed_form_chi2_against_quadrature():
    assert gaussian_chi2(0.3, 0.3, 2.0) == 0.0
    assert gaussian_chi2(0, 1, S2) == pytest.approx(0.16804, abs=1e-4)
    assert gaussian_chi2(0, 1, 1.0) == pytest.approx(math.e - 1, abs=1e-12)
    for mu1, s2 in [(1.0, S2), (1.0, 1.0), (2.5, 3.0)]:
        sd = math.sqrt(s2)
        q = quad_chi2(normal_logpdf(0, s2), normal_logpdf(mu1, s2), (-40 * sd, mu1 + 40 * sd))
        assert q == pytest.approx(gaussian_chi2(0, mu1, s2), abs=1e-8)


def test_quadrature_values():
    assert quad_chi2(normal_logpdf(0, 1), normal_logpdf(0, 1), (-40, 40)) == pytest.approx(0, abs=1e-8)
    q = quad_chi2(normal_logpdf(0, 1), normal_logpdf(1, 1), (-40, 41), 100_000)
    assert q == pytest.approx(math.e - 1, abs=1e-6)
    with pytest.raises(NonPositiveReference):
        quad_chi2(normal_logpdf(0, 1), lambda x: np.where(x > 0, 0.0, -np.inf), (-1, 1))


def test_mixture_identity_values():
    m = GaussianMechanism(0, 1, S2)
    a, b = mixture_chi2_to_component(m)
    assert a == pytest.approx(0.04201, abs=1e-4) and b == pytest.approx(a)
    assert mixture_chi2_to_component(GaussianMechanism(1, 1, 2.0, (0.3, 0.7))) == (0.0, 0.0)
    t = 1e-4
    a, b = mixture_chi2_to_component(GaussianMechanism(0, 1, 1.0, (1 - t, t)))
    assert a == pytest.approx(t * t * (math.e - 1))
    assert b == pytest.approx((1 - t) ** 2 * (math.e - 1))


@pytest.mark.parametrize("prior0", [0.5, 0.7, 0.9, 0.97])
@pytest.mark.parametrize("s2", [0.5, 1.0, S2, 20.0])
def test_mixture_identity_against_quadrature(prior0, s2):
    m = GaussianMechanism(0.0, 1.0, s2, (prior0, 1 - prior0))
    p0, p1 = normal_logpdf(0.0, s2), normal_logpdf(1.0, s2)
    py = mixture_logpdf(m.prior, [p0, p1])
    a, b = mixture_chi2_to_component(m)
    assert quad_chi2(py, p0, _span(m)) == pytest.approx(a, abs=1e-6)
    assert quad_chi2(py, p1, _span(m)) == pytest.approx(b, abs=1e-6)


def test_curve_construction():
    grid = offset_grid(EPS_SWEEP)
    pts = dp_to_weak_dp_curve(0.5, 0.05, (0.7, 0.3), grid)
    m = GaussianMechanism.calibrated(0.5, 0.05, (0.7, 0.3))
    eta = max(mixture_chi2_to_component(m))
    for e, pt in zip(grid, pts):
        assert pt.eps_prime == pytest.approx(2 * e)
        assert pt.delta_prime == pytest.approx(min(1.0, 2 * chi2_to_ip(eta, e).delta / 0.3))
    with pytest.raises(ValueError):
        dp_to_weak_dp_curve(0.5, 0.05, (0.5, 0.5), [])


def test_offset_grid():
    np.testing.assert_allclose(offset_grid([0.1, 0.3, 0.2]), [0.15, 0.25, 0.35])
    with pytest.raises(ValueError):
        offset_grid([])


def test_curve_does_not_depend_on_mean_gap():
    a = dp_to_weak_dp_curve(0.4, 0.1, (0.6, 0.4), [0.3, 0.6], delta_mu=1.0)
    b = dp_to_weak_dp_curve(0.4, 0.1, (0.6, 0.4), [0.3, 0.6], delta_mu=7.0)
    for p, q in zip(a, b):
        assert p.delta_prime == pytest.approx(q.delta_prime, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(0.01, 0.5), st.floats(0.5, 0.95))
def test_curve_is_non_increasing(eps, delta, prior0):
    pts = dp_to_weak_dp_curve(eps, delta, (prior0, 1 - prior0), np.linspace(0.05, 3, 60))
    d = [p.delta_prime for p in pts]
    assert all(0 <= v <= 1 for v in d)
    assert np.all(np.diff(d) <= 1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.2), st.floats(0.01, 0.2), st.floats(0.0, 0.5), st.floats(0.0, 0.2), st.floats(0.5, 0.9))
def test_tighter_baseline_and_balanced_prior_dominate(eps, delta, d_eps, d_delta, prior0):
    grid = np.linspace(0.05, 3, 30)
    p = (prior0, 1 - prior0)
    tight = dp_to_weak_dp_curve(eps, delta, p, grid)
    loose = dp_to_weak_dp_curve(eps + d_eps, min(delta + d_delta, 0.99), p, grid)
    skew = dp_to_weak_dp_curve(eps, delta, (prior0 + 0.5 * (1 - prior0), 0.5 * (1 - prior0)), grid)
    for a, b, c in zip(tight, loose, skew):
        assert a.delta_prime <= b.delta_prime + 1e-15
        assert a.delta_prime <= c.delta_prime + 1e-15
