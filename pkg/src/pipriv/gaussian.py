"""Binary-S Gaussian mechanism: calibration, closed-form chi-square and the
DP -> chi-square -> strong IP -> DP curve.

A DP-calibrated Gaussian mechanism is re-analysed through its chi-square
leakage. The resulting (eps', delta') curve shows how much of the original
guarantee survives the round trip for a given prior on S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .convert import chi2_to_ip, strong_fdiv_to_strong_ip, strong_ip_to_dp
from .divergence import DivergenceKind
from .errors import BadBudget, NonPositiveReference

__all__ = [
    "GaussianMechanism",
    "DpCurvePoint",
    "calibrate_sigma",
    "gaussian_chi2",
    "mixture_chi2_to_component",
    "dp_to_weak_dp_curve",
    "offset_grid",
    "normal_logpdf",
    "mixture_logpdf",
    "quad_chi2",
]

QUAD_SPAN = 40.0
QUAD_PANELS = 100_000


def _check_prior(prior) -> tuple[float, float]:
    p0, p1 = (float(v) for v in prior)
    if not (p0 > 0 and p1 > 0) or abs(p0 + p1 - 1.0) > 1e-9:
        raise ValueError(f"prior must be two positive numbers summing to 1, got {prior!r}")
    return p0 / (p0 + p1), p1 / (p0 + p1)


@dataclass(frozen=True)
class GaussianMechanism:
    """``Y | S = s_i ~ N(mu_i, sigma2)`` with prior ``(P(s_0), P(s_1))``."""

    mu0: float
    mu1: float
    sigma2: float
    prior: tuple = (0.5, 0.5)

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "prior", _check_prior(self.prior))

    @classmethod
    def calibrated(cls, eps: float, delta: float, prior=(0.5, 0.5), mu0: float = 0.0, mu1: float = 1.0):
        return cls(mu0, mu1, calibrate_sigma(mu1 - mu0, eps, delta), prior)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class DpCurvePoint:
    eps_prime: float
    delta_prime: float


def calibrate_sigma(delta_mu: float, eps: float, delta: float) -> float:
    """Classical noise variance ``2 Delta^2 log(1.25 / delta) / eps^2``."""
    if not eps > 0:
        raise BadBudget("eps must be positive")
    if not 0.0 < delta < 1.0:
        raise BadBudget("delta must lie in (0, 1)")
    if not delta_mu != 0 or not math.isfinite(delta_mu):
        raise BadBudget("mean gap must be a nonzero finite number")
    return 2.0 * delta_mu**2 / eps**2 * math.log(1.25 / delta)


def gaussian_chi2(mu0: float, mu1: float, sigma2: float) -> float:
    """``chi2(N(mu0, s2) || N(mu1, s2)) = exp((mu0 - mu1)^2 / s2) - 1``."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return math.expm1((mu0 - mu1) ** 2 / sigma2)


def mixture_chi2_to_component(mech: GaussianMechanism) -> tuple[float, float]:
    """``(chi2(p_Y || p_{Y|s0}), chi2(p_Y || p_{Y|s1}))``.

    Uses ``p_Y - p_0 = pi_1 (p_1 - p_0)``, so each equals the squared weight
    of the other component times the component chi-square.
    """
    c = gaussian_chi2(mech.mu0, mech.mu1, mech.sigma2)
    p0, p1 = mech.prior
    return p1 * p1 * c, p0 * p0 * c


def offset_grid(eps_values: Sequence[float], offset: float = 0.05) -> np.ndarray:
    """IP grid ``eps + offset`` for each swept baseline eps, sorted and shared by all curves."""
    if not offset >= 0:
        raise ValueError("offset must be non-negative")
    grid = np.unique(np.asarray(eps_values, dtype=float) + offset)
    if grid.size == 0:
        raise ValueError("empty eps grid")
    return grid


def dp_to_weak_dp_curve(eps: float, delta: float, prior, eps_ip_grid, delta_mu: float = 1.0) -> list[DpCurvePoint]:
    """Round-trip a DP-calibrated mechanism through chi-square leakage.

    For each ``eps_ip``: strong chi-square leakage -> strong IP with delta scaled
    by ``|S| = 2`` -> ``(2 eps_ip, delta_strong / min prior)``-DP.
    """
    grid = np.atleast_1d(np.asarray(eps_ip_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty eps_ip grid")
    mech = GaussianMechanism.calibrated(eps, delta, prior, 0.0, float(delta_mu))
    eta = max(mixture_chi2_to_component(mech))
    alpha = min(mech.prior)
    points = []
    for e in grid:
        strong = strong_fdiv_to_strong_ip(eta, float(e), 2, DivergenceKind.CHI2)
        dp = strong_ip_to_dp(float(e), strong.delta, alpha)
        points.append(DpCurvePoint(dp.eps, dp.delta))
    return points


def normal_logpdf(mu: float, sigma2: float) -> Callable[[np.ndarray], np.ndarray]:
    c = -0.5 * math.log(2.0 * math.pi * sigma2)
    return lambda x: c - (np.asarray(x) - mu) ** 2 / (2.0 * sigma2)


def mixture_logpdf(weights, logpdfs) -> Callable[[np.ndarray], np.ndarray]:
    logw = np.log(np.asarray(weights, dtype=float))

    def f(x):
        return np.logaddexp.reduce(np.stack([lw + lp(x) for lw, lp in zip(logw, logpdfs)]), axis=0)

    return f


def quad_chi2(logpdf_p, logpdf_q, support_interval, n_points: int = QUAD_PANELS) -> float:
    """Composite-Simpson estimate of ``int p^2 / q - 1``.

    Densities are given on the log scale so the integrand ``exp(2 log p - log q)``
    stays finite far into the tails.
    """
    a, b = (float(v) for v in support_interval)
    if not b > a:
        raise ValueError("support interval must have positive length")
    n = int(n_points) + (int(n_points) % 2)
    x = np.linspace(a, b, n + 1)
    lq = np.asarray(logpdf_q(x), dtype=float)
    if not np.all(np.isfinite(lq)):
        raise NonPositiveReference("reference density vanishes on the interval")
    f = np.exp(2.0 * np.asarray(logpdf_p(x), dtype=float) - lq)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (3.0 * n) * (w @ f) - 1.0)
