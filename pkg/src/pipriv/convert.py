"""Convert divergence budgets into probabilistic IP and DP guarantees, and back.

Every converter returns the clamped delta together with the raw formula value,
so callers can tell a meaningful guarantee from a vacuous one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import kernels as _kernels
from .audit import Flavor, PrivacyBudget
from .divergence import DivergenceBudget, DivergenceKind
from .errors import AlphaOutOfRange

__all__ = [
    "ConversionResult",
    "tv_to_ip",
    "zeta",
    "zeta_constraint",
    "kl_to_ip",
    "chi2_tail",
    "chi2_to_ip",
    "fdiv_to_ip",
    "strong_fdiv_to_strong_ip",
    "strong_ip_to_dp",
    "ip_to_tv",
]


@dataclass(frozen=True)
class ConversionResult:
    eps: float
    delta: float
    vacuous: bool
    raw: float

    @classmethod
    def clamp(cls, eps: float, raw: float) -> "ConversionResult":
        return cls(float(eps), float(min(max(raw, 0.0), 1.0)), bool(raw >= 1.0), float(raw))


def _check(eta, eps):
    if not eta >= 0:
        raise ValueError("eta must be non-negative")
    if not eps > 0:
        raise ValueError("eps must be positive")


def tv_to_ip(eta: float, eps: float) -> ConversionResult:
    """``delta = eta / (1 - e^-eps)`` for an unhalved TV budget."""
    _check(eta, eps)
    return ConversionResult.clamp(eps, eta / -math.expm1(-eps))


def zeta_constraint(p: float, eps_signed: float) -> float:
    """``(1 - p) log((1 - p) / (e^eps - p))``, non-decreasing in p."""
    gamma = math.exp(eps_signed)
    if p >= 1.0:
        return 0.0
    if p >= gamma:
        return math.inf
    return (1.0 - p) * math.log((1.0 - p) / (gamma - p))


def zeta(eta: float, eps_signed: float) -> float:
    """Supremum of ``p`` in ``[0, 1]`` with ``zeta_constraint(p, eps) <= eta - eps``."""
    if not eta >= 0:
        raise ValueError("eta must be non-negative")
    if eps_signed == 0.0:
        return 1.0
    return float(_kernels.zeta(float(eta), float(eps_signed)))


def kl_to_ip(eta: float, eps: float) -> ConversionResult:
    """``delta = zeta(eps) + zeta(-eps)`` for a KL (mutual information) budget."""
    _check(eta, eps)
    return ConversionResult.clamp(eps, zeta(eta, eps) + zeta(eta, -eps))


def chi2_tail(gamma: float, eta: float) -> float:
    """``g(gamma, eta) = gamma eta / ((gamma - 1)^2 + eta)``.

    Worst-case mass of the event ``{d > gamma}`` (or ``{d < gamma}`` when
    gamma < 1) under a chi-square budget eta.
    """
    if math.isinf(eta):
        return gamma
    denom = (gamma - 1.0) ** 2 + eta
    if denom == 0.0:
        return 0.0
    return gamma * eta / denom


def chi2_to_ip(eta: float, eps: float) -> ConversionResult:
    _check(eta, eps)
    return ConversionResult.clamp(eps, chi2_tail(math.exp(-eps), eta) + chi2_tail(math.exp(eps), eta))


_CONVERTERS = {DivergenceKind.TV: tv_to_ip, DivergenceKind.KL: kl_to_ip, DivergenceKind.CHI2: chi2_to_ip}


def fdiv_to_ip(eta, eps: float, kind=None) -> ConversionResult:
    """Dispatch on the divergence kind; ``eta`` may be a :class:`DivergenceBudget`."""
    if isinstance(eta, DivergenceBudget):
        kind, eta = eta.kind, eta.eta
    return _CONVERTERS[DivergenceKind.parse(kind)](eta, eps)


def strong_fdiv_to_strong_ip(eta, eps: float, s_cardinality: int, kind=None) -> ConversionResult:
    """A strong per-s budget gives strong IP with delta scaled by ``|S|``.

    ``eta`` must bound ``max_s D(p_Y || p_{Y|S=s})``, with the conditional as
    the reference measure.
    """
    if s_cardinality < 1:
        raise ValueError("s_cardinality must be at least 1")
    base = fdiv_to_ip(eta, eps, kind)
    return ConversionResult.clamp(eps, s_cardinality * base.raw)


def strong_ip_to_dp(eps: float, delta: float, alpha: float) -> PrivacyBudget:
    """Strong (eps, delta)-IP implies (2 eps, delta / alpha)-DP, alpha the smallest prior."""
    if not 0.0 < alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1], got {alpha!r}")
    if not eps >= 0 or not 0.0 <= delta <= 1.0:
        raise ValueError("need eps >= 0 and delta in [0, 1]")
    return PrivacyBudget(2.0 * eps, min(1.0, delta / alpha), Flavor.DP)


def ip_to_tv(eps: float, delta: float) -> float:
    """Upper bound ``2 (e^eps - 1 + delta)`` on the unhalved TV leakage, clamped to 2."""
    if not eps >= 0 or not 0.0 <= delta <= 1.0:
        raise ValueError("need eps >= 0 and delta in [0, 1]")
    return float(min(2.0, 2.0 * (math.expm1(eps) + delta)))
