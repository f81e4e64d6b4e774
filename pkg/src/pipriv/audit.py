"""Brute-force privacy audits of finite joints.

Exact minimal delta for (eps, delta)-IP, strong IP and DP, together with the
detection and estimation error lower bounds that IP guarantees and the
oracles (MAP error, MMSE) they are checked against.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _kernels
from .dist import FiniteJoint, Pmf, disparity_matrix
from .errors import MomentInconsistent, NonNumericLabels

__all__ = [
    "Flavor",
    "PrivacyBudget",
    "TailEvents",
    "tail_events",
    "ip_delta",
    "strong_ip_delta",
    "ip_delta_grid",
    "dp_delta",
    "detection_error_bound",
    "bayes_error",
    "estimation_error_bound",
    "s_moments",
    "mmse_oracle",
]


class Flavor(enum.Enum):
    IP = "ip"
    STRONG_IP = "strong_ip"
    DP = "dp"


@dataclass(frozen=True)
class PrivacyBudget:
    eps: float
    delta: float
    flavor: Flavor

    def __post_init__(self):
        if not self.eps >= 0:
            raise ValueError("eps must be non-negative")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")


@dataclass(frozen=True)
class TailEvents:
    """Cells where the disparity leaves ``[e^-eps, e^eps]`` (below: L, above: R)."""

    cells_L: frozenset
    cells_R: frozenset
    mass_L: float
    mass_R: float


def _check_eps(eps):
    if not eps > 0:
        raise ValueError("eps must be positive")


def tail_events(joint: FiniteJoint, eps: float) -> TailEvents:
    _check_eps(eps)
    d = disparity_matrix(joint)
    ok = ~np.isnan(d)
    low = ok & (d < math.exp(-eps))
    high = ok & (d > math.exp(eps))
    cells_l = frozenset(zip(*map(lambda a: a.tolist(), np.nonzero(low))))
    cells_r = frozenset(zip(*map(lambda a: a.tolist(), np.nonzero(high))))
    return TailEvents(cells_l, cells_r, float(joint.matrix[low].sum()), float(joint.matrix[high].sum()))


def ip_delta_grid(joint: FiniteJoint, eps_grid) -> tuple[np.ndarray, np.ndarray]:
    """Exact minimal delta for IP and for strong IP at each eps of the grid."""
    eps_grid = np.atleast_1d(np.asarray(eps_grid, dtype=float))
    if np.any(~(eps_grid > 0)):
        raise ValueError("eps must be positive")
    d = disparity_matrix(joint)
    ok = joint.p_y > 0
    d = np.where(np.isnan(d), 1.0, d)
    ip, strong = _kernels.tail_delta_grid(d, joint.matrix, ok.astype(np.uint8), eps_grid)
    return np.minimum(ip, 1.0), np.minimum(strong, 1.0)


def ip_delta(joint: FiniteJoint, eps: float) -> float:
    """Smallest delta for which the joint is (eps, delta)-IP: ``P(L u R)``."""
    _check_eps(eps)
    return float(ip_delta_grid(joint, [eps])[0][0])


def strong_ip_delta(joint: FiniteJoint, eps: float) -> float:
    """Smallest delta for strong (eps, delta)-IP.

    Output mass of every ``y`` at which any ``s`` has disparity outside the
    band: the probability of ``Y^{-1}(Y(L u R))``.
    """
    _check_eps(eps)
    return float(ip_delta_grid(joint, [eps])[1][0])


def dp_delta(joint: FiniteJoint, eps: float) -> float:
    """Smallest delta for (eps, delta)-DP with every distinct pair as neighbours.

    For finite Y the worst event for the ordered pair ``(s, s')`` is
    ``{y : p(y|s) > e^eps p(y|s')}``.
    """
    if not eps >= 0:
        raise ValueError("eps must be non-negative")
    cond = joint.matrix / joint.p_s[:, None]
    return float(_kernels.dp_delta(cond, float(eps)))


def _prior_probs(prior) -> np.ndarray:
    if isinstance(prior, Pmf):
        return prior.probs
    return Pmf.of(prior).probs


def detection_error_bound(eps: float, delta: float, prior) -> float:
    """Lower bound ``1 - delta - e^eps max_s p_S(s)`` on any detector's error.

    May be negative, in which case it is vacuous.
    """
    if not eps >= 0 or not 0.0 <= delta <= 1.0:
        raise ValueError("need eps >= 0 and delta in [0, 1]")
    return float(1.0 - delta - math.exp(eps) * _prior_probs(prior).max())


def bayes_error(joint: FiniteJoint) -> float:
    """Error probability of the MAP detector of S from Y."""
    return float(max(1.0 - joint.matrix.max(axis=0).sum(), 0.0))


def estimation_error_bound(eps: float, delta: float, mean_s: float, second_moment_s: float) -> float:
    """Lower bound ``(1-delta) e^{-2 eps} E[S^2] - e^{2 eps} E[S]^2`` on the MSE."""
    if not eps >= 0 or not 0.0 <= delta <= 1.0:
        raise ValueError("need eps >= 0 and delta in [0, 1]")
    if mean_s < 0:
        raise ValueError("S must be non-negative, so its mean is too")
    if second_moment_s < mean_s * mean_s - 1e-12 * max(1.0, mean_s * mean_s):
        raise MomentInconsistent("E[S^2] < E[S]^2")
    return float((1.0 - delta) * math.exp(-2.0 * eps) * second_moment_s - math.exp(2.0 * eps) * mean_s**2)


def _numeric_s(joint: FiniteJoint) -> np.ndarray:
    if not all(isinstance(s, numbers.Real) and not isinstance(s, bool) for s in joint.s_labels):
        raise NonNumericLabels("s labels must be real numbers")
    return np.asarray(joint.s_labels, dtype=float)


def s_moments(joint: FiniteJoint) -> tuple[float, float]:
    """``(E[S], E[S^2])`` for numeric s labels."""
    s = _numeric_s(joint)
    p = joint.p_s
    return float(p @ s), float(p @ (s * s))


def mmse_oracle(joint: FiniteJoint) -> float:
    """MSE of the conditional-mean estimator: ``sum_y p_Y(y) Var(S | Y = y)``."""
    s = _numeric_s(joint)
    p_y = joint.p_y
    cols = p_y > 0
    m = joint.matrix[:, cols]
    mean = (s @ m) / p_y[cols]
    dev = s[:, None] - mean[None, :]
    return float(max(np.sum(m * dev * dev), 0.0))
