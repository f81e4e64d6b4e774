"""Exact f-divergences on finite alphabets and the leakage metrics built on them.

Total variation follows the unhalved convention ``sum |p - q|`` (range
``[0, 2]``), which is the convention the IP conversion bounds are derived in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _kernels
from .dist import FiniteJoint, Pmf, product_of_marginals
from .errors import DegenerateMarginal, NotAbsolutelyContinuous, SupportMismatch

__all__ = [
    "DivergenceKind",
    "MetricForm",
    "DivergenceBudget",
    "total_variation",
    "kl_divergence",
    "chi2_divergence",
    "divergence",
    "fdiv_privacy_leakage",
    "strong_fdiv_leakage",
    "normalized_joint_matrix",
    "joint_singular_values",
    "maximal_correlation",
]


class DivergenceKind(enum.Enum):
    TV = "tv"
    KL = "kl"
    CHI2 = "chi2"

    @classmethod
    def parse(cls, value) -> "DivergenceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown divergence kind {value!r}; expected tv, kl or chi2") from None

    def generator(self, x):
        """The convex ``f`` with ``f(1) = 0`` generating this divergence."""
        x = np.asarray(x, dtype=float)
        if self is DivergenceKind.TV:
            return np.abs(x - 1.0)
        if self is DivergenceKind.KL:
            return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        return x * x - 1.0


class MetricForm(enum.Enum):
    JOINT_VS_PRODUCT = "joint_vs_product"
    STRONG_PER_S = "strong_per_s"


@dataclass(frozen=True)
class DivergenceBudget:
    kind: DivergenceKind
    eta: float
    form: MetricForm

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError("eta must be non-negative")


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, Pmf) and isinstance(q, Pmf):
        if p.labels != q.labels:
            raise SupportMismatch("pmfs are defined on different labels")
        return p.probs, q.probs
    if isinstance(p, FiniteJoint) and isinstance(q, FiniteJoint):
        if p.s_labels != q.s_labels or p.y_labels != q.y_labels:
            raise SupportMismatch("joints are defined on different labels")
        return p.matrix.ravel(), q.matrix.ravel()
    a = np.asarray(getattr(p, "probs", getattr(p, "matrix", p)), dtype=float)
    b = np.asarray(getattr(q, "probs", getattr(q, "matrix", q)), dtype=float)
    if a.shape != b.shape:
        raise SupportMismatch(f"supports differ: {a.shape} vs {b.shape}")
    return a.ravel(), b.ravel()


def total_variation(p, q) -> float:
    a, b = _pair(p, q)
    return float(np.abs(a - b).sum())


def _check_ac(a, b):
    if np.any((b <= 0) & (a > 0)):
        raise NotAbsolutelyContinuous("p puts mass where q has none")


def kl_divergence(p, q) -> float:
    a, b = _pair(p, q)
    _check_ac(a, b)
    m = a > 0
    return float(max(np.sum(a[m] * (np.log(a[m]) - np.log(b[m]))), 0.0))


def chi2_divergence(p, q) -> float:
    a, b = _pair(p, q)
    _check_ac(a, b)
    m = b > 0
    with np.errstate(over="ignore"):  # a denormal reference can push the sum past the float range
        return float(max(np.sum(a[m] * a[m] / b[m]) - 1.0, 0.0))


_FUNCS = {
    DivergenceKind.TV: total_variation,
    DivergenceKind.KL: kl_divergence,
    DivergenceKind.CHI2: chi2_divergence,
}


def divergence(p, q, kind) -> float:
    return _FUNCS[DivergenceKind.parse(kind)](p, q)


def fdiv_privacy_leakage(joint: FiniteJoint, kind) -> DivergenceBudget:
    """``D_f(p_SY || p_S p_Y)``; the KL case is the mutual information."""
    kind = DivergenceKind.parse(kind)
    eta = _FUNCS[kind](joint, product_of_marginals(joint))
    return DivergenceBudget(kind, eta, MetricForm.JOINT_VS_PRODUCT)


def strong_fdiv_leakage(joint: FiniteJoint, kind) -> DivergenceBudget:
    """``max_s D_f(p_Y || p_{Y|S=s})``, with the conditional as reference."""
    kind = DivergenceKind.parse(kind)
    p_y = joint.p_y
    cond = joint.matrix / joint.p_s[:, None]
    eta = max(_FUNCS[kind](p_y, row) for row in cond)
    return DivergenceBudget(kind, eta, MetricForm.STRONG_PER_S)


def normalized_joint_matrix(joint: FiniteJoint) -> np.ndarray:
    """``B(s, y) = p(s, y) / sqrt(p_S(s) p_Y(y))``."""
    if np.any(joint.p_y <= 0) or np.any(joint.p_s <= 0):
        raise DegenerateMarginal("maximal correlation needs strictly positive marginals")
    return joint.matrix / np.sqrt(np.outer(joint.p_s, joint.p_y))


def joint_singular_values(joint: FiniteJoint) -> np.ndarray:
    """Singular values of ``B`` in descending order; the largest is 1."""
    return _kernels.singular_values(normalized_joint_matrix(joint))


def maximal_correlation(joint: FiniteJoint) -> float:
    """Hirschfeld-Gebelein-Renyi maximal correlation: second singular value of ``B``."""
    sv = joint_singular_values(joint)
    if sv.size < 2:
        return 0.0
    return float(min(max(sv[1], 0.0), 1.0))
