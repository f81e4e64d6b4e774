"""Finite joint distributions of a private variable S and a release Y."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import NegativeMass, NotNormalized, UnknownLabel, ZeroColumn, ZeroPriorRow

INPUT_TOL = 1e-9

__all__ = [
    "Pmf",
    "FiniteJoint",
    "joint_from_matrix",
    "marginals",
    "conditional_y_given_s",
    "disparity",
    "disparity_matrix",
    "product_of_marginals",
    "random_joint",
    "joint_from_json",
    "joint_to_json",
]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size != len(labels):
            raise ValueError("labels and probs must have equal length")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        if np.any(probs < 0):
            raise NegativeMass("negative probability")
        if abs(probs.sum() - 1.0) > INPUT_TOL:
            raise NotNormalized(f"probabilities sum to {probs.sum()!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs / probs.sum())

    @classmethod
    def of(cls, probs, labels: Sequence[Hashable] | None = None) -> "Pmf":
        probs = np.asarray(probs, dtype=float)
        return cls(tuple(range(probs.size)) if labels is None else tuple(labels), probs)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class FiniteJoint:
    """Exact joint pmf; ``matrix[i, j] = P(S = s_labels[i], Y = y_labels[j])``."""

    s_labels: tuple
    y_labels: tuple
    matrix: np.ndarray

    def __post_init__(self):
        s_labels, y_labels = tuple(self.s_labels), tuple(self.y_labels)
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape != (len(s_labels), len(y_labels)):
            raise ValueError(f"matrix shape {m.shape} does not match {len(s_labels)}x{len(y_labels)} labels")
        if len(set(s_labels)) != len(s_labels) or len(set(y_labels)) != len(y_labels):
            raise ValueError("labels must be distinct")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        if np.any(m < 0):
            raise NegativeMass("joint has a negative entry")
        total = m.sum()
        if abs(total - 1.0) > INPUT_TOL:
            raise NotNormalized(f"joint sums to {total!r}")
        m = m / total
        if np.any(m.sum(axis=1) <= 0):
            raise ZeroPriorRow("every s needs positive prior mass")
        object.__setattr__(self, "s_labels", s_labels)
        object.__setattr__(self, "y_labels", y_labels)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def shape(self) -> tuple:
        return self.matrix.shape

    @property
    def p_s(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def p_y(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def s_index(self, s) -> int:
        try:
            return self.s_labels.index(s)
        except ValueError:
            raise UnknownLabel(f"unknown s label {s!r}") from None

    def y_index(self, y) -> int:
        try:
            return self.y_labels.index(y)
        except ValueError:
            raise UnknownLabel(f"unknown y label {y!r}") from None


def joint_from_matrix(s_labels, y_labels, matrix) -> FiniteJoint:
    return FiniteJoint(tuple(s_labels), tuple(y_labels), matrix)


def _joint(matrix_or_joint) -> FiniteJoint:
    if isinstance(matrix_or_joint, FiniteJoint):
        return matrix_or_joint
    m = np.asarray(matrix_or_joint, dtype=float)
    return joint_from_matrix(range(m.shape[0]), range(m.shape[1]), m)


def marginals(joint: FiniteJoint) -> tuple[Pmf, Pmf]:
    return Pmf(joint.s_labels, joint.p_s), Pmf(joint.y_labels, joint.p_y)


def conditional_y_given_s(joint: FiniteJoint, s) -> Pmf:
    i = joint.s_index(s)
    row = joint.matrix[i]
    return Pmf(joint.y_labels, row / row.sum())


def disparity(joint: FiniteJoint, s, y) -> float:
    """Posterior-to-prior ratio ``p(s | y) / p(s)``."""
    i, j = joint.s_index(s), joint.y_index(y)
    p_y = joint.p_y[j]
    if p_y <= 0:
        raise ZeroColumn(f"P(Y={y!r}) = 0")
    return float(joint.matrix[i, j] / (joint.p_s[i] * p_y))


def disparity_matrix(joint: FiniteJoint) -> np.ndarray:
    """All disparities; columns with zero output mass are NaN."""
    q = np.outer(joint.p_s, joint.p_y)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = joint.matrix / q
    d[:, joint.p_y <= 0] = np.nan
    return d


def product_of_marginals(joint: FiniteJoint) -> FiniteJoint:
    return FiniteJoint(joint.s_labels, joint.y_labels, np.outer(joint.p_s, joint.p_y))


def random_joint(rng_seed, n_s: int, n_y: int, concentration: float = 1.0) -> FiniteJoint:
    """Strictly positive joint from normalized Gamma(concentration) draws."""
    if n_s < 1 or n_y < 1 or not concentration > 0:
        raise ValueError("need n_s, n_y >= 1 and concentration > 0")
    draw = np.random.default_rng(rng_seed).gamma(concentration, size=(n_s, n_y))
    draw = np.maximum(draw, np.finfo(float).tiny)
    return FiniteJoint(tuple(range(n_s)), tuple(range(n_y)), draw / draw.sum())


def joint_from_json(text: str) -> FiniteJoint:
    """Parse ``{"s_labels": [...], "y_labels": [...], "p": [[...], ...]}``.

    A bare matrix is accepted as shorthand for ``{"p": matrix}``.
    """
    obj = json.loads(text)
    if isinstance(obj, list):
        obj = {"p": obj}
    if not isinstance(obj, dict) or "p" not in obj:
        raise ValueError('joint JSON must be an object with a "p" matrix')
    p = obj["p"]
    if not isinstance(p, list) or not p or not all(isinstance(r, list) for r in p):
        raise ValueError('"p" must be a non-empty list of rows')
    widths = {len(r) for r in p}
    if len(widths) != 1:
        raise ValueError('rows of "p" have different lengths')
    s_labels = obj.get("s_labels", list(range(len(p))))
    y_labels = obj.get("y_labels", list(range(widths.pop())))
    return joint_from_matrix(s_labels, y_labels, p)


def joint_to_json(joint: FiniteJoint) -> str:
    return json.dumps(
        {"s_labels": list(joint.s_labels), "y_labels": list(joint.y_labels), "p": joint.matrix.tolist()}
    )
