"""Sample-based chi-square estimation with a neural critic.

The critic ``g`` is scored by the ratio objective

    (mean_p g - mean_q g)^2 / (mean_q g^2 + lam)

whose supremum over all square-integrable ``g`` (with ``lam = 0``) is
``chi2(p || q)``, attained at ``g = 1 - p/q``. The estimate is the best
full-sample objective seen while the critic is trained by Adam ascent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .errors import EmptySamples, NonPositiveReference, ZeroDenominator
from .nn import MLP, Adam

__all__ = [
    "Critic",
    "EstimatorConfig",
    "ratio_objective",
    "ratio_grad_outputs",
    "objective_gradient",
    "estimate_chi2",
    "estimate_joint_chi2",
    "closed_form_discrete_sup",
    "permute_pairs",
    "default_lambda",
]


def default_lambda(m: int, c: float = 1.0) -> float:
    """Denominator regulariser ``c / sqrt(m)``."""
    return c / np.sqrt(m)


def _as_2d(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise EmptySamples("sample set is empty")
    return arr


def _ratio_from_outputs(g_p: np.ndarray, g_q: np.ndarray, lam: float):
    if g_p.size == 0 or g_q.size == 0:
        raise EmptySamples("sample set is empty")
    diff = g_p.mean() - g_q.mean()
    denom = np.mean(g_q * g_q) + lam
    if not denom > 0.0:
        raise ZeroDenominator("critic vanishes on the reference samples and lambda is 0")
    return diff, denom


def ratio_grad_outputs(g_p: np.ndarray, g_q: np.ndarray, lam: float):
    """Objective value and its gradient w.r.t. each critic output.

    Returns ``(value, d/d g_p, d/d g_q)``.
    """
    g_p = np.asarray(g_p, dtype=float).ravel()
    g_q = np.asarray(g_q, dtype=float).ravel()
    diff, denom = _ratio_from_outputs(g_p, g_q, lam)
    value = diff * diff / denom
    d_p = np.full(g_p.shape, 2.0 * diff / denom / g_p.size)
    d_q = -2.0 * diff / denom / g_q.size - (value / denom) * 2.0 * g_q / g_q.size
    return float(value), d_p, d_q


@dataclass
class Critic:
    """MLP critic applied to standardized inputs ``(z - shift) / scale``."""

    net: MLP
    shift: np.ndarray
    scale: np.ndarray

    @classmethod
    def create(cls, dim: int, widths: Sequence[int] = (16, 16, 1), activation: str = "softplus",
               seed: int = 0, shift=None, scale=None) -> "Critic":
        widths = tuple(widths)
        if widths[-1] != 1:
            raise ValueError("critic must end in a scalar layer")
        net = MLP((dim, *widths), activation=activation, rng=np.random.default_rng(seed))
        shift = np.zeros(dim) if shift is None else np.asarray(shift, dtype=float)
        scale = np.ones(dim) if scale is None else np.asarray(scale, dtype=float)
        return cls(net, shift, scale)

    def forward(self, z: np.ndarray):
        out, cache = self.net.forward((z - self.shift) / self.scale)
        return out[:, 0], cache

    def __call__(self, z) -> np.ndarray:
        return self.forward(_as_2d(z))[0]

    def backward(self, cache, grad_out: np.ndarray, need_input_grad: bool = False):
        grads, gx = self.net.backward(cache, grad_out[:, None], need_input_grad)
        if gx is not None:
            gx = gx / self.scale
        return grads, gx


def ratio_objective(critic, samples_p, samples_q, lam: float) -> float:
    """Ratio objective of ``critic`` on the two sample sets."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    zp, zq = _as_2d(samples_p), _as_2d(samples_q)
    g_p = np.asarray(critic(zp), dtype=float).ravel()
    g_q = np.asarray(critic(zq), dtype=float).ravel()
    diff, denom = _ratio_from_outputs(g_p, g_q, lam)
    return float(diff * diff / denom)


def objective_gradient(critic: Critic, samples_p, samples_q, lam: float):
    """Objective value and its gradient w.r.t. every critic parameter.

    The gradient is a list aligned with ``critic.net.params``.
    """
    zp, zq = _as_2d(samples_p), _as_2d(samples_q)
    g_p, cache_p = critic.forward(zp)
    g_q, cache_q = critic.forward(zq)
    value, d_p, d_q = ratio_grad_outputs(g_p, g_q, lam)
    grads_p, _ = critic.backward(cache_p, d_p)
    grads_q, _ = critic.backward(cache_q, d_q)
    return value, [a + b for a, b in zip(grads_p, grads_q)]


@dataclass
class EstimatorConfig:
    widths: tuple = (16, 16, 1)
    activation: str = "softplus"
    lr: float = 1e-4
    steps: int = 2000
    batch_size: int | None = None
    lambda_c: float = 1.0
    seed: int = 0
    eval_every: int = 20

    def __post_init__(self):
        self.widths = tuple(int(w) for w in self.widths)
        if self.steps < 1 or self.lr <= 0 or self.lambda_c < 0 or self.eval_every < 1:
            raise ValueError(f"invalid estimator config {self!r}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EstimateResult:
    estimate: float
    lam: float
    steps: int
    seed: int
    trace: list = field(default_factory=list)


def _fit(zp: np.ndarray, zq: np.ndarray, config: EstimatorConfig, q_sampler=None) -> EstimateResult:
    rng = np.random.default_rng(config.seed)
    pooled = np.vstack([zp, zq])
    scale = pooled.std(axis=0)
    scale[scale == 0] = 1.0
    critic = Critic.create(zp.shape[1], config.widths, config.activation,
                           seed=int(rng.integers(2**63)), shift=pooled.mean(axis=0), scale=scale)
    m = min(zp.shape[0], zq.shape[0])
    lam = default_lambda(m, config.lambda_c)
    opt = Adam(critic.net.params, lr=config.lr)
    best = -np.inf
    trace = []
    bs = config.batch_size
    for step in range(1, config.steps + 1):
        if bs is None or bs >= m:
            bp, bq = zp, zq
        else:
            bp = zp[rng.integers(zp.shape[0], size=bs)]
            bq = zq[rng.integers(zq.shape[0], size=bs)]
        _, grads = objective_gradient(critic, bp, bq, lam)
        opt.step([-g for g in grads])
        if step % config.eval_every == 0 or step == config.steps:
            value = ratio_objective(critic, zp, zq, lam)
            if not np.isfinite(value):
                break
            best = max(best, value)
            trace.append(value)
    return EstimateResult(float(best), lam, config.steps, config.seed, trace)


def estimate_chi2(samples_p, samples_q, config: EstimatorConfig | None = None) -> float:
    """Estimate ``chi2(p || q)`` from samples of ``p`` and of ``q``."""
    config = EstimatorConfig() if config is None else config
    zp, zq = _as_2d(samples_p), _as_2d(samples_q)
    if zp.shape[1] != zq.shape[1]:
        raise ValueError("sample sets have different dimensions")
    return _fit(zp, zq, config).estimate


def permute_pairs(paired: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Shuffle the first column against the rest: samples of ``p_S x p_Y``."""
    out = paired.copy()
    out[:, 0] = paired[rng.permutation(paired.shape[0]), 0]
    return out


def estimate_joint_chi2(paired_samples, config: EstimatorConfig | None = None) -> float:
    """Estimate ``chi2(p_SY || p_S p_Y)`` from rows ``(s, y_1, ..., y_k)``."""
    config = EstimatorConfig() if config is None else config
    paired = _as_2d(paired_samples)
    if paired.shape[0] < 2 or paired.shape[1] < 2:
        raise EmptySamples("need at least two (s, y) rows")
    rng = np.random.default_rng([config.seed, 1])
    return _fit(paired, permute_pairs(paired, rng), config).estimate


def closed_form_discrete_sup(p, q) -> float:
    """Exact variational supremum on a finite alphabet.

    Evaluates the ratio objective with population expectations at the optimal
    critic ``1 - p/q``; this equals ``chi2(p || q)``.
    """
    p = np.asarray(getattr(p, "probs", p), dtype=float)
    q = np.asarray(getattr(q, "probs", q), dtype=float)
    if p.shape != q.shape:
        raise ValueError("p and q must share a support")
    if np.any(q <= 0):
        raise NonPositiveReference("reference pmf must be strictly positive")
    g = 1.0 - p / q
    diff = p @ g - q @ g
    second = q @ (g * g)
    if second == 0.0:
        return 0.0
    return float(diff * diff / second)
