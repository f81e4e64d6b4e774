"""Small dense networks with hand-written reverse-mode gradients.

Everything is float64 numpy. A forward pass returns the output together with
a cache, and ``backward`` consumes that cache, so one network can be applied
to several batches before any gradient is taken (the critic sees both the
joint and the shuffled samples in one objective).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels as _kernels

ACTIVATIONS = ("softplus", "tanh", "elu", "leaky_relu", "relu", "identity")
_CODES = {name: code for code, name in enumerate(ACTIVATIONS)}


class MLP:
    """Fully connected network ``sizes[0] -> ... -> sizes[-1]``.

    Hidden layers use ``activation``; the last layer is affine. Parameters are
    stored as a flat list ``[W0, b0, W1, b1, ...]`` with ``Wk`` of shape
    ``(in, out)``.
    """

    def __init__(
        self,
        sizes: Sequence[int],
        activation: str = "softplus",
        rng: np.random.Generator | None = None,
        out_scale: float = 1.0,
    ):
        if len(sizes) < 2 or any(int(s) < 1 for s in sizes):
            raise ValueError(f"bad layer sizes {sizes!r}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        rng = np.random.default_rng() if rng is None else rng
        self.sizes = tuple(int(s) for s in sizes)
        self.activation = activation
        self._code = _CODES[activation]
        self.params: list[np.ndarray] = []
        n_layers = len(self.sizes) - 1
        for k, (n_in, n_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            # Glorot-uniform weights, zero biases
            limit = np.sqrt(6.0 / (n_in + n_out))
            w = rng.uniform(-limit, limit, size=(n_in, n_out))
            if k == n_layers - 1:
                w *= out_scale
            self.params.append(w)
            self.params.append(np.zeros(n_out))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x: np.ndarray):
        """Return ``(output, cache)`` for a batch ``x`` of shape ``(n, in)``."""
        cache = [x]
        a = x
        last = self.n_layers - 1
        for k in range(self.n_layers):
            w, b = self.params[2 * k], self.params[2 * k + 1]
            z = a @ w + b
            if k == last:
                a = z
                cache.append((z, z))
            else:
                a = _kernels.act_forward(self._code, z, np.empty_like(z))
                cache.append((z, a))
        return a, cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, grad_out: np.ndarray, need_input_grad: bool = False):
        """Backpropagate ``grad_out`` (d loss / d output).

        Returns ``(param_grads, input_grad)``; ``input_grad`` is ``None``
        unless requested.
        """
        grads: list[np.ndarray] = [None] * len(self.params)  # type: ignore[list-item]
        delta = grad_out
        for k in range(self.n_layers - 1, -1, -1):
            a_prev = cache[0] if k == 0 else cache[k][1]
            if k != self.n_layers - 1:
                z, a = cache[k + 1]
                delta = _kernels.act_backward(self._code, z, a, np.array(delta, order="C"))
            grads[2 * k] = a_prev.T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            if k > 0 or need_input_grad:
                delta = delta @ self.params[2 * k].T
        return grads, (delta if need_input_grad else None)

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise ValueError("flat parameter vector has the wrong length")
        offset = 0
        for p in self.params:
            p[...] = flat[offset : offset + p.size].reshape(p.shape)
            offset += p.size

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "MLP":
        clone = object.__new__(MLP)
        clone.sizes = self.sizes
        clone.activation = self.activation
        clone._code = self._code
        clone.params = [p.copy() for p in self.params]
        return clone


def flatten(grads: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([g.ravel() for g in grads])


@dataclass
class Adam:
    """Adam over a list of arrays, updated in place (descent direction)."""

    params: list
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    _m: list = field(default_factory=list, repr=False)
    _v: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._m = [np.zeros_like(p) for p in self.params]
        self._v = [np.zeros_like(p) for p in self.params]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def softmax_xent(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy of integer ``labels`` under ``logits``.

    Returns ``(loss, d loss / d logits)``.
    """
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_prob = shifted - log_z
    loss = -log_prob[np.arange(n), labels].mean()
    grad = np.exp(log_prob)
    grad[np.arange(n), labels] -= 1.0
    return float(loss), grad / n


def central_difference(fn: Callable[[np.ndarray], float], x0: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of a vector."""
    x0 = np.asarray(x0, dtype=float)
    out = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (fn(xp) - fn(xm)) / (2.0 * h)
    return out
