"""Privacy-preserving hypothesis testing on synthetic data.

Raw data ``X = A [S'^2, U'^2, S'U', S', U']`` with ``S' ~ N(S, 1)`` and
``U' ~ N(U, 1)``. The sanitizer releases ``Y = X + h(N)`` with
``N ~ N(0, I)``; a utility classifier predicts ``U`` from ``Y`` and a critic
estimates ``chi2(p_SY || p_S p_Y)``. Training alternates critic/classifier
ascent-descent steps with sanitizer steps on

    utility_loss + lam * max(sqrt(chi2_hat), sqrt(eta)).
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .errors import BadPmf, DivergedLoss
from .estimator import ratio_grad_outputs
from .nn import MLP, Adam, softmax_xent

LABELS = (-1, 1)

INDEPENDENT_PMF = ((0.25, 0.25), (0.25, 0.25))
# rows s = -1, 1; columns u = -1, 1
CORRELATED_PMF = ((0.4, 0.1), (0.1, 0.4))


@dataclass
class SynthConfig:
    n_samples: int = 4000
    pmf: tuple = INDEPENDENT_PMF
    a_matrix: list | None = None
    a_seed: int = 0
    noise_seed: int = 0
    obs_noise: float = 1.0

    def resolved_a(self) -> np.ndarray:
        if self.a_matrix is not None:
            a = np.asarray(self.a_matrix, dtype=float)
            if a.shape != (5, 5):
                raise ValueError("mixing matrix must be 5x5")
            return a
        return np.random.default_rng(self.a_seed).standard_normal((5, 5))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["a_matrix"] = self.resolved_a().tolist()
        return out


@dataclass
class SynthData:
    s: np.ndarray
    u: np.ndarray
    x: np.ndarray

    def __len__(self) -> int:
        return self.s.shape[0]

    def split(self, train_frac: float = 0.8):
        n_train = int(round(train_frac * len(self)))
        head = SynthData(self.s[:n_train], self.u[:n_train], self.x[:n_train])
        tail = SynthData(self.s[n_train:], self.u[n_train:], self.x[n_train:])
        return head, tail


def _check_pmf(pmf) -> np.ndarray:
    p = np.asarray(pmf, dtype=float)
    if p.shape != (2, 2) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise BadPmf(f"need a 2x2 pmf over (S, U) summing to 1, got {pmf!r}")
    return p / p.sum()


def gen_synthetic(config: SynthConfig) -> SynthData:
    pmf = _check_pmf(config.pmf)
    rng = np.random.default_rng(config.noise_seed)
    cells = rng.choice(4, size=config.n_samples, p=pmf.ravel())
    s = np.where(cells // 2 == 0, -1.0, 1.0)
    u = np.where(cells % 2 == 0, -1.0, 1.0)
    s_obs = s + config.obs_noise * rng.standard_normal(config.n_samples)
    u_obs = u + config.obs_noise * rng.standard_normal(config.n_samples)
    feats = np.stack([s_obs**2, u_obs**2, s_obs * u_obs, s_obs, u_obs], axis=1)
    x = feats @ config.resolved_a().T
    return SynthData(s, u, x)


@dataclass
class NetConfig:
    """Architecture and schedule for the sanitizer experiment."""

    width: int = 32
    n_layers: int = 5
    noise_dim: int = 5
    lr: float = 1e-4
    batch_size: int = 500
    outer_steps: int = 4000
    k_inner: int = 5
    lambda_c: float = 1.0
    attack_steps: int = 3000
    attack_lr: float = 1e-3
    checkpoint_every: int = 50
    seed: int = 0

    def hidden(self) -> tuple:
        return (self.width,) * (self.n_layers - 1)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SanitizerModel:
    sanitizer: MLP
    utility: MLP
    critic: MLP
    x_shift: np.ndarray
    x_scale: np.ndarray
    eta: float
    lam: float
    config: NetConfig
    trace: list = field(default_factory=list)
    best_trace: list = field(default_factory=list)
    chi2_trace: list = field(default_factory=list)
    # sanitizer steps where the privacy term was above its floor
    active_steps: int = 0

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_shift) / self.x_scale

    def sanitize(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        n = rng.standard_normal((x.shape[0], self.config.noise_dim))
        return self.standardize(x) + self.sanitizer(n)


def _labels01(v: np.ndarray) -> np.ndarray:
    return (np.asarray(v) > 0).astype(np.int64)


def _critic_input(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.column_stack([s, y])


class _Trainer:
    """One alternating min-max run; all randomness flows from ``rng``."""

    def __init__(self, train: SynthData, eta: float, lam: float, cfg: NetConfig):
        self.cfg = cfg
        self.eta = float(eta)
        self.lam = float(lam)
        self.rng = np.random.default_rng(cfg.seed)
        self.x_shift = train.x.mean(axis=0)
        self.x_scale = train.x.std(axis=0)
        self.x_scale[self.x_scale == 0] = 1.0
        self.x = (train.x - self.x_shift) / self.x_scale
        self.s = train.s.astype(float)
        self.u = _labels01(train.u)
        d = self.x.shape[1]
        h = cfg.hidden()
        seeds = self.rng.integers(2**63, size=3)
        self.san = MLP((cfg.noise_dim, *h, d), "leaky_relu", np.random.default_rng(seeds[0]))
        self.util = MLP((d, *h, 2), "tanh", np.random.default_rng(seeds[1]))
        self.critic = MLP((d + 1, *h, 1), "elu", np.random.default_rng(seeds[2]))
        self.opt_san = Adam(self.san.params, lr=cfg.lr)
        self.opt_util = Adam(self.util.params, lr=cfg.lr)
        self.opt_critic = Adam(self.critic.params, lr=cfg.lr)
        self.reg = cfg.lambda_c / np.sqrt(cfg.batch_size)
        self.active_steps = 0

    def batch(self):
        n = self.x.shape[0]
        idx = self.rng.choice(n, size=min(self.cfg.batch_size, n), replace=False)
        noise = self.rng.standard_normal((idx.size, self.cfg.noise_dim))
        perm = self.rng.permutation(idx.size)
        return idx, noise, perm

    def privacy(self, s, y, perm, need_input_grad=False):
        """Ratio objective on joint vs shuffled pairs, with optional grads."""
        # joint and shuffled pairs share one pass through the critic
        n = s.shape[0]
        both = np.concatenate([_critic_input(s, y), _critic_input(s[perm], y)])
        g, cache = self.critic.forward(both)
        value, d_p, d_q = ratio_grad_outputs(g[:n, 0], g[n:, 0], self.reg)
        grads, gx = self.critic.backward(cache, np.concatenate([d_p, d_q])[:, None], need_input_grad)
        gy = None if gx is None else gx[:n, 1:] + gx[n:, 1:]
        return value, grads, gy

    def inner_step(self):
        idx, noise, perm = self.batch()
        y = self.x[idx] + self.san(noise)
        _, grads, _ = self.privacy(self.s[idx], y, perm)
        self.opt_critic.step([-g for g in grads])
        logits, cache = self.util.forward(y)
        _, dlogits = softmax_xent(logits, self.u[idx])
        grads, _ = self.util.backward(cache, dlogits)
        self.opt_util.step(grads)

    def sanitizer_objective(self, idx, noise, perm, with_grad=True):
        """Total objective and its gradient w.r.t. the sanitizer parameters."""
        h, cache_h = self.san.forward(noise)
        y = self.x[idx] + h
        logits, cache_u = self.util.forward(y)
        util_loss, dlogits = softmax_xent(logits, self.u[idx])
        _, gy_util = self.util.backward(cache_u, dlogits, need_input_grad=True)
        chi2, _, gy_priv = self.privacy(self.s[idx], y, perm, need_input_grad=True)
        priv = np.sqrt(chi2)
        floor = np.sqrt(self.eta)
        total = util_loss + self.lam * max(priv, floor)
        if not with_grad:
            return total, util_loss, chi2, None
        gy = gy_util
        if self.lam > 0 and priv > floor:
            # d sqrt(c) = dc / (2 sqrt(c)); priv > floor >= 0 so priv > 0
            gy = gy + (self.lam / (2.0 * priv)) * gy_priv
            self.active_steps += 1
        grads, _ = self.san.backward(cache_h, gy)
        return total, util_loss, chi2, grads

    def run(self) -> SanitizerModel:
        cfg = self.cfg
        trace, best_trace, chi2_trace = [], [], []
        best = np.inf
        window = []
        for it in range(1, cfg.outer_steps + 1):
            for _ in range(cfg.k_inner):
                self.inner_step()
            idx, noise, perm = self.batch()
            total, _, chi2, grads = self.sanitizer_objective(idx, noise, perm)
            if not np.isfinite(total):
                raise DivergedLoss(f"non-finite objective at outer step {it}")
            self.opt_san.step(grads)
            window.append(total)
            if it % cfg.checkpoint_every == 0 or it == cfg.outer_steps:
                value = float(np.mean(window))
                window = []
                best = min(best, value)
                trace.append(value)
                best_trace.append(best)
                chi2_trace.append(float(chi2))
        return SanitizerModel(self.san, self.util, self.critic, self.x_shift, self.x_scale,
                              self.eta, self.lam, cfg, trace, best_trace, chi2_trace, self.active_steps)


def train_sanitizer(dataset: SynthData, eta: float, lam: float, net_config: NetConfig | None = None,
                    train_frac: float = 0.8) -> SanitizerModel:
    """Alternating minibatch training of sanitizer, utility classifier and critic.

    Uses the first ``train_frac`` of ``dataset`` as the training split.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    cfg = NetConfig() if net_config is None else net_config
    train, _ = dataset.split(train_frac)
    return _Trainer(train, eta, lam, cfg).run()


def _train_classifier(y, labels, cfg: NetConfig, rng: np.random.Generator) -> MLP:
    net = MLP((y.shape[1], *cfg.hidden(), 2), "tanh", rng)
    opt = Adam(net.params, lr=cfg.attack_lr)
    n = y.shape[0]
    bs = min(cfg.batch_size, n)
    for _ in range(cfg.attack_steps):
        idx = rng.choice(n, size=bs, replace=False)
        logits, cache = net.forward(y[idx])
        _, dlogits = softmax_xent(logits, labels[idx])
        grads, _ = net.backward(cache, dlogits)
        opt.step(grads)
    return net


def _score(net: MLP, y, labels):
    logits = net(y)
    loss, _ = softmax_xent(logits, labels)
    acc = float(np.mean(np.argmax(logits, axis=1) == labels))
    return acc, loss


class IdentitySanitizer:
    """Release the standardized raw data unchanged (no noise)."""

    def __init__(self, train: SynthData, noise_dim: int = 5):
        self.x_shift = train.x.mean(axis=0)
        self.x_scale = train.x.std(axis=0)
        self.noise_dim = noise_dim

    def sanitize(self, x, rng):
        return (x - self.x_shift) / self.x_scale


class ConstantSanitizer:
    """Release a constant vector: ``Y`` carries no information."""

    def sanitize(self, x, rng):
        return np.zeros_like(np.asarray(x, dtype=float))


def evaluate_attack(model, dataset: SynthData, attack_net_config: NetConfig | None = None,
                    train_frac: float = 0.8, seed: int = 12345):
    """Train a fresh classifier for ``S`` on sanitized training data.

    Returns held-out ``(accuracy, loss)``. The attacker knows the sanitizer:
    it sees sanitized samples produced by the trained mechanism.
    """
    cfg = attack_net_config or getattr(model, "config", None) or NetConfig()
    rng = np.random.default_rng([seed, cfg.seed])
    train, test = dataset.split(train_frac)
    y_train = model.sanitize(train.x, rng)
    y_test = model.sanitize(test.x, rng)
    net = _train_classifier(y_train, _labels01(train.s), cfg, rng)
    return _score(net, y_test, _labels01(test.s))


def evaluate_utility(model, dataset: SynthData, train_frac: float = 0.8, seed: int = 54321,
                     net_config: NetConfig | None = None):
    """Held-out ``(accuracy, loss)`` of the utility classifier on ``U``.

    Models without a trained utility head (the reference sanitizers) get a
    fresh classifier trained on their sanitized training split.
    """
    rng = np.random.default_rng(seed)
    train, test = dataset.split(train_frac)
    y_test = model.sanitize(test.x, rng)
    labels = _labels01(test.u)
    util = getattr(model, "utility", None)
    if util is None:
        cfg = net_config or NetConfig()
        util = _train_classifier(model.sanitize(train.x, rng), _labels01(train.u), cfg, rng)
    return _score(util, y_test, labels)


@dataclass
class TradeoffPoint:
    eta_budget: float
    utility_accuracy: float
    utility_loss: float
    attack_accuracy: float
    attack_loss: float
    achieved_chi2_estimate: float
    seed: int = 0
    lam: float = 0.0
    active_steps: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def run_point(dataset: SynthData, eta: float, lam: float, cfg: NetConfig) -> TradeoffPoint:
    model = train_sanitizer(dataset, eta, lam, cfg)
    u_acc, u_loss = evaluate_utility(model, dataset)
    a_acc, a_loss = evaluate_attack(model, dataset, cfg)
    tail = model.chi2_trace[-5:] or [float("nan")]
    return TradeoffPoint(float(eta), u_acc, u_loss, a_acc, a_loss, float(np.mean(tail)), cfg.seed, float(lam),
                         model.active_steps)


def tradeoff_sweep(dataset: SynthData, eta_grid: Sequence[float], lam: float,
                   net_config: NetConfig | None = None, seeds: Sequence[int] | None = None,
                   jobs: int = 1) -> list[TradeoffPoint]:
    """One trained sanitizer per ``(eta, seed)``; points come back in grid order."""
    if len(eta_grid) == 0:
        raise ValueError("eta grid is empty")
    base = NetConfig() if net_config is None else net_config
    seeds = [base.seed] if seeds is None else list(seeds)
    tasks = []
    for seed in seeds:
        for eta in eta_grid:
            cfg = NetConfig(**{**base.to_dict(), "seed": int(seed)})
            tasks.append((dataset, float(eta), float(lam), cfg))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


def _run_task(task) -> TradeoffPoint:
    return run_point(*task)
