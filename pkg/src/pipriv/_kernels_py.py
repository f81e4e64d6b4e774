"""Pure-Python/numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` function for function; used when the compiled
extension is unavailable or ``PIPRIV_PURE_PYTHON=1``.
"""

import math

import numpy as np

ACT_CODES = {"softplus": 0, "tanh": 1, "elu": 2, "leaky_relu": 3, "relu": 4, "identity": 5}
LEAKY_SLOPE = 0.01


def act_forward(code, z, out):
    if code == 0:
        # max(z, 0) + log1p(exp(-|z|))
        np.exp(-np.abs(z), out=out)
        np.log1p(out, out=out)
        out += np.maximum(z, 0.0)
    elif code == 1:
        np.tanh(z, out=out)
    elif code == 2:
        # max(z, 0) + exp(min(z, 0)) - 1; numpy's exp is vectorised, expm1 is not
        np.minimum(z, 0.0, out=out)
        np.exp(out, out=out)
        out -= 1.0
        out += np.maximum(z, 0.0)
    elif code == 3:
        np.maximum(z, LEAKY_SLOPE * z, out=out)
    elif code == 4:
        np.maximum(z, 0.0, out=out)
    elif code == 5:
        np.copyto(out, z)
    else:
        raise ValueError(f"unknown activation code {code}")
    return out


def act_backward(code, z, a, delta):
    """Multiply ``delta`` in place by the activation derivative."""
    if code == 0:
        # sigmoid(z) = 1 - exp(-softplus(z))
        delta *= -np.expm1(-a)
    elif code == 1:
        delta *= 1.0 - a * a
    elif code == 2:
        delta *= np.minimum(a, 0.0) + 1.0
    elif code == 3:
        delta *= np.where(z > 0, 1.0, LEAKY_SLOPE)
    elif code == 4:
        delta *= z > 0
    elif code == 5:
        pass
    else:
        raise ValueError(f"unknown activation code {code}")
    return delta


def tail_delta_grid(disp, joint, col_ok, eps_grid):
    """Minimal delta for IP and strong IP at every eps of the grid.

    ``disp`` and ``joint`` are ``|S| x |Y|``; columns with ``col_ok == 0``
    (zero output mass) never count as tail events.
    """
    disp = np.asarray(disp, dtype=float)
    joint = np.asarray(joint, dtype=float)
    ok = np.asarray(col_ok, dtype=bool)
    p_y = joint.sum(axis=0)
    eps_grid = np.asarray(eps_grid, dtype=float)
    ip = np.empty(eps_grid.size)
    strong = np.empty(eps_grid.size)
    for k, eps in enumerate(eps_grid):
        bad = ((disp < math.exp(-eps)) | (disp > math.exp(eps))) & ok[None, :]
        ip[k] = joint[bad].sum()
        strong[k] = p_y[bad.any(axis=0)].sum()
    return ip, strong


def dp_delta(cond, eps):
    """Worst ordered-pair hockey-stick divergence of the rows of ``cond``."""
    cond = np.asarray(cond, dtype=float)
    n = cond.shape[0]
    scale = math.exp(eps)
    best = 0.0
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            excess = cond[i] - scale * cond[k]
            val = float(excess[excess > 0].sum())
            if val > best:
                best = val
    return min(best, 1.0)


def singular_values(mat, tol=1e-12, max_sweeps=100000):
    """Singular values (descending) by one-sided Jacobi rotations."""
    b = np.array(mat, dtype=float)
    if b.shape[0] < b.shape[1]:
        b = b.T.copy()
    n = b.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                bi = b[:, i]
                bj = b[:, j]
                alpha = float(bi @ bi)
                beta = float(bj @ bj)
                gamma = float(bi @ bj)
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * bi - s * bj
                new_j = s * bi + c * bj
                b[:, i] = new_i
                b[:, j] = new_j
        if not rotated:
            break
    sv = np.sqrt((b * b).sum(axis=0))
    return np.sort(sv)[::-1]


def _kl_tail(p, gamma):
    # (1 - p) log((1 - p) / (gamma - p)) with 0 log 0 = 0
    if p >= 1.0:
        return 0.0
    return (1.0 - p) * math.log((1.0 - p) / (gamma - p))


def zeta(eta, eps_signed, max_iter=200):
    """Largest p whose binary-KL tail constraint stays within ``eta``.

    The constraint ``(1-p) log((1-p)/(e^eps - p)) <= eta - eps`` is
    non-decreasing in p, so bisection finds the supremum.
    """
    gamma = math.exp(eps_signed)
    thresh = eta - eps_signed
    if gamma >= 1.0:
        if thresh >= 0.0:
            return 1.0
        lo, hi = 0.0, 1.0
    else:
        lo, hi = 0.0, gamma
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _kl_tail(mid, gamma) <= thresh:
            lo = mid
        else:
            hi = mid
    return lo
