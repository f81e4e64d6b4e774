# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; signatures match ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, sqrt, fabs, copysign

cnp.import_array()

# Forward activations are dominated by transcendental/SIMD ufunc work where
# numpy already wins; only the derivative products run as native loops.
from ._kernels_py import ACT_CODES, act_forward  # noqa: F401
from ._kernels_py import act_backward as _py_act_backward


DEF SLOPE = 0.01


cdef void _bwd(int code, const double* z, const double* a, double* d, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double w
    if code == 1:
        for i in range(n):
            d[i] = d[i] * (1.0 - a[i] * a[i])
    elif code == 3:
        for i in range(n):
            w = 1.0 if z[i] > 0 else SLOPE
            d[i] = d[i] * w
    elif code == 4:
        for i in range(n):
            w = 1.0 if z[i] > 0 else 0.0
            d[i] = d[i] * w


def act_backward(int code, double[:, ::1] z, double[:, ::1] a, double[:, ::1] delta):
    if code < 0 or code > 5:
        raise ValueError(f"unknown activation code {code}")
    if code == 0 or code == 2:
        return _py_act_backward(code, np.asarray(z), np.asarray(a), np.asarray(delta))
    cdef Py_ssize_t n = z.shape[0] * z.shape[1]
    if n and code != 5:
        with nogil:
            _bwd(code, &z[0, 0], &a[0, 0], &delta[0, 0], n)
    return np.asarray(delta)


def tail_delta_grid(disp, joint, col_ok, eps_grid):
    cdef const double[:, ::1] d = np.ascontiguousarray(disp, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(joint, dtype=np.float64)
    cdef const cnp.uint8_t[::1] ok = np.ascontiguousarray(col_ok, dtype=np.uint8)
    cdef const double[::1] eps = np.ascontiguousarray(eps_grid, dtype=np.float64)
    cdef Py_ssize_t ns = d.shape[0], ny = d.shape[1], ne = eps.shape[0]
    ip_arr = np.zeros(ne)
    strong_arr = np.zeros(ne)
    cdef double[::1] ip = ip_arr
    cdef double[::1] strong = strong_arr
    cdef Py_ssize_t i, j, k
    cdef double lo, hi, col_mass, tail
    cdef bint col_bad
    with nogil:
        for k in range(ne):
            lo = exp(-eps[k])
            hi = exp(eps[k])
            tail = 0.0
            for j in range(ny):
                if not ok[j]:
                    continue
                col_bad = False
                col_mass = 0.0
                for i in range(ns):
                    col_mass = col_mass + p[i, j]
                    if d[i, j] < lo or d[i, j] > hi:
                        col_bad = True
                        tail = tail + p[i, j]
                if col_bad:
                    strong[k] = strong[k] + col_mass
            ip[k] = tail
    return ip_arr, strong_arr


def dp_delta(cond, double eps):
    cdef const double[:, ::1] c = np.ascontiguousarray(cond, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], ny = c.shape[1], i, k, j
    cdef double scale = exp(eps), best = 0.0, val, excess
    with nogil:
        for i in range(n):
            for k in range(n):
                if i == k:
                    continue
                val = 0.0
                for j in range(ny):
                    excess = c[i, j] - scale * c[k, j]
                    if excess > 0:
                        val = val + excess
                if val > best:
                    best = val
    return best if best < 1.0 else 1.0


def singular_values(mat, double tol=1e-12, long max_sweeps=100000):
    b_arr = np.array(mat, dtype=np.float64)
    if b_arr.shape[0] < b_arr.shape[1]:
        b_arr = b_arr.T
    b_arr = np.asfortranarray(b_arr)
    cdef double[::1, :] b = b_arr
    cdef Py_ssize_t m = b.shape[0], n = b.shape[1], i, j, r
    cdef long sweep
    cdef double alpha, beta, gamma, zeta, t, c, s, x, y
    cdef bint rotated
    with nogil:
        for sweep in range(max_sweeps):
            rotated = False
            for i in range(n - 1):
                for j in range(i + 1, n):
                    alpha = 0.0
                    beta = 0.0
                    gamma = 0.0
                    for r in range(m):
                        alpha = alpha + b[r, i] * b[r, i]
                        beta = beta + b[r, j] * b[r, j]
                        gamma = gamma + b[r, i] * b[r, j]
                    if gamma == 0.0 or fabs(gamma) <= tol * sqrt(alpha * beta):
                        continue
                    rotated = True
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = copysign(1.0, zeta) / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = c * t
                    for r in range(m):
                        x = b[r, i]
                        y = b[r, j]
                        b[r, i] = c * x - s * y
                        b[r, j] = s * x + c * y
            if not rotated:
                break
    sv = np.sqrt((b_arr * b_arr).sum(axis=0))
    return np.sort(sv)[::-1]


cdef inline double _kl_tail(double p, double gamma) noexcept nogil:
    if p >= 1.0:
        return 0.0
    return (1.0 - p) * log((1.0 - p) / (gamma - p))


def zeta(double eta, double eps_signed, int max_iter=200):
    cdef double gamma = exp(eps_signed), thresh = eta - eps_signed
    cdef double lo = 0.0, hi, mid
    cdef int it
    if gamma >= 1.0:
        if thresh >= 0.0:
            return 1.0
        hi = 1.0
    else:
        hi = gamma
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _kl_tail(mid, gamma) <= thresh:
            lo = mid
        else:
            hi = mid
    return lo
