"""Exact O(N log N) kernel sums for one-dimensional Matern kernels.

A half-integer Matern kernel is an exponential times a polynomial in the
distance, so ``sum_s alpha_s k(x_i - x_s)`` over sorted centers can be
accumulated with a forward and a backward recursion. Every propagation
factor is ``exp(-c * gap) <= 1``, which keeps the recursion stable.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def _sweep32(x, a, c, out):
    n = x.shape[0]
    p = 0.0
    q = 0.0
    for i in range(n):
        if i > 0:
            g = c * (x[i] - x[i - 1])
            e = np.exp(-g)
            q = e * (q + g * p)
            p = e * p
        p += a[i]
        out[i] += p + q
    p = 0.0
    q = 0.0
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            g = c * (x[i + 1] - x[i])
            e = np.exp(-g)
            q = e * (q + g * p)
            p = e * p
        p += a[i]
        out[i] += p + q - a[i]


@nb.njit(cache=True, nogil=True)
def _sweep52(x, a, c, out):
    n = x.shape[0]
    p = 0.0
    q1 = 0.0
    q2 = 0.0
    for i in range(n):
        if i > 0:
            g = c * (x[i] - x[i - 1])
            e = np.exp(-g)
            q2 = e * (q2 + 2.0 * g * q1 + g * g * p)
            q1 = e * (q1 + g * p)
            p = e * p
        p += a[i]
        out[i] += p + q1 + q2 / 3.0
    p = 0.0
    q1 = 0.0
    q2 = 0.0
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            g = c * (x[i + 1] - x[i])
            e = np.exp(-g)
            q2 = e * (q2 + 2.0 * g * q1 + g * g * p)
            q1 = e * (q1 + g * p)
            p = e * p
        p += a[i]
        out[i] += p + q1 + q2 / 3.0 - a[i]


@nb.njit(cache=True, nogil=True)
def _batched_sums(x, a, c, order):
    m, n = x.shape
    out = np.zeros((m, n))
    xs = np.empty(n)
    as_ = np.empty(n)
    vs = np.empty(n)
    for j in range(m):
        idx = np.argsort(x[j])
        for i in range(n):
            xs[i] = x[j, idx[i]]
            as_[i] = a[j, idx[i]]
            vs[i] = 0.0
        if order == 3:
            _sweep32(xs, as_, c, vs)
        else:
            _sweep52(xs, as_, c, vs)
        for i in range(n):
            out[j, idx[i]] = vs[i]
    return out


def matern_sums_1d(x, a, c, order):
    """Return ``K @ a`` for each row, with ``K`` the unit-scale Matern Gram.

    Parameters
    ----------
    x : (m, n) array of 1D centers
    a : (m, n) array of coefficients
    c : float
        ``sqrt(3) / lengthscale`` or ``sqrt(5) / lengthscale``.
    order : {3, 5}
        Twice the smoothness of the Matern kernel.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _batched_sums(x, a, float(c), int(order))


@nb.njit(cache=True, nogil=True)
def _dense_sums(x, a, inv_ell, order):
    m, n, d = x.shape
    out = np.zeros((m, n))
    for j in range(m):
        for i in range(n):
            out[j, i] += a[j, i]
            for s in range(i + 1, n):
                r2 = 0.0
                for k in range(d):
                    diff = x[j, i, k] - x[j, s, k]
                    r2 += diff * diff
                r = np.sqrt(r2) * inv_ell
                if order == 3:
                    u = np.sqrt(3.0) * r
                    kv = (1.0 + u) * np.exp(-u)
                elif order == 5:
                    u = np.sqrt(5.0) * r
                    kv = (1.0 + u + u * u / 3.0) * np.exp(-u)
                else:
                    kv = np.exp(-0.5 * r * r)
                out[j, i] += a[j, s] * kv
                out[j, s] += a[j, i] * kv
    return out


def dense_sums(x, a, lengthscale, order):
    """Return ``K @ a`` per row for unit-scale kernels in any dimension.

    ``order`` is 3 or 5 for the Matern kernels and 0 for the squared
    exponential. Quadratic in the number of centers but allocation free.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _dense_sums(x, a, 1.0 / float(lengthscale), int(order))
