"""Hot loops of the jump-integral quadrature, numba and numpy twins.

Both variants compute the same finite sums; the numba loops are direct
``O(n K)`` double loops, the numpy versions route the same sums through FFT
convolutions.  Results agree to rounding (~1e-12 relative).
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from ._backend import njit, resolve


@njit
def _second_difference_sum_nb(u, c, pad, n):
    K = c.size
    out = np.empty(n)
    for i in range(n):
        j = pad + i
        uj2 = 2.0 * u[j]
        acc = 0.0
        for k in range(1, K + 1):
            acc += c[k - 1] * (u[j + k] + u[j - k] - uj2)
        out[i] = acc
    return out


def _second_difference_sum_np(u, c, pad, n):
    K = c.size
    ker = np.concatenate([c[::-1], [0.0], c])
    seg = u[pad - K: pad + n + K]
    conv = fftconvolve(seg, ker, mode="valid")
    return conv - 2.0 * u[pad: pad + n] * c.sum()


def second_difference_sum(u: np.ndarray, c: np.ndarray, pad: int, n: int,
                          backend: str | None = None) -> np.ndarray:
    """``sum_k c[k-1] (u[j+k] + u[j-k] - 2 u[j])`` at ``j = pad .. pad+n-1``."""
    if c.size > pad:
        raise ValueError("weight vector longer than the padding")
    u = np.ascontiguousarray(u, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    if resolve(backend) == "numba":
        return _second_difference_sum_nb(u, c, pad, n)
    return _second_difference_sum_np(u, c, pad, n)


@njit
def _pair_form_sum_nb(f, g, w, c, lo, hi):
    K = c.size
    L = f.size
    total = 0.0
    for m in range(lo, hi):
        fm = f[m]
        gm = g[m]
        wm = w[m]
        # both ends inside [lo, hi)
        for j in range(m + 1, min(hi, m + K + 1)):
            # (df * dg) commutes exactly, so swapping f and g is bit-identical
            total += c[j - m - 1] * ((f[j] - fm) * (g[j] - gm)) * (w[j] * wm)
        fg = fm * gm
        if fg == 0.0:
            continue
        # other end outside, where f = g = 0: the term is c f g w w
        out = 0.0
        for k in range(max(1, hi - m), min(K, L - 1 - m) + 1):
            out += c[k - 1] * w[m + k]
        for k in range(m - lo + 1, min(K, m) + 1):
            out += c[k - 1] * w[m - k]
        total += fg * wm * out
    return total


def _corr(x, y, K):
    # corr[k] = sum_i x[i + k] y[i], k = 1..K
    L = x.size
    full = fftconvolve(x, y[::-1], mode="full")
    return full[L: L + K]


def _pair_form_sum_np(f, g, w, c, lo, hi):
    K = c.size
    A, P, Q = f * g * w, f * w, g * w
    terms = (_corr(A, w, K) + _corr(w, A, K)) - (_corr(P, Q, K) + _corr(Q, P, K))
    return float(np.dot(c, terms))


def pair_form_sum(f: np.ndarray, g: np.ndarray, w: np.ndarray, c: np.ndarray,
                  lo: int, hi: int, backend: str | None = None) -> float:
    """``sum_i sum_k c[k-1] (f[i+k]-f[i])(g[i+k]-g[i]) w[i+k] w[i]``.

    ``f`` and ``g`` must vanish outside ``[lo, hi)``; the numba loop sums pairs
    inside that range directly and pairs leaving it as ``f g`` times a tail sum
    of ``w``, the numpy route sums the whole array.
    Both are bit-symmetric in ``(f, g)``.
    """
    f = np.ascontiguousarray(f, dtype=float)
    g = np.ascontiguousarray(g, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    if resolve(backend) == "numba":
        return float(_pair_form_sum_nb(f, g, w, c, lo, hi))
    return _pair_form_sum_np(f, g, w, c, lo, hi)


@njit
def _cross_difference_sum_nb(p, f, c, pad, n):
    K = c.size
    out = np.empty(n)
    for i in range(n):
        j = pad + i
        pj = p[j]
        fj = f[j]
        acc = 0.0
        for k in range(1, K + 1):
            acc += c[k - 1] * ((p[j + k] - pj) * (f[j + k] - fj) + (p[j - k] - pj) * (f[j - k] - fj))
        out[i] = acc
    return out


def _cross_difference_sum_np(p, f, c, pad, n):
    def s(u):
        return _second_difference_sum_np(u, c, pad, n)

    sl = slice(pad, pad + n)
    return s(p * f) - p[sl] * s(f) - f[sl] * s(p)


def cross_difference_sum(p: np.ndarray, f: np.ndarray, c: np.ndarray, pad: int, n: int,
                         backend: str | None = None) -> np.ndarray:
    """``sum_k c[k-1] [d_k p d_k f + d_{-k} p d_{-k} f]`` at the grid points."""
    p = np.ascontiguousarray(p, dtype=float)
    f = np.ascontiguousarray(f, dtype=float)
    c = np.ascontiguousarray(c, dtype=float)
    if resolve(backend) == "numba":
        return _cross_difference_sum_nb(p, f, c, pad, n)
    return _cross_difference_sum_np(p, f, c, pad, n)
