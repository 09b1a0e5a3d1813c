"""The Levy generator on a grid, two ways.

Spectral route
    multiply the discrete Fourier transform by ``eta(u)`` (periodic grid).
Quadrature route
    evaluate ``(a/2) f'' + int [f(x+y) - f(x) - y f'(x) 1_{|y|<=1}] nu(y) dy``
    directly.  For an even measure the compensator cancels and the integral
    is folded onto ``y > 0``::

        int_0^inf [f(x+y) + f(x-y) - 2 f(x)] nu(y) dy

    The integrand is written as ``G(y) m(y)`` with ``G = D(y) / y**2`` and
    ``m = y**2 nu``; ``G`` is replaced by its piecewise-linear interpolant at
    the on-grid shifts ``y = k h`` and integrated against ``m`` exactly
    (product integration).  ``G(0) = f''(x)``, so the first cell carries the
    Taylor compensation.  For the Cauchy measure ``m`` is constant and the
    rule is the trapezoid rule of an even smooth function, which converges
    geometrically.  Shifts beyond the grid use the fitted algebraic tail of
    ``f``; shifts beyond the padding use an analytic Gauss-Jacobi far tail.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi, roots_legendre

from . import _kernels, defaults
from .grid import Extension, GridFunction, derivative, extend, sample  # noqa: F401
from .levy_core import GeneratingTriplet, LevyMeasure, SpectralSymbol
from .errors import ValidationError

__all__ = [
    "JumpWeights",
    "apply_generator_quadrature",
    "apply_generator_spectral",
    "delta",
    "delta2",
    "far_tail_integral",
    "jump_cross_integral",
    "jump_weights",
    "product_rule_residual",
    "sample",
]


@dataclass(frozen=True)
class JumpWeights:
    """Product-integration weights for shifts ``k h``, ``k = 0..K``.

    ``w0`` multiplies ``G(0)``; ``c[k-1] = W_k / (k h)**2`` multiplies the
    second difference at shift ``k``; ``tail_mass`` is ``int_{K h}^inf nu``.
    """

    h: float
    w0: float
    c: np.ndarray
    tail_mass: float

    @property
    def K(self) -> int:
        return self.c.size

    @property
    def reach(self) -> float:
        return self.K * self.h


@lru_cache(maxsize=64)
def _weights_cached(measure: LevyMeasure, h: float, K: int) -> JumpWeights:
    k = np.arange(1, K + 1, dtype=float)
    if measure.power_law is not None and measure.power_law[1] == 1.0:
        cst = measure.power_law[0]
        W = np.full(K, cst * h)
        W[-1] *= 0.5
        w0 = 0.5 * cst * h
    else:
        m = measure.moment_density
        w0 = integrate.quad(lambda y: (1.0 - y / h) * m(y), 0.0, h, limit=200)[0]
        xg, wg = roots_legendre(8)
        t = 0.5 * (xg + 1.0)  # nodes on (0, 1)
        wg = 0.5 * wg
        # rising half on [(k-1)h, kh] and falling half on [kh, (k+1)h]
        y_up = (k[:, None] - 1.0 + t[None, :]) * h
        y_dn = (k[:, None] + t[None, :]) * h
        W = h * (m(y_up) * t[None, :]) @ wg + h * (m(y_dn) * (1.0 - t[None, :])) @ wg
        W[0] = integrate.quad(lambda y: (y / h) * m(y), 0.0, h, limit=200)[0] + \
            h * float((m(np.array(h + t * h)) * (1.0 - t)) @ wg)
        W[-1] = h * float((m(y_up[-1]) * t) @ wg)
    c = W / (k * h) ** 2
    return JumpWeights(h=h, w0=float(w0), c=c, tail_mass=measure.tail_mass(K * h))


def jump_weights(measure: LevyMeasure, h: float, K: int) -> JumpWeights:
    return _weights_cached(measure, float(h), int(K))


@lru_cache(maxsize=16)
def _far_nodes(measure: LevyMeasure, R: float, nodes: int):
    """Nodes ``y_q`` and weights so that ``sum w_q F(y_q) ~ int_R^inf F nu``."""
    if measure.power_law is not None:
        c, alpha = measure.power_law
        # y = R / v, nu(y) dy = c R^-alpha v^(alpha-1) dv on (0, 1)
        x, w = roots_jacobi(nodes, 0.0, alpha - 1.0)
        v = 0.5 * (x + 1.0)
        wv = w * 0.5 ** alpha
        return R / v, c * R ** (-alpha) * wv
    x, w = roots_legendre(nodes)
    v = 0.5 * (x + 1.0)
    y = R / v
    return y, 0.5 * w * measure(y) * R / v**2


def far_tail_integral(ext: Extension, measure: LevyMeasure, R: float,
                      nodes: int = defaults.FAR_TAIL_NODES) -> np.ndarray:
    """``int_R^inf [tail(x+y) + tail(x-y)] nu(y) dy`` at the grid points."""
    y, w = _far_nodes(measure, float(R), int(nodes))
    x = ext.grid.x[:, None]
    vals = ext.tail_eval(x + y[None, :]) + ext.tail_eval(x - y[None, :])
    return vals @ w


def _pad_for(n: int) -> int:
    return defaults.EXTENSION_FACTOR * n


def _split_apply(fn, values):
    """Apply a real kernel to real and imaginary parts."""
    if np.iscomplexobj(values):
        return fn(np.ascontiguousarray(values.real)) + 1j * fn(np.ascontiguousarray(values.imag))
    return fn(values)


def _quadrature_on_ext(ext: Extension, t: GeneratingTriplet, backend=None) -> np.ndarray:
    g = ext.grid
    n, pad = g.n, ext.pad
    d2 = derivative(ext, 2)
    out = 0.5 * t.a * d2
    if t.levy.is_null:
        return out
    jw = jump_weights(t.levy, g.h, pad)
    js = _split_apply(lambda v: _kernels.second_difference_sum(v, jw.c, pad, n, backend), ext.values)
    f = ext.values[pad: pad + n]
    far = far_tail_integral(ext, t.levy, jw.reach) - 2.0 * f * jw.tail_mass
    return out + jw.w0 * d2 + js + far


def apply_generator_quadrature(f: GridFunction, t: GeneratingTriplet, *, tails=None,
                               backend: str | None = None) -> GridFunction:
    """``L0 f`` by direct quadrature of the Levy-Khintchine integral."""
    ext = extend(f, _pad_for(f.grid.n), tails)
    return GridFunction(f.grid, _quadrature_on_ext(ext, t, backend))


def apply_generator_spectral(f: GridFunction, sym: SpectralSymbol, *, periodic: bool = False,
                             tol: float = defaults.BOUNDARY_DECAY_TOL) -> GridFunction:
    """``L0 f = IFFT(eta(u) FFT(f))`` on the periodic grid.

    Warns when ``f`` does not decay at the grid ends unless the caller
    declares the input periodic.
    """
    v = f.values
    if not periodic:
        scale = np.max(np.abs(v)) or 1.0
        edge = max(abs(v[0]), abs(v[-1])) / scale
        if edge > tol:
            warnings.warn(f"spectral generator: boundary magnitude {edge:.3g} exceeds {tol:g}; "
                          "periodic wraparound is not negligible", RuntimeWarning, stacklevel=2)
    mult = sym(f.grid.frequencies())
    out = np.fft.ifft(np.fft.fft(v) * mult)
    if not np.iscomplexobj(v):
        out = out.real
    return GridFunction(f.grid, out)


def delta(f: GridFunction, k: int) -> GridFunction:
    """``f(x + k h) - f(x)`` with off-grid values from the tail model."""
    ext = extend(f, abs(k) + 4)
    p, n = ext.pad, f.grid.n
    return GridFunction(f.grid, ext.values[p + k: p + k + n] - f.values)


def delta2(f: GridFunction, k: int) -> GridFunction:
    """``f(x + y) - f(x) - y f'(x) 1_{|y| <= 1}`` at ``y = k h``."""
    y = k * f.grid.h
    d = delta(f, k).values
    if abs(y) <= 1.0:
        d = d - y * derivative(extend(f, 4), 1)
    return GridFunction(f.grid, d)


def jump_cross_integral(phi: GridFunction, f: GridFunction, t: GeneratingTriplet, *,
                        backend: str | None = None, phi_tails=None) -> GridFunction:
    """``int d_y phi d_y f nu(dy)`` plus the Gaussian ``a phi' f'``.

    ``f`` must be compactly supported inside the grid.
    """
    g = phi.grid
    n, pad = g.n, _pad_for(g.n)
    pe = extend(phi, pad, phi_tails)
    fe = extend(f, pad)
    d1p, d1f = derivative(pe, 1), derivative(fe, 1)
    out = t.a * d1p * d1f
    if not t.levy.is_null:
        jw = jump_weights(t.levy, g.h, pad)

        def kern(pv, fv):
            return _kernels.cross_difference_sum(pv, fv, jw.c, pad, n, backend)

        pv, fv = pe.values, fe.values
        if np.iscomplexobj(pv) or np.iscomplexobj(fv):
            pv, fv = pv.astype(complex), fv.astype(complex)
            js = (kern(pv.real, fv.real) - kern(pv.imag, fv.imag)
                  + 1j * (kern(pv.real, fv.imag) + kern(pv.imag, fv.real)))
        else:
            js = kern(pv, fv)
        far = -f.values * (far_tail_integral(pe, t.levy, jw.reach) - 2.0 * phi.values * jw.tail_mass)
        out = out + 2.0 * jw.w0 * d1p * d1f + js + far
    return GridFunction(g, out)


def product_rule_residual(phi: GridFunction, f: GridFunction, t: GeneratingTriplet, *,
                          backend: str | None = None) -> float:
    """Relative L2 residual of ``L0(phi f) = f L0 phi + phi L0 f + int d phi d f nu``.

    Every term is computed by its own quadrature.  ``f == 0`` is the
    degenerate case and returns 0.
    """
    lhs = apply_generator_quadrature(phi * f, t, backend=backend).values
    rhs = (f.values * apply_generator_quadrature(phi, t, backend=backend).values
           + phi.values * apply_generator_quadrature(f, t, backend=backend).values
           + jump_cross_integral(phi, f, t, backend=backend).values)
    den = np.linalg.norm(lhs)
    num = np.linalg.norm(lhs - rhs)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ValidationError("degenerate input: L0(phi f) vanishes identically")
    return float(num / den)
