"""Generating triplets, symmetric Levy measures and the Levy-Khintchine exponent.

Everything is one-dimensional.  A symmetric Levy process is described by
``GeneratingTriplet(a, levy)`` where ``a`` is the Gaussian coefficient and
``levy`` a :class:`LevyMeasure` with an even density.  The logarithmic
characteristic is then real::

    eta(u) = -a u**2 / 2 + 2 * int_0^inf (cos(u y) - 1) nu(y) dy

and is evaluated by a singularity-split quadrature: a second-order Taylor
replacement on ``(0, eps]`` and adaptive QUADPACK integration beyond.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from . import defaults
from .errors import QuadratureError, ValidationError

Density = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LevyMeasure:
    """Even Levy density ``nu(y)``, ``y != 0``.

    Parameters
    ----------
    density
        Vectorized callable returning the density at ``y``.
    singularity_order
        ``alpha`` such that ``nu(y) ~ |y|**(-1 - alpha)`` as ``y -> 0``.
    tail_cutoff_hint
        Scale beyond which the density is treated as a tail.
    power_law
        ``(c, alpha)`` when the density is exactly ``c |y|**(-1-alpha)``.
        Enables closed-form weights, tail masses and jump sampling.
    symbol
        Optional closed form of the jump part of ``eta``.  Only used by
        :func:`spectral_symbol`; :func:`log_characteristic` always integrates.
    """

    density: Density
    singularity_order: float
    tail_cutoff_hint: float = 1.0
    name: str = "custom"
    power_law: tuple[float, float] | None = None
    symbol: Callable[[np.ndarray], np.ndarray] | None = None
    is_null: bool = False

    def __call__(self, y):
        return self.density(np.asarray(y, dtype=float))

    def moment_density(self, y):
        """``y**2 nu(y)``; bounded near zero for ``alpha <= 2``."""
        y = np.asarray(y, dtype=float)
        if self.power_law is not None:
            c, alpha = self.power_law
            return c * np.abs(y) ** (1.0 - alpha)
        return y * y * self.density(y)

    def tail_mass(self, r: float) -> float:
        """One-sided mass ``int_r^inf nu(y) dy``."""
        if self.is_null:
            return 0.0
        if self.power_law is not None:
            c, alpha = self.power_law
            return c * r ** (-alpha) / alpha
        cut = max(r, self.tail_cutoff_hint)
        val = 0.0
        if cut > r:
            val += integrate.quad(self.density, r, cut, limit=200)[0]
        val += integrate.quad(self.density, cut, np.inf, limit=200)[0]
        return val


def _zero_density(y):
    return np.zeros_like(np.asarray(y, dtype=float))


NULL_MEASURE = LevyMeasure(_zero_density, singularity_order=0.0, name="null", is_null=True)


def cauchy_measure(scale: float = 1.0) -> LevyMeasure:
    """``nu(y) = scale / (pi y**2)``; its exponent is ``-scale |u|``."""
    c = scale / math.pi
    return LevyMeasure(
        density=lambda y: c / (np.asarray(y, dtype=float) ** 2),
        singularity_order=1.0,
        tail_cutoff_hint=1.0,
        name="cauchy" if scale == 1.0 else f"cauchy(scale={scale:g})",
        power_law=(c, 1.0),
        symbol=lambda u: -scale * np.abs(u),
    )


MEASURES: dict[str, Callable[[], LevyMeasure]] = {
    "cauchy": cauchy_measure,
    "null": lambda: NULL_MEASURE,
}


def get_measure(name: str) -> LevyMeasure:
    try:
        return MEASURES[name]()
    except KeyError:
        raise ValidationError(f"unknown Levy measure {name!r}; known: {sorted(MEASURES)}") from None


def measure_from_table(path: str | Path, singularity_order: float) -> LevyMeasure:
    """Load a tabulated even density (columns ``y,density``, ``y > 0``).

    Values are interpolated log-log.  Below the first node the declared
    singularity order is used; above the last node the decay exponent of
    the last two nodes is extrapolated.
    """
    ys, ds = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ys.append(float(row["y"]))
            ds.append(float(row["density"]))
    y = np.asarray(ys)
    d = np.asarray(ds)
    order = np.argsort(y)
    y, d = y[order], d[order]
    if y.size < 2 or np.any(y <= 0) or np.any(d <= 0):
        raise ValidationError("table measure needs >= 2 rows with y > 0 and density > 0")
    ly, ld = np.log(y), np.log(d)
    slope_hi = (ld[-1] - ld[-2]) / (ly[-1] - ly[-2])

    def density(yy):
        yy = np.asarray(yy, dtype=float)
        shape = yy.shape
        with np.errstate(divide="ignore"):
            lyy = np.log(np.abs(yy.ravel()))
        out = np.interp(lyy, ly, ld)
        lo = lyy < ly[0]
        out[lo] = ld[0] - (1.0 + singularity_order) * (lyy[lo] - ly[0])
        hi = lyy > ly[-1]
        out[hi] = ld[-1] + slope_hi * (lyy[hi] - ly[-1])
        return np.exp(out).reshape(shape)

    return LevyMeasure(density, singularity_order=singularity_order,
                       tail_cutoff_hint=float(y[-1]), name=f"table:{Path(path).name}")


@dataclass(frozen=True, eq=False)
class GeneratingTriplet:
    """``(a, levy, drift)``; symmetric processes carry ``drift == 0``."""

    a: float = 0.0
    levy: LevyMeasure = field(default=NULL_MEASURE)
    drift: float = 0.0
    symmetric: bool = True

    @property
    def is_pure_gaussian(self) -> bool:
        return self.levy.is_null


def cauchy_triplet(scale: float = 1.0) -> GeneratingTriplet:
    return GeneratingTriplet(a=0.0, levy=cauchy_measure(scale))


def gaussian_triplet(a: float = 1.0) -> GeneratingTriplet:
    return GeneratingTriplet(a=a, levy=NULL_MEASURE)


@dataclass
class ValidationReport:
    passed: bool
    checks: dict[str, bool]
    integrability: float
    messages: list[str]

    def __bool__(self):
        return self.passed


def validate_triplet(t: GeneratingTriplet, tol: float = defaults.QUAD_TOL) -> ValidationReport:
    """Check positivity of ``a``, symmetry, non-negativity and integrability.

    Raises :class:`ValidationError` only for non-finite density values; every
    other failure is reported in the returned object.
    """
    checks: dict[str, bool] = {}
    messages: list[str] = []
    checks["gaussian_nonnegative"] = t.a >= 0
    if not checks["gaussian_nonnegative"]:
        messages.append(f"negative Gaussian coefficient a={t.a}")
    checks["drift_zero"] = (t.drift == 0.0) or not t.symmetric
    if not checks["drift_zero"]:
        messages.append(f"symmetric triplet declares drift {t.drift}")

    m = t.levy
    if m.is_null:
        checks.update(symmetric=True, nonnegative=True, integrable=True)
        return ValidationReport(all(checks.values()), checks, 0.0, messages)

    hi = max(10.0, 10.0 * m.tail_cutoff_hint)
    y = np.concatenate([np.logspace(-6, math.log10(hi), 241), [0.5, 1.0, 2.0]])
    with np.errstate(all="ignore"):
        dp = np.asarray(m(y), dtype=float)
        dn = np.asarray(m(-y), dtype=float)
    bad = ~np.isfinite(dp) | ~np.isfinite(dn)
    if bad.any():
        loc = float(y[np.argmax(bad)])
        raise ValidationError(f"non-finite Levy density at y=+/-{loc:g}")
    scale = np.maximum(np.abs(dp), np.abs(dn))
    checks["symmetric"] = bool(np.all(np.abs(dp - dn) <= 1e-12 * scale + 1e-300))
    if not checks["symmetric"]:
        k = int(np.argmax(np.abs(dp - dn) - 1e-12 * scale))
        messages.append(f"density not even: nu({y[k]:g})={dp[k]:g}, nu({-y[k]:g})={dn[k]:g}")
    checks["nonnegative"] = bool(np.all(dp >= 0) and np.all(dn >= 0))
    if not checks["nonnegative"]:
        messages.append("negative density values")

    # y^2 nu(y) must blow up slower than 1/y at the origin; quad alone can
    # return a finite (even negative) number for a divergent integral
    y0 = np.array([1e-7, 1e-6])
    with np.errstate(all="ignore"):
        m0 = y0 * y0 * np.asarray(m(y0), dtype=float)
    slope = float(np.diff(np.log(m0))[0] / np.log(10.0)) if np.all(m0 > 0) else 0.0
    try:
        if m.singularity_order >= 2.0 or slope <= -1.0 + 1e-3:
            raise ValueError(f"y^2 nu(y) ~ y^{slope:.3g} is not integrable at 0")
        inner = small_jump_variance(m, 1.0, tol=tol)  # = 2 int_0^1 y^2 nu
        outer = 2.0 * m.tail_mass(1.0)
        val = inner + outer
        checks["integrable"] = bool(np.isfinite(val) and val >= 0)
    except (QuadratureError, ValueError) as exc:
        val = float("inf")
        checks["integrable"] = False
        messages.append(f"integrability quadrature failed: {exc}")
    if checks["integrable"] and not checks["symmetric"]:
        # even-part integral is meaningless for asymmetric input; report both sides
        neg = integrate.quad(lambda s: s * s * m(-s), 0, 1, limit=200)[0]
        neg += integrate.quad(lambda s: m(-s), 1, np.inf, limit=200)[0]
        val = val / 2 + neg
    return ValidationReport(all(checks.values()), checks, float(val), messages)


def small_jump_variance(m: LevyMeasure, eps: float, tol: float = defaults.QUAD_TOL) -> float:
    """``sigma^2(eps) = int_{0<|y|<=eps} y^2 nu(dy)``."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if m.is_null:
        return 0.0
    if m.power_law is not None:
        c, alpha = m.power_law
        return 2.0 * c * eps ** (2.0 - alpha) / (2.0 - alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(m.moment_density, 0.0, eps, epsabs=tol / 4, limit=200)
    if err > max(tol, 1e-8 * abs(val)):
        raise QuadratureError(f"small_jump_variance did not converge (residual {err:.3g})")
    return 2.0 * val


def _taylor_eps(m: LevyMeasure, u: float, tol: float) -> float:
    # next Taylor term is bounded by u^4 eps^2 sigma^2(eps) / 24
    eps = min(1.0, 0.5 / abs(u)) if u else 1.0
    while eps > 1e-12:
        if u**4 * eps**2 * small_jump_variance(m, eps, tol) / 24.0 <= tol / 10:
            return eps
        eps /= 2
    return eps


def log_characteristic(t: GeneratingTriplet, u: float, tol: float = defaults.QUAD_TOL,
                       full_output: bool = False):
    """Real Levy-Khintchine exponent ``eta(u)`` of a symmetric triplet.

    Always integrates the measure, even when a closed form is registered, so
    it can serve as the oracle for :attr:`LevyMeasure.symbol`.

    Returns ``eta`` or ``(eta, residual_estimate)`` with ``full_output``.
    """
    u = float(u)
    gauss = -0.5 * t.a * u * u
    if u == 0.0 or t.levy.is_null:
        return (gauss, 0.0) if full_output else gauss
    m = t.levy
    eps = _taylor_eps(m, u, tol)
    sig2 = small_jump_variance(m, eps, tol)
    cut = max(m.tail_cutoff_hint, eps * 2, 50.0 / abs(u))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        body, e1 = integrate.quad(lambda y: (math.cos(u * y) - 1.0) * float(m(y)), eps, cut,
                                  epsabs=tol / 8, epsrel=1e-13, limit=2000)
        osc, e2 = integrate.quad(lambda y: float(m(y)), cut, np.inf, weight="cos", wvar=u,
                                 epsabs=tol / 8, limlst=200)
    mass = m.tail_mass(cut)
    jump = 2.0 * (body + osc - mass) - 0.5 * u * u * sig2
    resid = 2.0 * (e1 + e2) + u**4 * eps**2 * sig2 / 24.0
    if resid > 100 * tol:
        raise QuadratureError(f"log_characteristic({u}) residual {resid:.3g} exceeds tolerance")
    eta = gauss + jump
    return (eta, resid) if full_output else eta


def transition_char_function(t: GeneratingTriplet, u: float, time: float,
                             tol: float = defaults.QUAD_TOL) -> complex:
    """``E exp(i u Z_time) = exp(time * eta(u))``."""
    if time < 0:
        raise ValidationError("time must be non-negative")
    if time == 0:
        return 1.0 + 0.0j
    return complex(math.exp(time * log_characteristic(t, u, tol)))


@dataclass(frozen=True, eq=False)
class SpectralSymbol:
    """Vectorized ``u -> eta(u)``."""

    func: Callable[[np.ndarray], np.ndarray]
    name: str = "symbol"

    def __call__(self, u):
        return self.func(np.asarray(u, dtype=float))


@lru_cache(maxsize=32)
def _tabulated_symbol(t: GeneratingTriplet, umax: float, npts: int, tol: float):
    us = np.concatenate([[0.0], np.geomspace(1e-4, umax, npts)])
    vals = np.array([log_characteristic(t, u, tol) - (-0.5 * t.a * u * u) for u in us])
    return us, vals


def spectral_symbol(t: GeneratingTriplet, method: str = "auto", umax: float = 1e4,
                    npts: int = 400, tol: float = defaults.QUAD_TOL) -> SpectralSymbol:
    """Symbol of the generator.

    ``method="auto"`` uses a registered closed form when the measure carries
    one, otherwise tabulates :func:`log_characteristic` on a geometric grid
    of ``|u|`` and interpolates.  ``"quadrature"`` forces the table.
    """
    a = t.a
    if t.levy.is_null:
        return SpectralSymbol(lambda u: -0.5 * a * u * u, name=f"gaussian(a={a:g})")
    if method == "auto" and t.levy.symbol is not None:
        jump = t.levy.symbol
        return SpectralSymbol(lambda u: -0.5 * a * u * u + jump(u), name=t.levy.name)
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown symbol method {method!r}")
    us, vals = _tabulated_symbol(t, float(umax), int(npts), float(tol))

    def tab(u):
        au = np.abs(u)
        if np.any(au > umax):
            raise ValidationError(f"frequency beyond tabulated range {umax}")
        return -0.5 * a * u * u + np.interp(au, us, vals)

    return SpectralSymbol(tab, name=f"{t.levy.name}[tabulated]")
