"""Dirichlet forms of the Levy generator and of its ground-state transform.

Positive convention throughout::

    E0(f, g) = (a/2) int f' g' dx + int dx int_0^inf d_y f d_y g nu(y) dy
    E(f, g)  =                      int dx int_0^inf d_y f d_y g phi(x+y) phi(x) nu(y) dy

with ``d_y f = f(x+y) - f(x)``, so that ``E0(f, g) = -<L0 f, g>`` and
``E(f, g) = -<L f, g>_mu``.  The inner ``y`` integral reuses the product
integration weights of :mod:`spectral_ops`; shifts beyond the padding are
handled analytically for compactly supported ``f, g``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels
from .doob import GroundState, _l0_phi
from .errors import ValidationError
from .grid import GridFunction, derivative, extend
from .levy_core import GeneratingTriplet, spectral_symbol
from .spectral_ops import (
    _far_nodes,
    _pad_for,
    apply_generator_quadrature,
    far_tail_integral,
    jump_weights,
)

_EDGE = 8  # samples at each end that must vanish for compact support


@dataclass(frozen=True, eq=False)
class BeurlingDenyComponents:
    """Diffusion, killing and jump densities of a symmetric form.

    ``jump_density`` carries the factor 1/2 so that the unrestricted double
    integral over ``x != z`` reproduces the form exactly.
    """

    diffusion_density: Callable
    killing_density: Callable
    jump_density: Callable


def _check_compact(f: GridFunction, which: str) -> np.ndarray:
    v = np.asarray(f.values)
    if np.iscomplexobj(v):
        if np.any(v.imag):
            raise ValidationError(f"{which} must be real")
        v = v.real
    scale = np.max(np.abs(v))
    if scale and max(np.max(np.abs(v[:_EDGE])), np.max(np.abs(v[-_EDGE:]))) > 1e-12 * scale:
        raise ValidationError(
            f"jump part diverges: {which} does not vanish at the grid edges "
            "(compact support required, or pass periodic=True)")
    return v.astype(float)


def _padded(v: np.ndarray, K: int) -> np.ndarray:
    return np.concatenate([np.zeros(K), v, np.zeros(K)])


def _support(fv: np.ndarray, gv: np.ndarray, K: int) -> tuple[int, int]:
    nz = np.nonzero((fv != 0) | (gv != 0))[0]
    if nz.size == 0:
        return K, K
    return K + int(nz[0]), K + int(nz[-1]) + 1


def form_levy(f: GridFunction, g: GridFunction, t: GeneratingTriplet, *,
              periodic: bool = False, backend: str | None = None) -> float:
    """``E0(f, g)`` for real ``f, g``.

    ``periodic=True`` evaluates the form on the torus of the grid through the
    spectral symbol, ``sum_u -eta(u) conj(F(u)) G(u)``; constants give 0.
    """
    grid = f.grid
    if periodic:
        fv, gv = np.real(f.values), np.real(g.values)
        u = grid.frequencies()
        mult = -spectral_symbol(t)(u)
        F, G = np.fft.fft(fv), np.fft.fft(gv)
        return float(grid.h / grid.n * np.real(np.sum(mult * np.conj(F) * G)))
    fv, gv = _check_compact(f, "f"), _check_compact(g, "g")
    h, n = grid.h, grid.n
    K = _pad_for(n)
    d1f = derivative(extend(GridFunction(grid, fv), 4), 1)
    d1g = derivative(extend(GridFunction(grid, gv), 4), 1)
    total = 0.5 * t.a * h * float(np.dot(d1f, d1g))
    if t.levy.is_null:
        return total
    jw = jump_weights(t.levy, h, K)
    ones = np.ones(n + 2 * K)
    pairs = _kernels.pair_form_sum(_padded(fv, K), _padded(gv, K), ones, jw.c,
                                   *_support(fv, gv, K), backend)
    total += h * (jw.w0 * float(np.dot(d1f, d1g)) + pairs
                  + 2.0 * jw.tail_mass * float(np.dot(fv, gv)))
    return float(total)


def form_doob(f: GridFunction, g: GridFunction, g0: GroundState, t: GeneratingTriplet, *,
              backend: str | None = None) -> float:
    """Form of the transformed generator, ``int int d f d g phi(x+y) phi(x) nu``."""
    grid = f.grid
    fv, gv = _check_compact(f, "f"), _check_compact(g, "g")
    h, n = grid.h, grid.n
    K = _pad_for(n)
    phi = g0.phi.values
    d1f = derivative(extend(GridFunction(grid, fv), 4), 1)
    d1g = derivative(extend(GridFunction(grid, gv), 4), 1)
    diag = float(np.dot(d1f * d1g, phi * phi))
    total = 0.5 * t.a * h * diag
    if t.levy.is_null:
        return total
    jw = jump_weights(t.levy, h, K)
    pe = extend(g0.phi, K, g0.tails())
    pairs = _kernels.pair_form_sum(_padded(fv, K), _padded(gv, K), np.real(pe.values), jw.c,
                                   *_support(fv, gv, K), backend)
    far = far_tail_integral(pe, t.levy, jw.reach)
    total += h * (jw.w0 * diag + pairs + float(np.dot(fv * gv, phi * far)))
    return float(total)


def beurling_deny_extract(g0: GroundState, t: GeneratingTriplet) -> BeurlingDenyComponents:
    """Beurling-Deny data of the transformed form.

    Pure jump: ``J(x, z) = phi(x) phi(z) nu(z - x) / 2``.  Gaussian part:
    diffusion density ``(a/2) phi^2``.  The killing density is zero.
    """
    nu = t.levy
    a = t.a

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * a * g0.evaluate(x) ** 2

    def killing(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def jump(x, z):
        x, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float))
        if np.any(x == z):
            raise ValidationError("jump density undefined on the diagonal x = z")
        if nu.is_null:
            return np.zeros_like(x)
        return 0.5 * g0.evaluate(x) * g0.evaluate(z) * nu(z - x)

    return BeurlingDenyComponents(diffusion, killing, jump)


def _outside_mass(g0: GroundState, t: GeneratingTriplet, s: np.ndarray) -> np.ndarray:
    """``int_{x outside grid} phi(x) nu(x - s) dx`` for points ``s`` on the grid."""
    grid = g0.grid
    R_right = grid.x_max - s
    R_left = s - grid.x_min + grid.h
    out = np.zeros_like(s)
    y1, w1 = _far_nodes(t.levy, 1.0, 48)
    (left, right), _ = g0.tails()
    for R, sign, tail in ((R_right, 1.0, right), (R_left, -1.0, left)):
        if t.levy.power_law is not None:
            alpha = t.levy.power_law[1]
            y = R[:, None] * y1[None, :]
            w = w1[None, :] * R[:, None] ** (-alpha)
        else:
            # generic measure: nodes on (R, inf) per point
            y = np.empty((s.size, y1.size))
            w = np.empty_like(y)
            for i, r in enumerate(R):
                y[i], w[i] = _far_nodes(t.levy, float(r), 48)
        out += np.sum(tail(s[:, None] + sign * y) * w, axis=1)
    return out


def invariance_residual(f: GridFunction, g0: GroundState, t: GeneratingTriplet, *,
                        backend: str | None = None) -> float:
    """``|int [L f] phi^2 dx|`` over the whole line.

    On the grid ``phi^2 L f = phi (L0(phi f) - f L0 phi)``; beyond the grid
    ``f = 0`` and ``L0(phi f)(x) = int phi f(s) nu(x - s) ds``, which is added
    analytically with the algebraic tail of ``phi``.
    """
    fv = _check_compact(f, "f")
    grid = f.grid
    phi = g0.phi.values
    pf = GridFunction(grid, phi * fv)
    inside = grid.h * float(np.sum(phi * (apply_generator_quadrature(pf, t, backend=backend).values
                                          - fv * _l0_phi(g0, t, backend))))
    outside = 0.0
    if not t.levy.is_null:
        nz = np.nonzero(fv)[0]
        if nz.size:
            s = grid.x[nz]
            outside = grid.h * float(np.sum(phi[nz] * fv[nz] * _outside_mass(g0, t, s)))
    return abs(inside + outside)


def mu_inner(f: GridFunction, g: GridFunction, g0: GroundState) -> float:
    """``<f, g>_mu = int f g phi^2 dx`` on the grid."""
    phi = g0.phi.values
    return float(f.grid.h * np.sum(np.real(f.values) * np.real(g.values) * phi * phi))


def bump(center: float, width: float, amplitude: float = 1.0) -> Callable:
    """Smooth compactly supported bump ``A exp(-1/(1 - s^2))``, ``s = (x - c)/w``."""
    def f(x):
        s = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(s) < 1.0
        out = np.zeros_like(s)
        out[inside] = amplitude * np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return out
    return f


def random_bumps(count: int, rng: np.random.Generator, span: float = 3.0) -> list[Callable]:
    return [bump(rng.uniform(-span, span), rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0))
            for _ in range(count)]


def duality_suite(g0: GroundState | None, t: GeneratingTriplet, grid, n_pairs: int = 20,
                  seed: int = 0, backend: str | None = None) -> dict:
    """Form/generator duality, symmetry, positivity and Cauchy-Schwarz on random bumps.

    ``g0=None`` checks the Levy form against ``L0``; otherwise the transformed
    form against ``L`` in ``L^2(mu)``.
    """
    from .doob import apply_levy_type_generator  # local: keeps import graph flat

    rng = np.random.default_rng(seed)
    fs = [GridFunction(grid, b(grid.x)) for b in random_bumps(2 * n_pairs, rng)]
    rows = []
    worst = 0.0
    sym = 0.0
    psd = True
    cs = True
    for i in range(n_pairs):
        f, g = fs[2 * i], fs[2 * i + 1]
        if g0 is None:
            e_fg, e_gf = form_levy(f, g, t, backend=backend), form_levy(g, f, t, backend=backend)
            e_ff, e_gg = form_levy(f, f, t, backend=backend), form_levy(g, g, t, backend=backend)
            lf = apply_generator_quadrature(f, t, backend=backend)
            pairing = grid.h * float(np.sum(lf.values * g.values))
            nf, ng = f.norm(), g.norm()
        else:
            e_fg = form_doob(f, g, g0, t, backend=backend)
            e_gf = form_doob(g, f, g0, t, backend=backend)
            e_ff = form_doob(f, f, g0, t, backend=backend)
            e_gg = form_doob(g, g, g0, t, backend=backend)
            lf = apply_levy_type_generator(g0, t, f, backend=backend)
            pairing = mu_inner(lf, g, g0)
            nf, ng = np.sqrt(mu_inner(f, f, g0)), np.sqrt(mu_inner(g, g, g0))
        resid = abs(e_fg + pairing) / (nf * ng)
        worst = max(worst, resid)
        sym = max(sym, abs(e_fg - e_gf) / max(abs(e_fg), 1e-300))
        psd = psd and e_ff >= 0 and e_gg >= 0
        cs = cs and e_fg**2 <= e_ff * e_gg * (1 + 1e-12)
        rows.append({"form": e_fg, "form_swapped": e_gf, "pairing": pairing,
                     "relative_residual": resid, "form_ff": e_ff, "form_gg": e_gg})
    return {"pairs": rows, "max_relative_residual": worst, "max_symmetry_defect": sym,
            "positive_semidefinite": bool(psd), "cauchy_schwarz": bool(cs),
            "seed": seed, "n_pairs": n_pairs}


def refinement_delta(fn: Callable, g0_factory: Callable, t: GeneratingTriplet, grid) -> dict:
    """Jump energy ``int int |f(x) - f(z)|^2 J`` at ``h`` and ``h/2``.

    ``g0_factory(grid)`` builds the ground state on a given grid.
    """
    from .grid import Grid

    fine = Grid(grid.x_min, grid.x_max, 2 * grid.n)
    vals = []
    for gr in (grid, fine):
        f = GridFunction(gr, fn(gr.x))
        vals.append(form_doob(f, f, g0_factory(gr), t))
    return {"coarse": vals[0], "fine": vals[1],
            "relative_change": abs(vals[1] - vals[0]) / abs(vals[1])}


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, default=float))


__all__ = [
    "BeurlingDenyComponents",
    "beurling_deny_extract",
    "bump",
    "duality_suite",
    "form_doob",
    "form_levy",
    "invariance_residual",
    "mu_inner",
    "random_bumps",
    "refinement_delta",
    "write_report",
]
