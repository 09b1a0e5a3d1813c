"""Ground-state (Doob) transform of a symmetric Levy generator.

Given a strictly positive ``phi`` with energy ``E`` this module builds

* the potential ``V = L0 phi / phi + E``,
* the transformed generator ``L f = (L0(phi f) - f L0 phi) / phi``,
* its Levy-type kernel ``gamma(x, y) = phi(x)/phi(x+y) 1_{|y|<=1}``,
  ``lambda(x, dy) = phi(x+y)/phi(x) nu(dy)``,
* the Hamiltonian ``H = -L0 + V`` for which ``H phi = E phi``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import defaults
from .errors import PositivityError, ValidationError
from .grid import Grid, GridFunction, PowerTail, derivative, extend, fit_tail
from .levy_core import GeneratingTriplet, spectral_symbol
from .spectral_ops import (
    _pad_for,
    _far_nodes,
    apply_generator_quadrature,
    apply_generator_spectral,
    jump_weights,
)


@dataclass(frozen=True, eq=False)
class GroundState:
    """Strictly positive ``phi`` on a grid, its energy and gauge momentum.

    ``phi_func`` is an optional exact pointwise formula (presets carry one);
    without it off-grid values come from a cubic spline of ``log phi`` and
    fitted algebraic tails.
    """

    phi: GridFunction
    energy: float = 0.0
    gauge_momentum: float = 0.0
    improper: bool = False
    phi_func: Callable[[np.ndarray], np.ndarray] | None = None
    floor: float = defaults.POSITIVITY_FLOOR
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.phi.values)
        if np.iscomplexobj(v):
            if np.any(v.imag):
                raise ValidationError("ground state must be real")
            object.__setattr__(self, "phi", GridFunction(self.phi.grid, v.real))
            v = v.real
        vmax = float(np.max(v))
        if vmax <= 0 or float(np.min(v)) < self.floor * vmax:
            i = int(np.argmin(v))
            raise PositivityError(
                f"phi below positivity floor at x={self.phi.grid.x[i]:g}: "
                f"min/max = {v[i] / vmax if vmax > 0 else float('nan'):.3g} < {self.floor:g}")
        if not self.improper:
            mass = self.mass()
            if abs(mass - 1.0) > defaults.NORMALIZATION_TOL:
                raise ValidationError(
                    f"ground state not normalized: int phi^2 = {mass:.9f} (flag improper=True "
                    "for sigma-finite states)")

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    def tails(self) -> tuple:
        if "tails" not in self._cache:
            g = self.grid
            x, v = g.x, self.phi.values
            self._cache["tails"] = ((fit_tail(x, v, g.center, "left"),
                                     fit_tail(x, v, g.center, "right")), None)
        return self._cache["tails"]

    def mass(self) -> float:
        """``int phi^2`` including the algebraic tails beyond the grid."""
        g = self.grid
        v = self.phi.values
        body = g.h * float(np.sum(v * v))
        (left, right), _ = self.tails()
        tail = 0.0
        for t_, edge in ((left, g.x_min), (right, g.x[-1])):
            if t_.coef == 0.0:
                continue
            s = abs(edge - t_.center) + 0.5 * g.h
            if 2 * t_.power <= 1.0:
                return float("inf")
            tail += t_.coef**2 * s ** (1 - 2 * t_.power) / (2 * t_.power - 1)
        return body + tail

    def evaluate(self, x) -> np.ndarray:
        """``phi`` at arbitrary points."""
        x = np.asarray(x, dtype=float)
        if self.phi_func is not None:
            return np.asarray(self.phi_func(x), dtype=float)
        if "spline" not in self._cache:
            g = self.grid
            self._cache["spline"] = CubicSpline(g.x, np.log(self.phi.values))
        g = self.grid
        (left, right), _ = self.tails()
        inside = (x >= g.x_min) & (x <= g.x[-1])
        out = np.empty_like(x)
        out[inside] = np.exp(self._cache["spline"](x[inside]))
        out[~inside] = np.where(x[~inside] < g.center, left(x[~inside]), right(x[~inside]))
        return out

    # -- persistence ---------------------------------------------------
    def save(self, csv_path: str | Path, meta_path: str | Path | None = None) -> None:
        self.phi.to_csv(csv_path)
        meta_path = meta_path or Path(csv_path).with_suffix(".meta.json")
        Path(meta_path).write_text(json.dumps({
            "energy": self.energy, "gauge_momentum": self.gauge_momentum,
            "improper": self.improper}, indent=2))

    @classmethod
    def load(cls, csv_path: str | Path, meta_path: str | Path | None = None) -> "GroundState":
        phi = GridFunction.from_csv(csv_path)
        meta_path = Path(meta_path or Path(csv_path).with_suffix(".meta.json"))
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        return cls(phi, energy=float(meta.get("energy", 0.0)),
                   gauge_momentum=float(meta.get("gauge_momentum", 0.0)),
                   improper=bool(meta.get("improper", False)))


def improper_state(grid: Grid, energy: float = 0.0, gauge_momentum: float = 0.0) -> GroundState:
    """``phi == 1``: Lebesgue invariant measure, normalization not checked."""
    return GroundState(GridFunction(grid, np.ones(grid.n)), energy=energy,
                       gauge_momentum=gauge_momentum, improper=True, phi_func=_unit)


def _unit(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _l0_phi(g: GroundState, t: GeneratingTriplet, backend=None) -> np.ndarray:
    key = ("l0phi", id(t), backend)
    if key not in g._cache:
        g._cache[key] = apply_generator_quadrature(g.phi, t, tails=g.tails(), backend=backend).values
    return g._cache[key]


def potential_from_ground_state(g: GroundState, t: GeneratingTriplet, *,
                                backend: str | None = None) -> GridFunction:
    """``V = L0 phi / phi + E`` on the grid of ``g``."""
    return GridFunction(g.grid, _l0_phi(g, t, backend) / g.phi.values + g.energy)


def energy_from_decay(g: GroundState, t: GeneratingTriplet, edge_fraction: float = 0.05,
                      backend: str | None = None) -> tuple[float, float]:
    """Energy making ``V`` vanish at the grid edges.

    Returns ``(E, spread)`` where ``E = -mean(L0 phi / phi)`` over the outer
    ``edge_fraction`` of the grid and ``spread`` is the range of that ratio.
    """
    r = _l0_phi(g, t, backend) / g.phi.values
    n = g.grid.n
    k = max(2, int(edge_fraction * n))
    edge = np.concatenate([r[:k], r[-k:]])
    return float(-np.mean(edge)), float(np.ptp(edge))


@dataclass(frozen=True, eq=False)
class LevyTypeKernel:
    """State-dependent jump data of the transformed generator."""

    base: GeneratingTriplet
    ratio: Callable[[np.ndarray, np.ndarray], np.ndarray]  # phi(x+y)/phi(x)
    ground: GroundState | None = None
    bound: Callable[[np.ndarray], np.ndarray] | None = None  # M(x) >= sup_y ratio
    name: str = "kernel"
    params: dict | None = None  # closed-form description for the compiled sampler

    def gamma(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        _check_y(y)
        return np.where(np.abs(y) <= 1.0, 1.0 / self.ratio(x, y), 0.0)

    def lambda_density(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        _check_y(y)
        return self.ratio(x, y) * self.base.levy(y)


def _check_y(y):
    if np.any(y == 0):
        raise ValidationError("kernel undefined at y = 0")


def levy_type_kernel(g: GroundState, t: GeneratingTriplet) -> LevyTypeKernel:
    """Kernel built from a ground state; ``M(x) = max(phi) / phi(x)``."""
    pmax = float(np.max(g.phi.values))

    def ratio(x, y):
        return g.evaluate(x + y) / g.evaluate(x)

    params = {"kind": "algebraic", "a": 1.0, "q": 0.0} if g.phi_func is _unit else None
    return LevyTypeKernel(base=t, ratio=ratio, ground=g,
                          bound=lambda x: pmax / g.evaluate(x), name="grid", params=params)


def levy_type_kernel_eval(g, t: GeneratingTriplet, x: float, y: float) -> tuple[float, float]:
    """``(gamma(x, y), lambda_density(x, y))``; ``g`` is a state or a kernel."""
    k = g if isinstance(g, LevyTypeKernel) else levy_type_kernel(g, t)
    return float(k.gamma(x, y)), float(k.lambda_density(x, y))


def apply_levy_type_generator(g: GroundState, t: GeneratingTriplet, f: GridFunction, *,
                              route: str = "ratio", kernel: LevyTypeKernel | None = None,
                              backend: str | None = None) -> GridFunction:
    """Transformed generator ``L f``.

    ``route="ratio"``: two applications of ``L0`` and a division.
    ``route="kernel"``: direct quadrature of the Levy-type integral with the
    kernel's ratio ``phi(x+y)/phi(x)``; ``f`` must be compactly supported.
    """
    if route == "ratio":
        l0pf = apply_generator_quadrature(g.phi * f, t, backend=backend).values
        return GridFunction(g.grid, (l0pf - f.values * _l0_phi(g, t, backend)) / g.phi.values)
    if route != "kernel":
        raise ValueError(f"unknown route {route!r}")
    return _levy_type_by_kernel(kernel or levy_type_kernel(g, t), g.grid, t, f)


def _levy_type_by_kernel(kern: LevyTypeKernel, grid: Grid, t: GeneratingTriplet,
                         f: GridFunction, block: int = 256) -> GridFunction:
    n, h = grid.n, grid.h
    pad = _pad_for(n)
    fe = extend(f, pad)
    fv = np.real(fe.values)
    x = grid.x
    d1, d2 = derivative(fe, 1), derivative(fe, 2)
    # d/dy ratio(x, y) at y = 0 equals phi'/phi; eighth-order stencil on the kernel itself
    stencil = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
    b = sum(c * kern.ratio(x, np.full(n, (j - 4) * h)) for j, c in enumerate(stencil) if c) / h
    out = 0.5 * t.a * (d2 + 2.0 * b * d1)
    if t.levy.is_null:
        return GridFunction(grid, out)
    jw = jump_weights(t.levy, h, pad)
    acc = np.zeros(n)
    fi = fv[pad: pad + n]
    idx = np.arange(n)
    for k0 in range(1, jw.K + 1, block):
        ks = np.arange(k0, min(k0 + block, jw.K + 1))
        y = ks * h
        fp = fv[pad + idx[:, None] + ks[None, :]] - fi[:, None]
        fm = fv[pad + idx[:, None] - ks[None, :]] - fi[:, None]
        xx = x[:, None]
        rp = kern.ratio(xx, y[None, :])
        rm = kern.ratio(xx, -y[None, :])
        acc += (fp * rp + fm * rm) @ jw.c[ks - 1]
    yq, wq = _far_nodes(t.levy, float(jw.reach), defaults.FAR_TAIL_NODES)
    far_mass = (kern.ratio(x[:, None], yq[None, :]) + kern.ratio(x[:, None], -yq[None, :])) @ wq
    out = out + jw.w0 * (d2 + 2.0 * b * d1) + acc - fi * far_mass
    return GridFunction(grid, out)


def apply_hamiltonian(g: GroundState, t: GeneratingTriplet, f: GridFunction, *,
                      V: GridFunction | None = None, method: str = "quadrature",
                      backend: str | None = None) -> GridFunction:
    """``H f = -L0 f + V f``; ``V`` defaults to the ground-state potential.

    ``method="spectral"`` applies ``L0`` as a Fourier multiplier on the
    periodic grid (needed for plane waves, which have no algebraic tail).
    """
    if V is None:
        V = potential_from_ground_state(g, t, backend=backend)
    if method == "quadrature":
        l0f = apply_generator_quadrature(f, t, backend=backend)
    elif method == "spectral":
        l0f = apply_generator_spectral(f, spectral_symbol(t), periodic=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(f.grid, -l0f.values + V.values * f.values)


def gaussian_drift(g: GroundState) -> GridFunction:
    """``b = phi' / phi``."""
    ext = extend(g.phi, 4, g.tails())
    return GridFunction(g.grid, derivative(ext, 1) / g.phi.values)


__all__ = [
    "GroundState",
    "LevyTypeKernel",
    "PowerTail",
    "apply_hamiltonian",
    "apply_levy_type_generator",
    "energy_from_decay",
    "gaussian_drift",
    "improper_state",
    "levy_type_kernel",
    "levy_type_kernel_eval",
    "potential_from_ground_state",
]
