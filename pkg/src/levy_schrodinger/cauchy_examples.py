"""Closed-form ground states for the Cauchy generator ``eta(u) = -|u|``.

Two families with ``phi(x) ~ (a^2 + x^2)^(-q)``:

``student3`` (q = 1)
    ``rho`` is a Student law with three degrees of freedom,
    ``V = -2a/(x^2 + a^2)`` and ``E = -1/a``.
``cauchy1`` (q = 1/2)
    ``rho`` is the Cauchy law of scale ``a`` and ``E = 0``.  The logarithm in
    ``V`` is odd in ``x`` and is multiplied by ``x``, so ``V`` is even.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .doob import GroundState, LevyTypeKernel
from .errors import ValidationError
from .grid import Grid, GridFunction
from .levy_core import GeneratingTriplet, cauchy_triplet

NAMES = ("student3", "cauchy1")


@dataclass(frozen=True, eq=False)
class ExampleSet:
    """Pointwise closed forms for one preset.

    ``q`` is the algebraic decay exponent of ``phi``; ``x_max`` and ``n`` are
    the default grid for operator work on this preset.
    """

    name: str
    a: float
    q: float
    phi: Callable
    rho: Callable
    V: Callable
    energy: float
    gamma: Callable
    lambda_density: Callable
    x_max: float
    n: int
    evolution_x_max: float = 0.0
    evolution_n: int = 32768

    def ratio(self, x, y):
        """``phi(x+y) / phi(x)``."""
        x = np.asarray(x, dtype=float)
        a2 = self.a * self.a
        return ((a2 + x * x) / (a2 + (x + y) ** 2)) ** self.q

    def bound(self, x):
        """Thinning bound ``M(x) = sup_y phi(x+y)/phi(x)`` (attained at ``y = -x``)."""
        x = np.asarray(x, dtype=float)
        return ((self.a**2 + x * x) / self.a**2) ** self.q

    @property
    def params(self) -> dict:
        """Closed-form description used by the compiled path sampler."""
        return {"kind": "algebraic", "a": self.a, "q": self.q}

    def evolution_grid(self) -> Grid:
        """Wide grid for split-step runs; the periodic wraparound of the algebraic
        tail sets the stationarity floor (about 3e-4 for student3, 2e-3 for cauchy1)."""
        return Grid.symmetric(self.evolution_x_max or 400.0 * self.a, self.evolution_n)

    def triplet(self) -> GeneratingTriplet:
        return cauchy_triplet()

    def grid(self, x_max: float | None = None, n: int | None = None) -> Grid:
        return Grid.symmetric(x_max or self.x_max, n or self.n)

    def ground_state(self, grid: Grid | None = None) -> GroundState:
        grid = grid or self.grid()
        return GroundState(GridFunction(grid, self.phi(grid.x)), energy=self.energy,
                           phi_func=self.phi)

    def kernel(self) -> LevyTypeKernel:
        return LevyTypeKernel(base=self.triplet(), ratio=self.ratio, bound=self.bound,
                              name=self.name, params=self.params)

    def dump(self, out: str | Path, x_max: float = 5.0, n: int = 2048) -> list[Path]:
        """Write ``phi.csv``, ``rho.csv``, ``v.csv`` and ``meta.json`` to ``out``."""
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        # closed grid on [-x_max, x_max] so that both ends and x = 0 are sampled
        x = np.linspace(-x_max, x_max, n + 1)
        written = []
        for fname, fn in (("phi.csv", self.phi), ("rho.csv", self.rho), ("v.csv", self.V)):
            p = out / fname
            with open(p, "w") as fh:
                fh.write("x,value\n")
                for xi, vi in zip(x, fn(x)):
                    fh.write(f"{xi:.17g},{vi:.17g}\n")
            written.append(p)
        meta = {"name": self.name, "a": self.a, "energy": self.energy,
                "x_max": x_max, "n": n + 1, "files": [p.name for p in written]}
        p = out / "meta.json"
        p.write_text(json.dumps(meta, indent=2))
        written.append(p)
        return written


def _check_scale(a) -> float:
    a = float(a)
    if not np.isfinite(a) or a <= 0:
        raise ValidationError(f"scale a must be positive and finite, got {a}")
    return a


def _indicator(y):
    return (np.abs(y) <= 1.0).astype(float)


def _nonzero(y):
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise ValidationError("kernel undefined at y = 0")
    return y


def student3(a: float = 1.0) -> ExampleSet:
    a = _check_scale(a)
    a2 = a * a
    norm = np.sqrt(2 * a / np.pi)

    def phi(x):
        x = np.asarray(x, dtype=float)
        return norm * a / (a2 + x * x)

    def rho(x):
        x = np.asarray(x, dtype=float)
        return 2 / (a * np.pi) * (a2 / (a2 + x * x)) ** 2

    def V(x):
        x = np.asarray(x, dtype=float)
        return -2 * a / (x * x + a2)

    def gamma(x, y):
        y = _nonzero(y)
        return (a2 + (x + y) ** 2) / (a2 + np.asarray(x) ** 2) * _indicator(y)

    def lam(x, y):
        y = _nonzero(y)
        return (a2 + np.asarray(x) ** 2) / (a2 + (x + y) ** 2) / (np.pi * y * y)

    return ExampleSet("student3", a, 1.0, phi, rho, V, -1.0 / a, gamma, lam,
                      x_max=40.0 * a, n=4096, evolution_x_max=400.0 * a)


def _log_argument(x, a):
    arg = np.sqrt(1 + (x / a) ** 2) - x / a
    # analytically positive; for large positive x it is 1/(sqrt(1+s^2)+s)
    arg = np.where(x > 0, 1.0 / (np.sqrt(1 + (x / a) ** 2) + x / a), arg)
    if np.any(arg <= 0):
        raise ValidationError("log argument of the cauchy1 potential is not positive")
    return arg


def cauchy1(a: float = 1.0) -> ExampleSet:
    a = _check_scale(a)
    a2 = a * a
    norm = np.sqrt(a / np.pi)

    def phi(x):
        x = np.asarray(x, dtype=float)
        return norm / np.sqrt(a2 + x * x)

    def rho(x):
        x = np.asarray(x, dtype=float)
        return a / (np.pi * (a2 + x * x))

    def V(x):
        x = np.asarray(x, dtype=float)
        r = a2 + x * x
        return -2 / np.pi * (1 / np.sqrt(r) + x / r * np.log(_log_argument(x, a)))

    def gamma(x, y):
        y = _nonzero(y)
        return np.sqrt((a2 + (x + y) ** 2) / (a2 + np.asarray(x) ** 2)) * _indicator(y)

    def lam(x, y):
        y = _nonzero(y)
        return np.sqrt((a2 + np.asarray(x) ** 2) / (a2 + (x + y) ** 2)) / (np.pi * y * y)

    return ExampleSet("cauchy1", a, 0.5, phi, rho, V, 0.0, gamma, lam,
                      x_max=200.0 * a, n=8192, evolution_x_max=400.0 * a)


def get_example(name: str, a: float = 1.0) -> ExampleSet:
    if name == "student3":
        return student3(a)
    if name == "cauchy1":
        return cauchy1(a)
    raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(NAMES)}")


def gaussian_oscillator(grid: Grid) -> GroundState:
    """``phi = pi^(-1/4) exp(-x^2/2)`` with ``E = 1/2`` (Gaussian control, ``a = 1``)."""
    def phi(x):
        return np.pi ** -0.25 * np.exp(-0.5 * np.asarray(x, dtype=float) ** 2)

    return GroundState(GridFunction(grid, phi(grid.x)), energy=0.5, phi_func=phi,
                       floor=0.0)


__all__ = ["ExampleSet", "NAMES", "cauchy1", "gaussian_oscillator", "get_example", "student3"]
