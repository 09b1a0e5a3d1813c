"""Uniform 1-D grids, sampled functions, tail models and file formats."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import defaults
from .errors import ValidationError


@dataclass(frozen=True)
class Grid:
    """``n`` points ``x_min + i h``, ``h = (x_max - x_min) / n`` (periodic layout)."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValidationError(f"grid needs x_min < x_max, got {self.x_min}, {self.x_max}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValidationError(f"grid size must be a power of two >= 8, got {self.n}")

    @classmethod
    def symmetric(cls, x_max: float, n: int) -> "Grid":
        return cls(-float(x_max), float(x_max), int(n))

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    @property
    def center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def index_of(self, x0: float) -> int:
        return int(round((x0 - self.x_min) / self.h))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n,):
            raise ValidationError(f"expected {self.grid.n} samples, got shape {v.shape}")
        bad = ~np.isfinite(v)
        if bad.any():
            raise ValidationError(f"non-finite sample at index {int(np.argmax(bad))}")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)

    def real(self) -> "GridFunction":
        return GridFunction(self.grid, np.real(self.values).astype(float))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "GridFunction", weight: np.ndarray | None = None) -> complex:
        w = 1.0 if weight is None else weight
        return complex(self.grid.h * np.sum(np.conj(self.values) * other.values * w))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.with_values(self.values / _vals(other))

    def __neg__(self):
        return self.with_values(-self.values)

    # -- file formats --------------------------------------------------
    def to_csv(self, path: str | Path) -> None:
        vals = np.asarray(self.values, dtype=complex)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "re", "im"])
            for xi, v in zip(self.grid.x, vals):
                w.writerow([f"{xi:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])

    @classmethod
    def from_csv(cls, path: str | Path) -> "GridFunction":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"x", "re", "im"}:
            raise ValidationError(f"{path}: expected header x,re,im")
        x = np.array([float(r["x"]) for r in rows])
        v = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        n = x.size
        if n < 2:
            raise ValidationError(f"{path}: too few rows")
        h = (x[-1] - x[0]) / (n - 1)
        if not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12 * max(1.0, abs(h))):
            raise ValidationError(f"{path}: grid is not uniform")
        grid = Grid(float(x[0]), float(x[0] + n * h), n)
        if not np.any(v.imag):
            v = v.real
        return cls(grid, v)

    def to_json(self, path: str | Path | None = None) -> str:
        vals = np.asarray(self.values, dtype=complex)
        doc = {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "n": self.grid.n,
               "values": [[float(v.real), float(v.imag)] for v in vals]}
        text = json.dumps(doc)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> "GridFunction":
        if isinstance(source, str) and source.lstrip().startswith("{"):
            text = source
        else:
            text = Path(source).read_text()
        doc = json.loads(text)
        grid = Grid(float(doc["x_min"]), float(doc["x_max"]), int(doc["n"]))
        v = np.array([complex(re, im) for re, im in doc["values"]])
        if not np.any(v.imag):
            v = v.real
        return cls(grid, v)


def _vals(other):
    return other.values if isinstance(other, GridFunction) else other


def sample(grid: Grid, f: Callable) -> GridFunction:
    """Evaluate ``f`` at the grid points (vectorized call, scalar fallback)."""
    x = grid.x
    with np.errstate(all="ignore"):
        try:
            vals = np.asarray(f(x))
            if vals.shape != x.shape:
                vals = np.broadcast_to(vals, x.shape).copy()
        except (TypeError, ValueError):
            vals = np.array([f(float(xi)) for xi in x])
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(f"non-finite sample at index {i} (x={x[i]:g})")
    return GridFunction(grid, vals)


# -- algebraic tails ----------------------------------------------------------

@dataclass(frozen=True)
class PowerTail:
    """``f(x) ~ coef * |x - center|**(-power)`` on one side of the grid."""

    coef: float
    power: float
    center: float

    def __call__(self, x):
        s = np.abs(np.asarray(x, dtype=float) - self.center)
        if self.coef == 0.0:
            return np.zeros_like(s)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            return self.coef * np.power(s, -self.power)


ZERO_TAIL = PowerTail(0.0, 0.0, 0.0)


def fit_tail(x: np.ndarray, f: np.ndarray, center: float, side: str,
             fraction: float = defaults.TAIL_FIT_FRACTION) -> PowerTail:
    """Fit ``coef * s**(-p)`` to the outer ``fraction`` of a real sample.

    Identically-zero edges give :data:`ZERO_TAIL`.  A sign change in the
    fit window (oscillating tail) also falls back to zero.
    """
    n = x.size
    k = max(defaults.TAIL_FIT_MIN_POINTS, int(fraction * n))
    sl = slice(n - k, n) if side == "right" else slice(0, k)
    xs, fs = x[sl], f[sl]
    scale = np.max(np.abs(f)) if f.size else 0.0
    if scale == 0.0 or np.all(np.abs(fs) <= 1e-300) or abs(fs[-1 if side == "right" else 0]) < 1e-14 * scale:
        return ZERO_TAIL
    if np.any(np.sign(fs) != np.sign(fs[0])) or np.any(fs == 0):
        return ZERO_TAIL
    s = np.abs(xs - center)
    ls, lf = np.log(s), np.log(np.abs(fs))
    p = -np.polyfit(ls, lf, 1)[0]
    p = max(p, 0.0)
    edge = -1 if side == "right" else 0
    coef = fs[edge] * s[edge] ** p  # anchor the tail at the edge sample
    return PowerTail(float(coef), float(p), float(center))


@dataclass(frozen=True, eq=False)
class Extension:
    """Grid samples padded with their fitted tails.

    ``values[pad + i]`` is grid sample ``i``; ``pad`` points on each side
    come from the tail models.  Complex inputs carry separate real and
    imaginary tails.
    """

    grid: Grid
    values: np.ndarray
    pad: int
    tails: tuple  # ((left_re, right_re), (left_im, right_im) | None)

    @property
    def x(self) -> np.ndarray:
        g = self.grid
        return g.x_min + g.h * (np.arange(self.values.size) - self.pad)

    def tail_eval(self, x: np.ndarray) -> np.ndarray:
        """Tail model at off-grid points ``x`` (either side)."""
        x = np.asarray(x, dtype=float)
        (lre, rre), im = self.tails
        out = np.where(x < self.grid.center, lre(x), rre(x))
        if im is not None:
            lim, rim = im
            out = out + 1j * np.where(x < self.grid.center, lim(x), rim(x))
        return out


def extend(f: GridFunction, pad: int, tails=None) -> Extension:
    g = f.grid
    x = g.x
    vals = f.values
    complex_in = np.iscomplexobj(vals) and np.any(vals.imag)
    if tails is None:
        re = np.real(vals)
        t_re = (fit_tail(x, re, g.center, "left"), fit_tail(x, re, g.center, "right"))
        t_im = None
        if complex_in:
            im = np.imag(vals)
            t_im = (fit_tail(x, im, g.center, "left"), fit_tail(x, im, g.center, "right"))
        tails = (t_re, t_im)
    ext = Extension(g, np.empty(0), pad, tails)
    xl = g.x_min - g.h * np.arange(pad, 0, -1)
    xr = g.x_min + g.h * (g.n + np.arange(pad))
    left, right = ext.tail_eval(xl), ext.tail_eval(xr)
    dtype = complex if complex_in else float
    full = np.concatenate([left, vals, right]).astype(dtype)
    if not complex_in:
        full = np.real(full)
    return Extension(g, full, pad, tails)


# -- derivatives --------------------------------------------------------------

_D1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
_D2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])


def _stencil(ext: Extension, coeffs: np.ndarray, order: int) -> np.ndarray:
    v = ext.values
    p, n = ext.pad, ext.grid.n
    if p < 4:
        raise ValueError("extension pad must be >= 4 for the derivative stencil")
    out = np.zeros(n, dtype=v.dtype)
    for j, c in enumerate(coeffs):
        if c:
            out += c * v[p - 4 + j: p - 4 + j + n]
    return out / ext.grid.h ** order


def derivative(ext: Extension, order: int = 1) -> np.ndarray:
    """Eighth-order central difference on the grid points of an extension."""
    if order == 1:
        return _stencil(ext, _D1, 1)
    if order == 2:
        return _stencil(ext, _D2, 2)
    raise ValueError("order must be 1 or 2")
