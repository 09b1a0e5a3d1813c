"""Split-step propagation of ``i dPsi/dt = (-L0 + V) Psi`` on a periodic grid.

One Strang step::

    psi <- exp(-i V dt/2) psi
    psi <- IFFT(exp(i eta(u) dt) FFT(psi))
    psi <- exp(-i V dt/2) psi

Every factor has unit modulus, so the discrete L2 norm is preserved up to
rounding.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import defaults
from .errors import BlowUpError, ValidationError
from .grid import GridFunction
from .levy_core import SpectralSymbol


@dataclass(frozen=True)
class EvolutionConfig:
    """Time stepping for :func:`evolve`.

    Parameters
    ----------
    dt : float
        Step size.
    t_final : float
        End time; rounded to a whole number of steps.
    record_every : int
        Keep a snapshot every this many steps (the initial state is always kept).
    potential_floor : float
        ``V`` is clipped from below at this value.
    """

    dt: float
    t_final: float
    record_every: int = 1
    potential_floor: float = defaults.POTENTIAL_FLOOR
    edge_fraction: float = defaults.EVOLUTION_EDGE_FRACTION
    edge_tol: float = defaults.EVOLUTION_EDGE_TOL

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= 0:
            raise ValidationError(f"t_final must be non-negative, got {self.t_final}")
        if self.t_final > 0 and self.dt > self.t_final:
            raise ValidationError("dt exceeds t_final")
        if int(self.record_every) < 1:
            raise ValidationError("record_every must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))


class Snapshots(list):
    """Recorded states; ``times[i]`` and ``norms[i]`` belong to ``self[i]``."""

    def __init__(self, items=(), times=(), norms=(), edge_max=0.0):
        super().__init__(items)
        self.times = np.asarray(times, dtype=float)
        self.norms = np.asarray(norms, dtype=float)
        self.edge_max = float(edge_max)

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0]))) if self.norms.size else 0.0


def _edge_level(v: np.ndarray, frac: float) -> float:
    k = max(1, int(frac * v.size))
    return float(max(np.max(np.abs(v[:k])), np.max(np.abs(v[-k:]))))


def evolve(psi0: GridFunction, V: GridFunction, sym: SpectralSymbol, cfg: EvolutionConfig,
           ) -> Snapshots:
    """Strang split-step evolution; returns the recorded snapshots.

    Raises :class:`BlowUpError` with the step index if the state stops being
    finite.  Warns once if ``|psi|`` exceeds ``cfg.edge_tol`` in the outer
    ``cfg.edge_fraction`` of the grid at a recorded time.
    """
    grid = psi0.grid
    if V.grid != grid:
        raise ValidationError("psi0 and V live on different grids")
    if not V.is_real:
        raise ValidationError("potential must be real")
    v = np.maximum(np.real(V.values), cfg.potential_floor)
    half = np.exp(-0.5j * cfg.dt * v)
    kin = np.exp(1j * cfg.dt * sym(grid.frequencies()))
    psi = np.asarray(psi0.values, dtype=complex).copy()
    h = grid.h

    items, times, norms = [GridFunction(grid, psi.copy())], [0.0], [np.sqrt(h * np.sum(np.abs(psi) ** 2))]
    edge = _edge_level(psi, cfg.edge_fraction)
    for step in range(1, cfg.steps + 1):
        psi *= half
        psi = np.fft.ifft(kin * np.fft.fft(psi))
        psi *= half
        if step % cfg.record_every == 0 or step == cfg.steps:
            if not np.all(np.isfinite(psi)):
                raise BlowUpError(f"non-finite state at step {step}")
            items.append(GridFunction(grid, psi.copy()))
            times.append(step * cfg.dt)
            norms.append(np.sqrt(h * np.sum(np.abs(psi) ** 2)))
            edge = max(edge, _edge_level(psi, cfg.edge_fraction))
    if edge > cfg.edge_tol:
        warnings.warn(f"|psi| reaches {edge:.3g} in the outer {cfg.edge_fraction:.0%} of the grid "
                      f"(> {cfg.edge_tol:g}); periodic wraparound may matter", RuntimeWarning,
                      stacklevel=2)
    return Snapshots(items, times, norms, edge)


def stationarity_residual(psi0: GridFunction, E: float, snapshots: Snapshots) -> float:
    """``max_t || Psi(t) - exp(-i E t) psi0 ||_2`` over the snapshots."""
    p0 = np.asarray(psi0.values, dtype=complex)
    h = psi0.grid.h
    worst = 0.0
    for t, s in zip(snapshots.times, snapshots):
        d = s.values - np.exp(-1j * E * t) * p0
        worst = max(worst, float(np.sqrt(h * np.sum(np.abs(d) ** 2))))
    return worst


def write_bundle(out: str | Path, psi0: GridFunction, E: float, snapshots: Snapshots,
                 extra: dict | None = None) -> Path:
    """One CSV per snapshot plus ``snapshots.json`` (times, norms, residuals, digests)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    p0 = np.asarray(psi0.values, dtype=complex)
    h = psi0.grid.h
    entries = []
    for i, (t, s) in enumerate(zip(snapshots.times, snapshots)):
        name = f"snapshot_{i:05d}.csv"
        s.to_csv(out / name)
        res = float(np.sqrt(h * np.sum(np.abs(s.values - np.exp(-1j * E * t) * p0) ** 2)))
        entries.append({"file": name, "t": float(t), "norm": float(snapshots.norms[i]),
                        "residual": res,
                        "sha256": hashlib.sha256((out / name).read_bytes()).hexdigest()})
    doc = {"energy": E, "snapshots": entries,
           "stationarity_residual": max(e["residual"] for e in entries),
           "norm_drift": snapshots.norm_drift, "edge_max": snapshots.edge_max}
    doc.update(extra or {})
    path = out / "snapshots.json"
    path.write_text(json.dumps(doc, indent=2))
    return path


__all__ = ["EvolutionConfig", "Snapshots", "evolve", "stationarity_residual", "write_bundle"]
