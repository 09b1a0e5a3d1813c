"""Monte Carlo paths of symmetric Levy processes and of their ground-state transforms.

Levy paths use exact stable increments when the law has a closed form
(Cauchy, Brownian) and otherwise compound Poisson jumps above ``eps`` plus a
Gaussian of variance ``dt * sigma^2(eps)`` for the jumps below.

Levy-type paths run the same construction on the kernel
``phi(x+y)/phi(x) nu(dy)`` by thinning (see :mod:`._paths`).  The small jumps
contribute the drift ``b_eps(x) = int_0^eps y [r(x, y) - r(x, -y)] nu(y) dy``;
the compensator of the large jumps vanishes identically because
``gamma * lambda = 1_{|y|<=1} nu`` is symmetric.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, stats
from scipy.special import roots_jacobi

from . import _paths, defaults
from ._backend import resolve
from .doob import GroundState, LevyTypeKernel
from .errors import ThinningBoundError, ValidationError
from .grid import GridFunction, fit_tail
from .levy_core import GeneratingTriplet, LevyMeasure, small_jump_variance


@dataclass(frozen=True)
class SamplerConfig:
    """Simulation settings.

    Parameters
    ----------
    n_paths : int
    t_final : float
    dt : float
        Step of the small-jump drift and Gaussian part; jump times are exact.
    record_dt : float, optional
        Spacing of recorded times (multiple of ``dt``); default ``min(0.5, t_final)``.
    eps : float, optional
        Small-jump cutoff; default ``1e-3 * scale`` of the kernel.
    """

    n_paths: int
    t_final: float
    dt: float = 0.01
    record_dt: float | None = None
    eps: float | None = None
    seed: int = defaults.DEFAULT_SEED
    backend: str | None = None
    scheme: str = "auto"
    max_proposals_per_step: int = 10_000_000
    proposal_budget: float = 1e11

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise ValidationError(f"n_paths must be >= 1, got {self.n_paths}")
        if not (self.t_final > 0 and self.dt > 0):
            raise ValidationError("t_final and dt must be positive")
        if self.eps is not None and not self.eps > 0:
            raise ValidationError("eps must be positive")
        if self.scheme not in ("auto", "exact", "compound"):
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        rdt = self.recording_step
        if abs(rdt / self.dt - round(rdt / self.dt)) > 1e-9:
            raise ValidationError("record_dt must be a multiple of dt")
        if abs(self.t_final / rdt - round(self.t_final / rdt)) > 1e-9:
            raise ValidationError("t_final must be a multiple of record_dt")

    @property
    def recording_step(self) -> float:
        return self.record_dt if self.record_dt is not None else min(0.5, self.t_final)

    @property
    def steps_per_record(self) -> int:
        return int(round(self.recording_step / self.dt))

    @property
    def times(self) -> np.ndarray:
        n = int(round(self.t_final / self.recording_step))
        return self.recording_step * np.arange(n + 1)


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """``paths[i, j]`` is the position of path ``i`` at ``times[j]``."""

    times: np.ndarray
    paths: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if self.paths.shape[1] != t.size:
            raise ValidationError("paths and times disagree in length")
        if not np.all(np.isfinite(self.paths)):
            raise ValidationError("non-finite path entries")

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def bound_violations(self) -> int:
        return int(self.meta.get("bound_violations", 0))

    @property
    def valid(self) -> bool:
        return self.bound_violations == 0 and int(self.meta.get("overflowed_steps", 0)) == 0

    def check(self) -> "PathEnsemble":
        """Raise :class:`ThinningBoundError` if the run is flagged invalid."""
        if not self.valid:
            raise ThinningBoundError(
                f"thinning bound violated {self.bound_violations} times, "
                f"{self.meta.get('overflowed_steps', 0)} steps hit the proposal cap")
        return self

    def lag_index(self, lag: float) -> int:
        dt = self.times[1] - self.times[0]
        k = int(round(lag / dt))
        if k < 1 or abs(k * dt - lag) > 1e-9 * max(1.0, lag) or k >= self.times.size:
            raise ValidationError(f"lag {lag} is not a positive multiple of the record spacing")
        return k

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path_id", "t", "x"])
            for i in range(self.n_paths):
                for t, x in zip(self.times, self.paths[i]):
                    w.writerow([i, f"{t:.17g}", f"{x:.17g}"])

    @classmethod
    def from_csv(cls, path: str | Path, seed: int = 0) -> "PathEnsemble":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        ids = data[:, 0].astype(int)
        times = np.unique(data[:, 1])
        paths = np.empty((ids.max() + 1, times.size))
        paths[ids, np.searchsorted(times, data[:, 1])] = data[:, 2]
        return cls(times, paths, seed)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times).tobytes())
        h.update(np.ascontiguousarray(self.paths).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class ThinningBound:
    """``M(x)`` with ``phi(x+y)/phi(x) <= M(x)`` for every proposal ``y``."""

    bound: Callable

    def check(self, kernel: LevyTypeKernel, x: np.ndarray, y: np.ndarray) -> int:
        """Number of ``(x, y)`` pairs where the acceptance ratio exceeds 1."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return int(np.sum(kernel.ratio(x, y) > self.bound(x) * (1 + 1e-12)))


class CharFunctionEstimate(NamedTuple):
    value: complex
    stderr_real: float
    stderr_imag: float


# -- parameter assembly ---------------------------------------------------------

def _power_law(m: LevyMeasure) -> tuple[float, float]:
    if m.power_law is None:
        raise ValidationError(
            f"jump sampling needs a power-law Levy measure c|y|^(-1-alpha); {m.name!r} is not")
    c, alpha = m.power_law
    if not 0 < alpha < 2:
        raise ValidationError(f"power-law index must lie in (0, 2), got {alpha}")
    return float(c), float(alpha)


def small_jump_nodes(m: LevyMeasure, eps: float, nodes: int = defaults.SMALL_JUMP_NODES):
    """Nodes ``y_i`` and weights with ``sum w_i D(y_i) ~ int_0^eps D(y) y nu(y) dy / y``.

    For ``D(y) = r(x, y) - r(x, -y)`` this is the small-jump drift.  The
    weight ``y^(1-alpha)`` is integrated exactly (Gauss-Jacobi).
    """
    c, alpha = _power_law(m)
    beta = 1.0 - alpha
    xj, wj = roots_jacobi(nodes, 0.0, beta)
    v = 0.5 * (xj + 1.0)
    wv = wj / 2.0 ** (1.0 + beta)
    return eps * v, c * eps ** (1.0 - alpha) * wv / v


def _phi_params(k: LevyTypeKernel | None, P: np.ndarray) -> np.ndarray:
    """Fill the ``phi`` part of the parameter vector; returns the log-phi table."""
    if k is None:
        P[_paths.KIND], P[_paths.A], P[_paths.Q] = 0.0, 1.0, 0.0
        return np.zeros(2)
    if k.params is not None and k.params.get("kind") == "algebraic":
        P[_paths.KIND] = 0.0
        P[_paths.A] = float(k.params["a"])
        P[_paths.Q] = float(k.params["q"])
        P[_paths.SPLIT] = 1.0 if P[_paths.Q] > 0 else 0.0
        return np.zeros(2)
    g: GroundState | None = k.ground
    if g is None:
        raise ValidationError("kernel has neither closed-form parameters nor a ground state")
    (left, right), _ = g.tails()
    if left.coef <= 0 or right.coef <= 0:
        raise ValidationError("ground-state tails must be positive for path sampling")
    grid = g.grid
    tlog = np.log(g.phi.values)
    P[_paths.KIND] = 1.0
    P[_paths.TX0], P[_paths.TH] = grid.x_min, grid.h
    P[_paths.TLC], P[_paths.TLP] = np.log(left.coef), left.power
    P[_paths.TRC], P[_paths.TRP] = np.log(right.coef), right.power
    P[_paths.TCEN] = left.center
    P[_paths.LOGMAX] = float(np.max(tlog))
    return np.ascontiguousarray(tlog)


def _assemble(t: GeneratingTriplet, k: LevyTypeKernel | None, cfg: SamplerConfig, eps: float,
              use_phi: bool):
    P = np.zeros(_paths.NPARAM)
    tlog = _phi_params(k, P)
    P[_paths.DT] = cfg.dt
    P[_paths.GA] = t.a
    P[_paths.USE_PHI] = 1.0 if use_phi else 0.0
    P[_paths.MAXP] = float(cfg.max_proposals_per_step)
    P[_paths.EPS] = eps
    sigma2 = 0.0
    dy = dw = np.zeros(0)
    if not t.levy.is_null:
        c, alpha = _power_law(t.levy)
        P[_paths.C], P[_paths.ALPHA] = c, alpha
        P[_paths.JUMPS] = 1.0
        sigma2 = small_jump_variance(t.levy, eps)
        dy, dw = small_jump_nodes(t.levy, eps)
        expected = cfg.n_paths * cfg.t_final * t.levy.tail_mass(eps) * 2.0
        if expected > cfg.proposal_budget:
            suggest = eps * (expected / cfg.proposal_budget) ** (1.0 / alpha)
            raise ValidationError(
                f"jump rate too high: about {expected:.3g} proposals exceed the budget "
                f"{cfg.proposal_budget:.3g}; try eps >= {suggest:.3g}")
    P[_paths.SD] = np.sqrt((sigma2 + t.a) * cfg.dt)
    return P, tlog, dy, dw, sigma2


def _key(seed: int) -> np.uint64:
    with np.errstate(over="ignore"):
        return _paths._mix_np(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]


def _x0_array(x0, n: int, seed: int) -> np.ndarray:
    if isinstance(x0, GridFunction):
        return stationary_start(x0, n, seed)
    arr = np.asarray(x0, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValidationError(f"x0 must be a scalar or have {n} entries")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("x0 contains non-finite entries")
    return arr.copy()


def _default_eps(t: GeneratingTriplet, k: LevyTypeKernel | None) -> float:
    scale = 1.0
    if k is not None and k.params is not None:
        scale = float(k.params.get("a", 1.0))
    return defaults.DEFAULT_EPS_FACTOR * scale


def _meta(cfg, scheme, eps, sigma2, stats_=None, extra=None) -> dict:
    m = {"scheme": scheme, "eps": eps, "small_jump_variance": sigma2, "dt": cfg.dt,
         "record_dt": cfg.recording_step, "n_paths": cfg.n_paths, "t_final": cfg.t_final,
         "backend": resolve(cfg.backend)}
    if stats_ is not None:
        m.update({"bound_violations": int(stats_[0]), "proposals": int(stats_[1]),
                  "accepted": int(stats_[2]), "overflowed_steps": int(stats_[3])})
    m.update(extra or {})
    return m


# -- samplers -----------------------------------------------------------------

def sample_levy_path(t: GeneratingTriplet, cfg: SamplerConfig, x0=0.0) -> PathEnsemble:
    """Paths of the Levy process with triplet ``t``.

    ``scheme="auto"`` uses exact increments for the Cauchy measure and pure
    Brownian motion, otherwise compound Poisson plus Gaussian.
    """
    if not t.symmetric:
        raise ValidationError("only symmetric triplets are sampled")
    x = _x0_array(x0, cfg.n_paths, cfg.seed)
    key = _key(cfg.seed)
    spr, nrec = cfg.steps_per_record, cfg.times.size
    cauchy = t.levy.power_law is not None and t.levy.power_law[1] == 1.0
    exact_ok = t.levy.is_null or cauchy
    scheme = cfg.scheme
    if scheme == "auto":
        scheme = "exact" if exact_ok else "compound"
    if scheme == "exact" and not exact_ok:
        raise ValidationError("no exact increment law for this measure; use scheme='compound'")
    if scheme == "exact":
        scale_dt = np.pi * t.levy.power_law[0] * cfg.dt if cauchy else 0.0
        sd = np.sqrt(t.a * cfg.dt)
        fn = _paths.run_exact_cauchy_nb if resolve(cfg.backend) == "numba" else _paths.run_exact_cauchy_np
        out = fn(x, key, scale_dt, sd, spr, nrec, 0)
        return PathEnsemble(cfg.times, out, cfg.seed, _meta(cfg, "exact", None, 0.0))
    eps = cfg.eps or _default_eps(t, None)
    P, tlog, dy, dw, sigma2 = _assemble(t, None, cfg, eps, use_phi=False)
    out, st = _run(x, key, P, tlog, dy, dw, spr, nrec, cfg.backend)
    return PathEnsemble(cfg.times, out, cfg.seed, _meta(cfg, "compound", eps, sigma2, st))


def sample_levy_type_path(k: LevyTypeKernel, x0, cfg: SamplerConfig) -> PathEnsemble:
    """Paths of the Levy-type process with kernel ``k``.

    ``x0`` is a scalar, an array of starting points, or a density
    :class:`GridFunction` to start from (inverse-transform sampling).
    """
    t = k.base
    if not t.symmetric:
        raise ValidationError("only symmetric base triplets are sampled")
    x = _x0_array(x0, cfg.n_paths, cfg.seed)
    eps = cfg.eps or _default_eps(t, k)
    P, tlog, dy, dw, sigma2 = _assemble(t, k, cfg, eps, use_phi=True)
    comp = compensator_integral(k, x[: min(8, x.size)])
    if np.max(np.abs(comp)) > 1e-9:
        raise ThinningBoundError(f"compensator does not vanish: {np.max(np.abs(comp)):.3g}")
    out, st = _run(x, _key(cfg.seed), P, tlog, dy, dw, cfg.steps_per_record, cfg.times.size,
                   cfg.backend)
    return PathEnsemble(cfg.times, out, cfg.seed,
                        _meta(cfg, "thinning", eps, sigma2, st, {"kernel": k.name}))


def _run(x, key, P, tlog, dy, dw, spr, nrec, backend):
    fn = _paths.run_paths_nb if resolve(backend) == "numba" else _paths.run_paths_np
    return fn(x, key, P, tlog, np.asarray(dy, float), np.asarray(dw, float), spr, nrec, 0)


# -- scheme diagnostics --------------------------------------------------------

def small_jump_drift(k: LevyTypeKernel, x, eps: float) -> np.ndarray:
    """The drift ``b_eps(x)`` exactly as the sampler evaluates it."""
    dy, dw = small_jump_nodes(k.base.levy, eps)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.array([np.dot(dw, k.ratio(xi, dy) - k.ratio(xi, -dy)) for xi in x])


def small_jump_drift_quad(k: LevyTypeKernel, x: float, eps: float) -> float:
    """Independent adaptive quadrature of ``b_eps(x)``."""
    nu = k.base.levy

    def f(y):
        return y * (k.ratio(x, y) - k.ratio(x, -y)) * nu(y)

    return integrate.quad(f, 0.0, eps, epsabs=1e-15, epsrel=1e-12, limit=200)[0]


def compensator_integral(k: LevyTypeKernel, x) -> np.ndarray:
    """``int_{|y|<=1} gamma(x, y) y lambda(x, dy)`` by quadrature; zero for symmetric nu."""
    out = []
    for xi in np.atleast_1d(np.asarray(x, dtype=float)):
        def f(y, xi=xi):
            return y * (k.gamma(xi, y) * k.lambda_density(xi, y)
                        - k.gamma(xi, -y) * k.lambda_density(xi, -y))
        # integrand is y (nu(y) - nu(-y)); split off the origin where nu is singular
        out.append(integrate.quad(f, 1e-12, 1.0, limit=200)[0])
    return np.array(out)


def jump_drift(k: LevyTypeKernel, x: float, eps: float, n_props: int = 200_000,
               seed: int = 0) -> tuple[float, float, float]:
    """Scheme versus quadrature for ``int_{eps<|y|<=1} y lambda(x, dy)``.

    Returns ``(monte_carlo, standard_error, quadrature)``.  The Monte Carlo
    value uses the sampler's own proposal and acceptance steps.
    """
    P = np.zeros(_paths.NPARAM)
    tlog = _phi_params(k, P)
    c, alpha = _power_law(k.base.levy)
    P[_paths.C], P[_paths.ALPHA], P[_paths.EPS] = c, alpha, eps
    mc, se = _paths.jump_moments_nb(float(x), _key(seed), P, tlog, int(n_props))

    def f(y):
        return y * (k.ratio(x, y) - k.ratio(x, -y)) * k.base.levy(y)

    q = integrate.quad(f, eps, 1.0, limit=200, epsabs=1e-13)[0]
    return float(mc), float(se), float(q)


# -- starting points and statistics ----------------------------------------------

@dataclass(frozen=True, eq=False)
class _GridLaw:
    edges: np.ndarray  # cell edges
    cdf_edges: np.ndarray
    left: tuple  # (coef, power, center, mass) of the density tail
    right: tuple


def _grid_law(rho: GridFunction) -> _GridLaw:
    g = rho.grid
    v = np.real(rho.values)
    if np.any(v < 0):
        raise ValidationError("density has negative samples")
    x = g.x
    edges = np.concatenate([x - 0.5 * g.h, [x[-1] + 0.5 * g.h]])
    tails = []
    for side, s_edge in (("left", abs(edges[0] - g.center)), ("right", abs(edges[-1] - g.center))):
        tl = fit_tail(x, v, g.center, side)
        mass = 0.0
        if tl.coef > 0:
            if tl.power <= 1.0:
                raise ValidationError("density tail is not integrable")
            mass = tl.coef * s_edge ** (1 - tl.power) / (tl.power - 1)
        tails.append((tl.coef, tl.power, tl.center, mass, s_edge))
    body = np.concatenate([[0.0], np.cumsum(v * g.h)])
    total = tails[0][3] + body[-1] + tails[1][3]
    cdf = (tails[0][3] + body) / total
    left = tails[0][:3] + (tails[0][3] / total, tails[0][4])
    right = tails[1][:3] + (tails[1][3] / total, tails[1][4])
    return _GridLaw(edges, cdf, left, right)


def density_cdf(rho: GridFunction) -> Callable:
    """CDF of a grid density (piecewise constant cells plus algebraic tails)."""
    law = _grid_law(rho)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, law.edges, law.cdf_edges)
        c, p, cen, m, s0 = law.left
        lo = x < law.edges[0]
        if m > 0:
            out[lo] = m * (np.abs(x[lo] - cen) / s0) ** (1 - p)
        c, p, cen, m, s0 = law.right
        hi = x > law.edges[-1]
        if m > 0:
            out[hi] = 1.0 - m * (np.abs(x[hi] - cen) / s0) ** (1 - p)
        return out

    return cdf


def stationary_start(rho: GridFunction, n: int, seed: int) -> np.ndarray:
    """``n`` inverse-transform samples of a grid density (stream 4 of each path)."""
    law = _grid_law(rho)
    u = _paths.uniforms_np(_paths.bases_np(_key(seed), np.arange(n), _paths.START),
                           np.zeros(n, dtype=np.int64))
    x = np.interp(u, law.cdf_edges, law.edges)
    c, p, cen, m, s0 = law.left
    lo = u < law.cdf_edges[0]
    if m > 0 and lo.any():
        x[lo] = cen - s0 * (u[lo] / m) ** (1.0 / (1 - p))
    c, p, cen, m, s0 = law.right
    hi = u > law.cdf_edges[-1]
    if m > 0 and hi.any():
        x[hi] = cen + s0 * ((1.0 - u[hi]) / m) ** (1.0 / (1 - p))
    return x


def empirical_invariant_distance(pe: PathEnsemble, rho, time_index: int = -1) -> float:
    """Kolmogorov-Smirnov distance between the ensemble at one time and ``rho``.

    ``rho`` is a density :class:`GridFunction` or a CDF callable.
    """
    cdf = density_cdf(rho) if isinstance(rho, GridFunction) else rho
    return float(stats.kstest(pe.paths[:, time_index], cdf).statistic)


def reversibility_statistic(pe: PathEnsemble, lag: float) -> float:
    """KS distance between ``X_t + X_{t+lag}`` split by the sign of ``X_t - X_{t+lag}``.

    Pairs from every recorded start time are pooled.  For an exchangeable
    pair the two conditional laws coincide.
    """
    k = pe.lag_index(lag)
    a = pe.paths[:, :-k].ravel()
    b = pe.paths[:, k:].ravel()
    s, d = a + b, a - b
    pos, neg = s[d > 0], s[d < 0]
    if pos.size == 0 or neg.size == 0:
        return 1.0
    return float(stats.ks_2samp(pos, neg).statistic)


def empirical_char_function(pe: PathEnsemble, u: float, lag: float,
                            start_index: int = 0) -> CharFunctionEstimate:
    """Mean of ``exp(i u (X_{t+lag} - X_t))`` over paths, with standard errors."""
    if pe.n_paths < 1000:
        raise ValidationError("need at least 1000 paths for a characteristic-function estimate")
    k = pe.lag_index(lag)
    if start_index + k >= pe.times.size:
        raise ValidationError("lag reaches past the last recorded time")
    inc = pe.paths[:, start_index + k] - pe.paths[:, start_index]
    c, s = np.cos(u * inc), np.sin(u * inc)
    n = inc.size
    return CharFunctionEstimate(complex(c.mean(), s.mean()), float(c.std(ddof=1) / np.sqrt(n)),
                                float(s.std(ddof=1) / np.sqrt(n)))


__all__ = [
    "CharFunctionEstimate",
    "PathEnsemble",
    "SamplerConfig",
    "ThinningBound",
    "compensator_integral",
    "density_cdf",
    "empirical_char_function",
    "empirical_invariant_distance",
    "jump_drift",
    "reversibility_statistic",
    "sample_levy_path",
    "sample_levy_type_path",
    "small_jump_drift",
    "small_jump_drift_quad",
    "small_jump_nodes",
    "stationary_start",
]
