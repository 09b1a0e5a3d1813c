"""Whole-library verification suite.

Each check reproduces one closed-form identity or statistical property and
reports a value against a threshold.  ``suite="fast"`` runs the deterministic
identities; ``suite="full"`` adds the Monte Carlo checks at ``n_paths``
(default 1e5).

``mutation="invert-ratio"`` swaps ``phi(x+y)/phi(x)`` for its reciprocal in
the preset kernels.  It exists to show that the kernel checks catch a wrong
jump kernel; a correct build passes every check without it.
"""

from __future__ import annotations

import json
import tempfile
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import defaults
from .cauchy_examples import NAMES, gaussian_oscillator, get_example
from .dirichlet import bump, duality_suite, invariance_residual, random_bumps
from .doob import (LevyTypeKernel, apply_hamiltonian, apply_levy_type_generator, improper_state,
                   levy_type_kernel, potential_from_ground_state)
from .evolution import EvolutionConfig, evolve, stationarity_residual
from .grid import Grid, GridFunction
from .levy_core import cauchy_triplet, gaussian_triplet, log_characteristic, spectral_symbol
from .sampler import (SamplerConfig, empirical_char_function, empirical_invariant_distance,
                      reversibility_statistic, sample_levy_path, sample_levy_type_path)
from .spectral_ops import apply_generator_quadrature, product_rule_residual

MUTATIONS = ("invert-ratio",)
WINDOW = 5.0  # closed forms are compared on |x| <= WINDOW


@dataclass
class CheckResult:
    key: str
    criterion: int | None
    description: str
    value: float
    threshold: float
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        crit = f"[{self.criterion:2d}]" if self.criterion else "[--]"
        return f"{tag} {crit} {self.key:<28s} value={self.value:.3e} threshold={self.threshold:.1e}"


@dataclass
class Report:
    suite: str
    results: list[CheckResult]
    mutation: str | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> list[str]:
        return [r.key for r in self.results if not r.passed]

    def text(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append(f"{sum(r.passed for r in self.results)}/{len(self.results)} checks passed"
                     + (f"; failed: {', '.join(self.failed)}" if self.failed else ""))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "mutation": self.mutation, "passed": self.passed,
                "failed": self.failed, "results": [asdict(r) for r in self.results],
                "defaults": defaults.as_dict()}

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, default=float))


# -- helpers ----------------------------------------------------------------------

def _window(grid: Grid) -> np.ndarray:
    return np.abs(grid.x) <= WINDOW


def preset_kernel(name: str, a: float = 1.0, mutation: str | None = None) -> LevyTypeKernel:
    """The compiled-sampler kernel of a preset, optionally mutated."""
    ex = get_example(name, a)
    k = ex.kernel()
    if mutation is None:
        return k
    if mutation != "invert-ratio":
        raise ValueError(f"unknown mutation {mutation!r}")
    return LevyTypeKernel(base=k.base, ratio=lambda x, y: 1.0 / ex.ratio(x, y), bound=ex.bound,
                          name=k.name, params={"kind": "algebraic", "a": ex.a, "q": -ex.q})


def _rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# -- checks -----------------------------------------------------------------------

def check_symbol(ctx) -> CheckResult:
    t = cauchy_triplet()
    us = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
    err = max(abs(log_characteristic(t, u) + abs(u)) for u in us)
    return CheckResult("cauchy_symbol", 1, "log characteristic of the Cauchy triplet is -|u|",
                       err, 1e-6, err < 1e-6)


def _potential(name: str, crit: int, tol: float):
    def run(ctx) -> CheckResult:
        ex = get_example(name)
        g0 = ex.ground_state()
        V = potential_from_ground_state(g0, ex.triplet())
        w = _window(g0.grid)
        err = float(np.max(np.abs(V.values[w] - ex.V(g0.grid.x[w]))))
        return CheckResult(f"potential_{name}", crit, "reconstructed potential vs closed form",
                           err, tol, err < tol, detail={"grid": [g0.grid.x_max, g0.grid.n]})
    return run


def check_eigen(ctx) -> CheckResult:
    worst = {}
    t = cauchy_triplet()
    for name in NAMES:
        ex = get_example(name)
        g0 = ex.ground_state()
        x = g0.grid.x
        hphi = apply_hamiltonian(g0, t, g0.phi, V=GridFunction(g0.grid, ex.V(x))).values
        w = _window(g0.grid)
        worst[name] = float(np.linalg.norm(hphi[w] - ex.energy * g0.phi.values[w])
                            / np.linalg.norm(g0.phi.values[w]))
    grid = Grid.symmetric(10.0, 1024)
    g0 = gaussian_oscillator(grid)
    V = GridFunction(grid, 0.5 * grid.x ** 2)
    hphi = apply_hamiltonian(g0, gaussian_triplet(1.0), g0.phi, V=V).values
    w = _window(grid)
    worst["gaussian"] = float(np.linalg.norm(hphi[w] - 0.5 * g0.phi.values[w])
                              / np.linalg.norm(g0.phi.values[w]))
    val = max(worst.values())
    return CheckResult("eigen_relation", 4, "||H phi - E phi|| / ||phi|| with closed-form V",
                       val, 1e-3, val < 1e-3, detail=worst)


def check_product_rule(ctx) -> CheckResult:
    ex = get_example("student3")
    g0 = ex.ground_state()
    rng = np.random.default_rng(ctx["seed"])
    vals = [product_rule_residual(g0.phi, GridFunction(g0.grid, b(g0.grid.x)), ex.triplet())
            for b in random_bumps(5, rng)]
    val = max(vals)
    return CheckResult("product_rule", 5, "L0(phi f) product rule on 5 random bumps",
                       val, 1e-6, val < 1e-6, detail={"residuals": vals})


def check_duality(ctx) -> CheckResult:
    t = cauchy_triplet()
    out = {}
    ex = get_example("student3")
    out["levy"] = duality_suite(None, t, ex.grid(), n_pairs=20, seed=ctx["seed"])
    for name in NAMES:
        ex = get_example(name)
        out[name] = duality_suite(ex.ground_state(), t, ex.grid(), n_pairs=20, seed=ctx["seed"])
    val = max(r["max_relative_residual"] for r in out.values())
    sym = max(r["max_symmetry_defect"] for r in out.values())
    ok = (val < 1e-3 and sym < 1e-9 and all(r["positive_semidefinite"] for r in out.values())
          and all(r["cauchy_schwarz"] for r in out.values()))
    detail = {k: {kk: r[kk] for kk in ("max_relative_residual", "max_symmetry_defect",
                                      "positive_semidefinite", "cauchy_schwarz")}
              for k, r in out.items()}
    return CheckResult("form_duality", 6, "|E(f,g) + <Lf,g>| / (||f|| ||g||), 20 pairs each",
                       val, 1e-3, ok, detail=detail)


def check_invariance(ctx) -> CheckResult:
    t = cauchy_triplet()
    vals = {}
    for name in NAMES:
        ex = get_example(name)
        g0 = ex.ground_state()
        f = GridFunction(g0.grid, bump(0.3, 1.5)(g0.grid.x))
        vals[name] = invariance_residual(f, g0, t)
    val = max(vals.values())
    return CheckResult("mu_invariance", 7, "|int L f dmu| for a bump f", val, 1e-6, val < 1e-6,
                       detail=vals)


def check_evolution(ctx) -> CheckResult:
    t = cauchy_triplet()
    sym = spectral_symbol(t)
    detail = {}
    ok = True
    val = 0.0
    for name, tol in (("student3", 1e-3), ("cauchy1", 1e-2)):
        ex = get_example(name)
        grid = ex.evolution_grid()
        psi0 = GridFunction(grid, ex.phi(grid.x))
        V = GridFunction(grid, ex.V(grid.x))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            snaps = evolve(psi0, V, sym, EvolutionConfig(dt=0.01, t_final=5.0, record_every=10))
        res = stationarity_residual(psi0, ex.energy, snaps)
        detail[name] = {"residual": res, "norm_drift": snaps.norm_drift}
        ok = ok and res < tol and snaps.norm_drift < 1e-9
        val = max(val, res / tol)
    return CheckResult("stationary_evolution", 8,
                       "stationarity residual / tolerance over t in [0, 5]; norm drift < 1e-9",
                       val, 1.0, ok, detail=detail)


def check_kernel_closure(ctx) -> CheckResult:
    """The jump kernel against closed forms: density and both generator routes."""
    t = cauchy_triplet()
    worst = 0.0
    detail = {}
    rng = np.random.default_rng(ctx["seed"])
    for name in NAMES:
        ex = get_example(name)
        k = preset_kernel(name, mutation=ctx["mutation"])
        x = rng.uniform(-4, 4, 64)
        y = rng.uniform(-3, 3, 64)
        y[y == 0] = 0.5
        dens = _rel_l2(k.lambda_density(x, y), ex.lambda_density(x, y))
        g0 = ex.ground_state()
        f = GridFunction(g0.grid, bump(0.2, 1.2)(g0.grid.x))
        w = _window(g0.grid)
        ratio_route = apply_levy_type_generator(g0, t, f).values
        kernel_route = apply_levy_type_generator(g0, t, f, route="kernel", kernel=k).values
        routes = _rel_l2(kernel_route[w], ratio_route[w])
        detail[name] = {"density": dens, "routes": routes}
        worst = max(worst, dens, routes)
    return CheckResult("kernel_closure", None, "jump kernel vs closed form and ratio route",
                       worst, 1e-4, worst < 1e-4, detail=detail)


def check_degeneracy(ctx) -> CheckResult:
    t = cauchy_triplet()
    grid = Grid.symmetric(40.0, 1024)
    g1 = improper_state(grid)
    f = GridFunction(grid, bump(0.0, 2.0)(grid.x))
    l_gen = apply_levy_type_generator(g1, t, f, route="kernel").values
    l0 = apply_generator_quadrature(f, t).values
    gen_err = _rel_l2(l_gen, l0)
    v_err = float(np.max(np.abs(potential_from_ground_state(g1, t).values)))
    cfg = SamplerConfig(100, 2.0, scheme="compound", seed=ctx["seed"])
    p1 = sample_levy_type_path(levy_type_kernel(g1, t), 0.0, cfg)
    p2 = sample_levy_path(t, cfg)
    same = bool(np.array_equal(p1.paths, p2.paths))
    val = max(gen_err, v_err)
    return CheckResult("degeneracy_chain", 12,
                       "phi = 1: L equals L0, V vanishes, samplers agree path by path",
                       val, 1e-9, val < 1e-9 and same,
                       detail={"generator": gen_err, "potential": v_err, "paths_identical": same})


def check_figures(ctx) -> CheckResult:
    want = {"student3": (-2.0, 2 / np.pi), "cauchy1": (-2 / np.pi, 1 / np.pi)}
    detail = {}
    worst = 0.0
    with tempfile.TemporaryDirectory() as tmp:
        for name, (vmin, rmax) in want.items():
            out = Path(tmp) / name
            get_example(name).dump(out, x_max=5.0, n=2048)
            v = np.loadtxt(out / "v.csv", delimiter=",", skiprows=1)
            r = np.loadtxt(out / "rho.csv", delimiter=",", skiprows=1)
            iv, ir = int(np.argmin(v[:, 1])), int(np.argmax(r[:, 1]))
            err = max(abs(v[iv, 1] - vmin), abs(v[iv, 0]), abs(r[ir, 1] - rmax), abs(r[ir, 0]))
            detail[name] = {"min_V": v[iv].tolist(), "max_rho": r[ir].tolist()}
            worst = max(worst, err)
    return CheckResult("figure_data", 13, "dumped extrema at x = 0 match the closed forms",
                       worst, 1e-9, worst < 1e-9, detail=detail)


def check_char_function(ctx) -> CheckResult:
    t = cauchy_triplet()
    pe = sample_levy_path(t, SamplerConfig(ctx["n_paths"], 2.0, record_dt=1.0, seed=ctx["seed"]))
    worst = 0.0
    detail = {}
    for u, lag in ((1.0, 1.0), (1.0, 2.0), (2.0, 1.0)):
        est = empirical_char_function(pe, u, lag)
        exact = np.exp(-lag * abs(u))
        z = max(abs(est.value.real - exact) / est.stderr_real, abs(est.value.imag) / est.stderr_imag)
        detail[f"u={u:g},lag={lag:g}"] = {"estimate": [est.value.real, est.value.imag],
                                          "exact": exact, "z": z}
        worst = max(worst, z)
    return CheckResult("levy_char_function", 9, "standard errors from exp(lag eta(u))",
                       worst, 3.0, worst < 3.0, detail=detail)


def _stationary_ensemble(ctx, name):
    key = ("ensemble", name)
    if key not in ctx:
        ex = get_example(name)
        gr = ex.grid()
        rho = GridFunction(gr, ex.rho(gr.x))
        k = preset_kernel(name, mutation=ctx["mutation"])
        cfg = SamplerConfig(ctx["n_paths"], 5.0, seed=ctx["seed"])
        ctx[key] = sample_levy_type_path(k, rho, cfg)
    return ctx[key]


def check_ks(ctx) -> CheckResult:
    detail = {}
    ok = True
    val = 0.0
    for name in NAMES:
        ex, wrong = get_example(name), get_example(name, 2.0)
        try:
            pe = _stationary_ensemble(ctx, name)
        except Exception as exc:  # thinning violations under a broken kernel
            detail[name] = {"error": str(exc)}
            ok = False
            val = 1.0
            continue
        gr, gw = ex.grid(), wrong.grid()
        d = empirical_invariant_distance(pe, GridFunction(gr, ex.rho(gr.x)))
        dn = empirical_invariant_distance(pe, GridFunction(gw, wrong.rho(gw.x)))
        detail[name] = {"ks": d, "negative_control_ks": dn}
        ok = ok and d < defaults.KS_THRESHOLD and dn > defaults.KS_THRESHOLD
        val = max(val, d)
    return CheckResult("levy_type_invariance", 10, "KS distance of X_T to rho (control: a doubled)",
                       val, defaults.KS_THRESHOLD, ok, detail=detail)


def check_reversibility(ctx) -> CheckResult:
    detail = {}
    val = 0.0
    for name in NAMES:
        try:
            pe = _stationary_ensemble(ctx, name)
        except Exception as exc:
            detail[name] = {"error": str(exc)}
            val = 1.0
            continue
        detail[name] = reversibility_statistic(pe, 1.0)
        val = max(val, detail[name])
    return CheckResult("reversibility", 11, "KS distance between (X_s, X_t) and (X_t, X_s)",
                       val, 0.05, val < 0.05, detail=detail)


FAST: list[Callable] = [
    check_symbol,
    _potential("student3", 2, 1e-3),
    _potential("cauchy1", 3, 1e-2),
    check_eigen,
    check_product_rule,
    check_duality,
    check_invariance,
    check_evolution,
    check_kernel_closure,
    check_degeneracy,
    check_figures,
]
MONTE_CARLO: list[Callable] = [check_char_function, check_ks, check_reversibility]


def run(suite: str = "fast", *, seed: int = defaults.DEFAULT_SEED, n_paths: int = 100_000,
        mutation: str | None = None, progress: Callable[[CheckResult], None] | None = None) -> Report:
    """Run a suite and return the report; ``progress`` is called after each check."""
    if suite not in ("fast", "full"):
        raise ValueError(f"unknown suite {suite!r}")
    if mutation is not None and mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}")
    checks = FAST + (MONTE_CARLO if suite == "full" else [])
    ctx = {"seed": seed, "n_paths": int(n_paths), "mutation": mutation}
    results = []
    for fn in checks:
        t0 = time.perf_counter()
        res = fn(ctx)
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if progress:
            progress(res)
    return Report(suite, results, mutation)


__all__ = ["CheckResult", "MUTATIONS", "Report", "preset_kernel", "run"]
