"""Wall-clock comparison of the numba and numpy kernels.

Run with ``python3 benchmarks/bench_backends.py [--repeat R]``.  Each kernel
is warmed up once (numba compiles or loads its cache) and then timed; the
table reports the best of ``R`` runs and the max difference between the
two backends.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from levy_schrodinger import _backend
from levy_schrodinger.cauchy_examples import cauchy1, student3
from levy_schrodinger.dirichlet import bump, form_doob
from levy_schrodinger.grid import GridFunction
from levy_schrodinger.levy_core import cauchy_triplet
from levy_schrodinger.sampler import SamplerConfig, sample_levy_type_path
from levy_schrodinger.spectral_ops import apply_generator_quadrature


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    t = cauchy_triplet()
    ex = student3()
    g0 = ex.ground_state()
    gr = g0.grid
    f = GridFunction(gr, bump(0.3, 1.2)(gr.x))
    g = GridFunction(gr, bump(-0.4, 0.9, 2.0)(gr.x))
    rho = GridFunction(gr, ex.rho(gr.x))
    ex1 = cauchy1()
    yield ("generator quadrature (n=4096)",
           lambda b: apply_generator_quadrature(g0.phi, t, tails=g0.tails(), backend=b).values)
    yield "transformed form (n=4096)", lambda b: np.array([form_doob(f, g, g0, t, backend=b)])
    yield ("sampler student3 (2000 paths, T=2)",
           lambda b: sample_levy_type_path(ex.kernel(), rho, SamplerConfig(2000, 2.0, backend=b)).paths)
    gr1 = ex1.grid()
    rho1 = GridFunction(gr1, ex1.rho(gr1.x))
    yield ("sampler cauchy1 (2000 paths, T=2)",
           lambda b: sample_levy_type_path(ex1.kernel(), rho1, SamplerConfig(2000, 2.0, backend=b)).paths)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _backend.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':<38s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases():
        tn, a = _best(lambda: fn("numba"), args.repeat)
        tp, b = _best(lambda: fn("numpy"), args.repeat)
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:<38s} {tn:9.4f} {tp:9.4f} {tp / tn:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
