"""Command-line interface.

Commands: ``eta``, ``potential``, ``evolve``, ``simulate``, ``examples dump``
and ``verify``.  Every command that writes files leaves one
``manifest.json`` in its output directory with the full flag set, seed,
version, wall time, numeric defaults and sha256 digests of inputs and outputs.

Exit codes::

    0  success
    1  verification failed
    2  usage or validation error
    3  quadrature failure
    4  numerical blow-up during evolution
    5  thinning-bound violations in the sampler
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, defaults
from .errors import BlowUpError, QuadratureError, ThinningBoundError, ValidationError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_QUADRATURE, EXIT_BLOWUP, EXIT_THINNING = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    """Bad flag combination detected after parsing."""


# -- helpers ------------------------------------------------------------------------

def _grid_arg(text: str) -> tuple[float, int]:
    try:
        xs, ns = text.split(",")
        x_max, n = float(xs), int(ns)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected XMAX,N, got {text!r}") from None
    if not (x_max > 0 and n >= 16):
        raise argparse.ArgumentTypeError("need XMAX > 0 and N >= 16")
    return x_max, n


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def read_config(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment, keys use flag names without dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


def write_manifest(out: Path, args, t0: float, inputs=(), results: dict | None = None) -> Path:
    """One ``manifest.json`` per output directory, digesting every other file in it."""
    outputs = {p.name: sha256(p) for p in sorted(out.iterdir())
               if p.is_file() and p.name != "manifest.json"}
    flags = {k: _jsonable(v) for k, v in vars(args).items() if k not in ("func",)}
    doc = {
        "command": args.command + (f" {args.action}" if getattr(args, "action", None) else ""),
        "argv": sys.argv[1:],
        "flags": flags,
        "seed": args.seed,
        "version": __version__,
        "inputs": {str(p): sha256(Path(p)) for p in inputs if p},
        "outputs": outputs,
        "wall_time_s": time.perf_counter() - t0,
        "defaults": defaults.as_dict(),
        "results": results or {},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, default=_jsonable))
    return path


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _out_dir(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _triplet(args):
    from .levy_core import GeneratingTriplet, get_measure, measure_from_table

    if args.measure_table:
        m = measure_from_table(args.measure_table, args.singularity_order)
    elif args.measure == "none":
        from .levy_core import NULL_MEASURE
        m = NULL_MEASURE
    else:
        m = get_measure(args.measure)
    if m.is_null and args.gaussian <= 0:
        raise UsageError("the generator is zero: give a Levy measure or --gaussian > 0")
    return GeneratingTriplet(a=args.gaussian, levy=m)


def _preset(args):
    from .cauchy_examples import get_example

    if args.a is None:
        raise UsageError("--a is required with --preset")
    return get_example(args.preset, args.a)


# -- commands -------------------------------------------------------------------------

def cmd_eta(args) -> int:
    from .levy_core import log_characteristic

    t0 = time.perf_counter()
    t = _triplet(args)
    us = args.u
    vals = [log_characteristic(t, u, tol=args.tol) for u in us]
    for u, v in zip(us, vals):
        _say(args, f"eta({u:g}) = {v:.12g}")
    if args.out:
        out = _out_dir(args, "")
        with open(out / "eta.csv", "w") as fh:
            fh.write("u,eta\n")
            for u, v in zip(us, vals):
                fh.write(f"{u:.17g},{v:.17g}\n")
        write_manifest(out, args, t0, [args.measure_table])
    return EXIT_OK


def cmd_potential(args) -> int:
    from .doob import GroundState, energy_from_decay, potential_from_ground_state
    from .grid import GridFunction

    t0 = time.perf_counter()
    results = {}
    inputs = []
    if args.preset:
        ex = _preset(args)
        grid = ex.grid(*args.grid) if args.grid else ex.grid()
        g0 = ex.ground_state(grid)
        t = ex.triplet()
    elif args.phi:
        t = _triplet(args)
        g0 = GroundState.load(args.phi)
        inputs.append(args.phi)
        if args.energy is not None:
            g0 = GroundState(g0.phi, energy=args.energy)
        elif not Path(args.phi).with_suffix(".meta.json").exists():
            E, spread = energy_from_decay(g0, t)
            g0 = GroundState(g0.phi, energy=E)
            results["energy_spread"] = spread
    else:
        raise UsageError("give --preset NAME or --phi FILE")
    V = potential_from_ground_state(g0, t)
    out = _out_dir(args, "potential_out")
    V.to_csv(out / "v.csv")
    i0 = int(np.argmin(np.abs(V.grid.x)))
    results.update({"energy": g0.energy, "V_at_0": float(V.values[i0].real),
                    "grid": [V.grid.x_min, V.grid.x_max, V.grid.n]})
    if args.preset:
        w = np.abs(V.grid.x) <= 5.0
        results["max_error_vs_closed_form"] = float(np.max(np.abs(V.values[w] - ex.V(V.grid.x[w]))))
    write_manifest(out, args, t0, inputs, results)
    _say(args, f"V(0) = {results['V_at_0']:.10g}, E = {g0.energy:.10g}; wrote {out / 'v.csv'}")
    return EXIT_OK


def cmd_evolve(args) -> int:
    from .evolution import EvolutionConfig, evolve, stationarity_residual, write_bundle
    from .grid import GridFunction
    from .levy_core import spectral_symbol

    t0 = time.perf_counter()
    inputs = []
    if args.preset:
        ex = _preset(args)
        grid = ex.evolution_grid() if not args.grid else ex.grid(*args.grid)
        psi0 = GridFunction(grid, ex.phi(grid.x))
        V = GridFunction(grid, ex.V(grid.x))
        E = ex.energy
        t = ex.triplet()
    elif args.psi0 and args.potential:
        psi0, V = GridFunction.from_csv(args.psi0), GridFunction.from_csv(args.potential)
        inputs += [args.psi0, args.potential]
        if args.energy is None:
            raise UsageError("--energy is required with --psi0/--potential")
        E = args.energy
        t = _triplet(args)
    else:
        raise UsageError("give --preset NAME or both --psi0 and --potential")
    if args.energy is not None:
        E = args.energy  # deliberate override: a wrong E shows up as a phase mismatch
    cfg = EvolutionConfig(dt=args.dt, t_final=args.t, record_every=args.record_every)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        snaps = evolve(psi0, V, spectral_symbol(t), cfg)
    for w in caught:
        _say(args, f"warning: {w.message}")
    res = stationarity_residual(psi0, E, snaps)
    out = _out_dir(args, "evolve_out")
    write_bundle(out, psi0, E, snaps)
    write_manifest(out, args, t0, inputs, {"stationarity_residual": res, "energy": E,
                                           "norm_drift": snaps.norm_drift,
                                           "edge_max": snaps.edge_max,
                                           "grid": [psi0.grid.x_min, psi0.grid.x_max, psi0.grid.n]})
    _say(args, f"stationarity residual {res:.3e}, norm drift {snaps.norm_drift:.2e}; "
               f"{len(snaps)} snapshots in {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .grid import GridFunction
    from .sampler import (SamplerConfig, density_cdf, empirical_invariant_distance,
                          reversibility_statistic, sample_levy_path, sample_levy_type_path)
    from scipy import stats

    t0 = time.perf_counter()
    if args.n_paths < 1:
        raise UsageError("--n-paths must be >= 1")
    cfg = SamplerConfig(args.n_paths, args.t, dt=args.dt, record_dt=args.record_dt, eps=args.eps,
                        seed=args.seed, scheme=args.scheme)
    results = {}
    if args.levy:
        pe = sample_levy_path(_triplet(args), cfg, x0=args.x0 or 0.0)
    else:
        ex = _preset(args) if args.preset else None
        if ex is None:
            raise UsageError("give --preset NAME or --levy")
        gr = ex.grid(*args.grid) if args.grid else ex.grid()
        rho = GridFunction(gr, ex.rho(gr.x))
        start = rho if args.x0 is None else args.x0
        pe = sample_levy_type_path(ex.kernel(), start, cfg)
        d = empirical_invariant_distance(pe, rho)
        p = stats.kstest(pe.paths[:, -1], density_cdf(rho)).pvalue
        results.update({"ks_statistic": d, "ks_pvalue": float(p),
                        "ks_pass": bool(d < defaults.KS_THRESHOLD)})
        if args.t >= 1.0 and pe.times[-1] >= 1.0 and args.n_paths >= 2:
            results["reversibility_statistic"] = reversibility_statistic(pe, 1.0)
    out = _out_dir(args, "simulate_out")
    pe.to_csv(out / "paths.csv")
    results.update({k: v for k, v in pe.meta.items()})
    write_manifest(out, args, t0, [], results)
    pe.check()
    msg = f"{pe.n_paths} paths to t = {args.t:g} in {out / 'paths.csv'}"
    if "ks_statistic" in results:
        msg += f"; KS {results['ks_statistic']:.4f} (p = {results['ks_pvalue']:.3g})"
    _say(args, msg)
    return EXIT_OK


def cmd_examples(args) -> int:
    from .cauchy_examples import get_example

    t0 = time.perf_counter()
    if args.a is None:
        raise UsageError("--a is required")
    out = _out_dir(args, f"{args.name}_a{args.a:g}")
    ex = get_example(args.name, args.a)
    x_max, n = (args.grid if args.grid else (args.xmax, args.n))
    ex.dump(out, x_max=x_max, n=n)
    write_manifest(out, args, t0)
    _say(args, f"wrote phi.csv, rho.csv, v.csv, meta.json to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    t0 = time.perf_counter()
    report = verify.run(args.suite, seed=args.seed, n_paths=args.n_paths, mutation=args.mutation,
                        progress=None if args.quiet else (lambda r: print(r.line(), flush=True)))
    if not args.quiet:
        print(report.text().splitlines()[-1])
    if args.out:
        out = _out_dir(args, "")
        report.write_json(out / "verify_report.json")
        (out / "verify_report.txt").write_text(report.text() + "\n")
        write_manifest(out, args, t0, results={"passed": report.passed, "failed": report.failed})
    return EXIT_OK if report.passed else EXIT_VERIFY


# -- parser -------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--out", help="output directory")
    g.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)
    g.add_argument("--grid", type=_grid_arg, metavar="XMAX,N", help="symmetric grid override")
    g.add_argument("--tol", type=float, default=defaults.QUAD_TOL,
                   help="absolute tolerance of scalar quadratures")
    g.add_argument("--quiet", action="store_true")
    g.add_argument("--config", help="key = value file; flags on the command line win")
    return p


def _measure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--measure", default="cauchy", help="registered Levy measure, or 'none'")
    p.add_argument("--measure-table", help="CSV table y,density of a custom Levy measure")
    p.add_argument("--singularity-order", type=float, default=1.0,
                   help="alpha in density ~ |y|^(-1-alpha) near 0, for --measure-table")
    p.add_argument("--gaussian", type=float, default=0.0, help="Gaussian coefficient a")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = _common()
    # global options go after the command name
    parser = argparse.ArgumentParser(prog="levy-schrodinger",
                                     description="Levy-Schrodinger ground states, evolution "
                                                 "and jump-process simulation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("eta", parents=[common], help="log characteristic eta(u)")
    _measure_flags(p)
    p.add_argument("--u", type=_floats, default=[0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    p.set_defaults(func=cmd_eta)
    subs["eta"] = p

    p = sub.add_parser("potential", parents=[common], help="potential of a ground state")
    _measure_flags(p)
    p.add_argument("--preset", choices=("student3", "cauchy1"))
    p.add_argument("--a", type=float, help="scale of the preset")
    p.add_argument("--phi", help="ground state CSV (x,re,im) with optional .meta.json")
    p.add_argument("--energy", type=float)
    p.set_defaults(func=cmd_potential)
    subs["potential"] = p

    p = sub.add_parser("evolve", parents=[common], help="split-step evolution")
    _measure_flags(p)
    p.add_argument("--preset", choices=("student3", "cauchy1"))
    p.add_argument("--a", type=float)
    p.add_argument("--psi0")
    p.add_argument("--potential")
    p.add_argument("--energy", type=float, help="energy of the reference phase (overrides preset)")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--record-every", type=int, default=10)
    p.set_defaults(func=cmd_evolve)
    subs["evolve"] = p

    p = sub.add_parser("simulate", parents=[common], help="simulate jump-process paths")
    _measure_flags(p)
    p.add_argument("--preset", choices=("student3", "cauchy1"))
    p.add_argument("--a", type=float)
    p.add_argument("--levy", action="store_true", help="simulate the Levy process itself")
    p.add_argument("--n-paths", type=int, default=10_000)
    p.add_argument("--t", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--record-dt", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--scheme", choices=("auto", "exact", "compound"), default="auto")
    p.add_argument("--x0", type=float, help="fixed start (default: stationary start)")
    p.set_defaults(func=cmd_simulate)
    subs["simulate"] = p

    p = sub.add_parser("examples", parents=[common], help="closed-form example data")
    p.add_argument("action", choices=("dump",))
    p.add_argument("--name", choices=("student3", "cauchy1"), required=True)
    p.add_argument("--a", type=float)
    p.add_argument("--xmax", type=float, default=5.0)
    p.add_argument("--n", type=int, default=2048)
    p.set_defaults(func=cmd_examples)
    subs["examples"] = p

    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.add_argument("--n-paths", type=int, default=100_000)
    p.add_argument("--mutation", choices=("invert-ratio",),
                   help="self-test: break the jump kernel; the suite must fail")
    p.set_defaults(func=cmd_verify)
    subs["verify"] = p
    return parser, subs


def _apply_config(parser, subs, argv, args):
    cfg = read_config(args.config)
    sp = subs[args.command]
    known = {a.dest: a for a in sp._actions}
    for k, v in cfg.items():
        if k not in known or k in ("config", "help"):
            raise UsageError(f"unknown config key {k!r}")
        if isinstance(known[k], argparse._StoreTrueAction):
            cfg[k] = v.lower() in ("1", "true", "yes", "on")
    sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser, subs = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)  # argparse exits 2 on usage errors
    try:
        if args.config:
            args = _apply_config(parser, subs, argv, args)
        return args.func(args)
    except UsageError as exc:
        subs[args.command].print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ThinningBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THINNING
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
