"""Command-line front end: ``multifrac {measure,deriv,verify,solve,bench}``.

Exit codes: 0 success, 1 check or solve failure, 2 config or usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import statistics
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, parse_sizes
from .errors import (
    BackendDomainMismatch,
    ConfigError,
    DomainMismatch,
    MultifracError,
    NotDiagonalizable,
    OrderOutOfRange,
    TooLarge,
    UnknownSpec,
)
from .fractional import SPECTRAL, GrunwaldLetnikov, one_sided
from .grid import Domain, GridFunction, parse_function_spec, sample
from .measure import eval_q, eval_weight, local_scaling_exponent
from .solver import PotentialSpec, solve_linear, solve_nonlinear
from .verify import run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
USAGE_ERRORS = (ConfigError, UnknownSpec, DomainMismatch, BackendDomainMismatch, OrderOutOfRange, TooLarge, NotDiagonalizable)


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(path: Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _out_path(args, cfg: RunConfig, default_name: str) -> Path:
    if args.output is not None:
        return Path(args.output)
    return cfg.output_dir / default_name


# subcommands


def cmd_measure(args, cfg: RunConfig) -> int:
    if cfg.profile is None:
        raise ConfigError("profile: measure needs a profile, not flat")
    if args.points < 2:
        raise ConfigError("--points: need at least 2")
    lo, hi = args.x_min, args.x_max
    if not hi > lo:
        raise ConfigError("--x-max: must exceed --x-min")
    spacing = args.spacing or ("log" if lo > 0 else "linear")
    if spacing == "log":
        if lo <= 0:
            raise ConfigError("--spacing log needs --x-min > 0")
        x = np.geomspace(lo, hi, args.points)
    else:
        x = np.linspace(lo, hi, args.points)
    if np.any(x == 0.0):
        raise ConfigError("--x-min/--x-max/--points: the grid hits x = 0, where v and alpha_eff are undefined")
    p = cfg.profile
    q, v, a = eval_q(p, x), eval_weight(p, x), local_scaling_exponent(p, x)
    buf = io.StringIO()
    buf.write("x,q,v,alpha_eff\n")
    for row in zip(x, q, v, a):
        buf.write(",".join(f"{c:.17g}" for c in row) + "\n")
    _emit(_out_path(args, cfg, "measure.csv"), buf.getvalue())
    return EXIT_OK


def cmd_deriv(args, cfg: RunConfig) -> int:
    op = cfg.operator(args.operator)
    d = cfg.domain if args.n is None else replace(cfg.domain, n=args.n)
    try:
        f = sample(parse_function_spec(args.function), d)
    except ValueError as exc:
        raise ConfigError(f"--function: {exc}") from None
    out = op.apply(f)
    buf = io.StringIO()
    buf.write("x,re_in,im_in,re_out,im_out\n")
    for xj, a, b in zip(d.x, f.values, out.values):
        buf.write(f"{xj:.17g},{a.real:.17g},{a.imag:.17g},{b.real:.17g},{b.imag:.17g}\n")
    _emit(_out_path(args, cfg, f"deriv_{args.operator}.csv"), buf.getvalue())
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    suite = cfg.suite
    if args.checks is not None:
        suite = replace(suite, checks=tuple(c.strip() for c in args.checks.split(",") if c.strip()))
    if args.seed is not None:
        suite = replace(suite, seed=args.seed)
    if args.threads is not None:
        suite = replace(suite, threads=args.threads)
    start = time.time()
    report = run_suite(suite)
    elapsed = time.time() - start
    out_dir = Path(args.output_dir) if args.output_dir else cfg.output_dir
    text = report.to_text()
    write_atomic(out_dir / "verify_report.csv", report.to_csv())
    write_atomic(out_dir / "verify_report.txt", text)
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
    write_atomic(out_dir / "verify.log", f"{stamp} {report.summary} in {elapsed:.2f} s\n")
    if not args.quiet:
        sys.stdout.write(text)
    return EXIT_OK if report.all_passed else EXIT_FAIL


def cmd_solve(args, cfg: RunConfig) -> int:
    block = cfg.solve
    name = args.operator or block.operator
    if name not in cfg.operators:
        key = "--operator" if args.operator else "solve.operator"
        raise ConfigError(f"{key}: no operator named {name!r}")
    op = cfg.operators[name]
    if op.implicit:
        raise ConfigError("no variational solve path for implicit operators")
    mode = args.mode or block.mode
    d = block.domain
    source = None
    if block.source is not None:
        source = sample(block.source, d) * block.source_scale
    pot = PotentialSpec(block.mass2, block.quartic, source)
    if mode == "linear":
        if block.quartic != 0.0:
            raise ConfigError("solve.potential.quartic: must be 0 for a linear solve")
        result = solve_linear(op, pot, d, block.path)
    else:
        guess = sample(block.guess, d) if block.guess is not None else GridFunction(d, np.zeros(d.n), "zero")
        result = solve_nonlinear(op, pot, guess, block.tol, block.max_iter)
    out_dir = Path(args.output_dir) if args.output_dir else cfg.output_dir
    write_atomic(out_dir / "solution.csv", result.phi.to_csv())
    summary = result.summary(op) | {"operator_name": name, "mode": mode}
    write_atomic(out_dir / "solve_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        print(f"{mode} solve with {name}: residual {result.residual_norm:.3e} after {result.iterations} iterations")
    return EXIT_OK if result.converged else EXIT_FAIL


def _bench_backend(kind: str, cfg: RunConfig):
    if kind == "spectral":
        return SPECTRAL
    if kind == "gl":
        return GrunwaldLetnikov(cfg.suite.gl_truncation)
    return cfg.suite.quadrature


def bench_rows(cfg: RunConfig, sizes, repeats: int):
    """(backend, n, median wall time, max error vs spectral) per cell."""
    b = cfg.bench
    rows = []
    for kind in b.backends:
        backend = _bench_backend(kind, cfg)
        for n in sizes:
            d = Domain(b.a, b.b, n)
            f = sample(b.function, d).values
            ref = one_sided(d, f, b.alpha, 1)
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                out = one_sided(d, f, b.alpha, 1, backend)
                times.append(time.perf_counter() - t0)
            rows.append((kind, n, statistics.median(times), float(np.max(np.abs(out - ref)))))
    return rows


def observed_orders(rows) -> dict[str, float]:
    orders = {}
    for kind in dict.fromkeys(r[0] for r in rows):
        pts = [(n, e) for k, n, _, e in rows if k == kind and e > 0]
        if len(pts) >= 2:
            n, e = np.array(pts).T
            orders[kind] = float(-np.polyfit(np.log(n), np.log(e), 1)[0])
    return orders


def cmd_bench(args, cfg: RunConfig) -> int:
    sizes = parse_sizes(args.sizes) if args.sizes else cfg.bench.sizes
    repeats = args.repeats if args.repeats is not None else cfg.bench.repeats
    if repeats < 1:
        raise ConfigError("--repeats: must be at least 1")
    rows = bench_rows(cfg, sizes, repeats)
    buf = io.StringIO()
    buf.write("backend,n,wall_time,max_error_vs_spectral\n")
    for kind, n, t, e in rows:
        buf.write(f"{kind},{n},{t:.6e},{e:.6e}\n")
    out_dir = Path(args.output_dir) if args.output_dir else cfg.output_dir
    write_atomic(out_dir / "bench.csv", buf.getvalue())
    orders = observed_orders(rows)
    write_atomic(out_dir / "bench_orders.json", json.dumps(orders, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        sys.stdout.write(buf.getvalue())
        for kind, order in orders.items():
            print(f"observed order {kind}: {order:.3f}")
    return EXIT_OK


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multifrac", description=__doc__.splitlines()[0])
    parser.add_argument("--config", "-c", help="YAML run configuration (defaults are built in)")
    parser.add_argument("--quiet", "-q", action="store_true", help="suppress console output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="tabulate q, v and the local scaling exponent")
    p.add_argument("--x-min", type=float, default=0.01)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--output", "-o", help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("deriv", help="apply a named operator to a function spec")
    p.add_argument("--operator", required=True)
    p.add_argument("--function", required=True, help="e.g. 'plane_wave:k=1' or 'gaussian:sigma=0.5'")
    p.add_argument("--n", type=int, help="override the domain size")
    p.add_argument("--output", "-o", help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_deriv)

    p = sub.add_parser("verify", help="run the property verification suite")
    p.add_argument("--checks", help="comma-separated glob patterns over check names")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker count (default: MULTIFRAC_THREADS or up to 4)")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="solve the static field equation")
    p.add_argument("--operator", help="override solve.operator")
    p.add_argument("--mode", choices=("linear", "nonlinear"))
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="compare fractional-derivative backends")
    p.add_argument("--sizes", help="comma-separated powers of two")
    p.add_argument("--repeats", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MultifracError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
