"""Command-line front end.

    mfbergman gamma --symbol "exp(1)" --lambda 1 --p 2
    mfbergman spectrum --symbol "pow(1)"
    mfbergman synth --density "bump(1,4)" --grid 40,256,40,128,2 --out f.csv
    mfbergman analyze f.csv --out phi.csv
    mfbergman norm f.csv
    mfbergman toeplitz-apply --symbol "exp(1)" --density "bump(1,4)"
    mfbergman verify all

Exit status: 0 success, 1 a numerical tolerance was missed, 2 bad usage or
unreadable input.  Numbers are written with ``%.17g``.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import densities, toeplitz, transforms, verify
from .core import (
    PHYSICAL,
    BoundaryDensity,
    SpaceParams,
    csv_header,
    lq_norm,
    make_grid,
    mixed_norm,
    read_density,
    read_grid_function,
    write_density,
    write_grid_function,
)
from .grammar import SpecParseError

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2

DEFAULT_GRID = "40,1024,40,512,2"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: SpaceParams
    grid_spec: tuple
    out: str | None
    tol: float | None

    def grid(self):
        return make_grid(*self.grid_spec)


def _grid_spec(text):
    parts = text.split(",")
    if len(parts) != 5:
        raise UsageError("--grid wants x_halfwidth,n_x,y_max,n_y,grading, got %r" % text)
    try:
        xh, nx, ym, ny, gr = (float(p) for p in parts)
    except ValueError:
        raise UsageError("--grid entries must be numbers, got %r" % text) from None
    if nx != int(nx) or ny != int(ny):
        raise UsageError("--grid node counts must be integers")
    spec = (xh, int(nx), ym, int(ny), gr)
    try:
        make_grid(*spec)
    except ValueError as exc:
        raise UsageError("bad --grid: %s" % exc) from None
    return spec


def _config(args) -> RunConfig:
    try:
        params = SpaceParams(args.lam, args.p, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.tol is not None and not args.tol > 0:
        raise UsageError("--tol must be positive")
    return RunConfig(params, _grid_spec(args.grid), args.out, args.tol)


def _range(text, name):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError("%s wants lo,hi" % name) from None
    if not 0 < lo < hi:
        raise UsageError("%s needs 0 < lo < hi" % name)
    return lo, hi


def _emit(cfg: RunConfig, text: str, stdout):
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _csv(writer, obj) -> str:
    buf = io.StringIO()
    writer(buf, obj)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _density(text, grid) -> BoundaryDensity:
    form = densities.parse_density(text)
    if isinstance(form, BoundaryDensity):
        return form
    return densities.sample_density(form, grid)


# -- subcommands ---------------------------------------------------------------


def cmd_gamma(args, cfg, stdout):
    sym = toeplitz.parse_symbol(args.symbol)
    lo, hi = _range(args.x_range, "--x-range")
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    x = np.geomspace(lo, hi, args.n)
    vals = toeplitz.gamma_of_symbol(sym, cfg.params, x, args.method)
    buf = io.StringIO()
    buf.write("x,gamma\n")
    np.savetxt(buf, np.column_stack([x, vals]), fmt="%.17g", delimiter=",")
    _emit(cfg, buf.getvalue(), stdout)
    return EXIT_OK


def cmd_spectrum(args, cfg, stdout):
    sym = toeplitz.parse_symbol(args.symbol)
    lo, hi = _range(args.x_range, "--x-range")
    try:
        rep = toeplitz.boundedness_and_spectrum(sym, cfg.params, lo, hi, args.n)
    except ValueError as exc:
        if isinstance(exc, toeplitz.IntegrabilityError):
            raise
        raise UsageError(str(exc)) from None
    _emit(cfg, _json(rep.to_json()), stdout)
    return EXIT_OK


def cmd_synth(args, cfg, stdout):
    grid = cfg.grid()
    phi = _density(args.density, grid)
    f = transforms.pw_synthesize(phi, cfg.params, grid)
    _emit(cfg, _csv(write_grid_function, f), stdout)
    return EXIT_OK


def cmd_analyze(args, cfg, stdout):
    f = read_grid_function(args.file, PHYSICAL)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", transforms.TruncationWarning)
        phi = transforms.pw_analyze(f, cfg.params)
    _emit(cfg, _csv(write_density, phi), stdout)
    return EXIT_OK


def cmd_norm(args, cfg, stdout):
    header = csv_header(args.file)
    if header == "xi,re,im":
        value = lq_norm(read_density(args.file), cfg.params.q)
    elif header == "x,y,re,im":
        f = read_grid_function(args.file, PHYSICAL)
        g = f if args.raw else transforms.u1_forward(f, cfg.params)
        value = mixed_norm(g, cfg.params)
    else:
        raise UsageError("unrecognized CSV header %r" % header)
    _emit(cfg, "%.17g\n" % value, stdout)
    return EXIT_OK


def cmd_toeplitz_apply(args, cfg, stdout):
    sym = toeplitz.parse_symbol(args.symbol)
    phi = _density(args.density, cfg.grid())
    out = toeplitz.apply_toeplitz(sym, phi, cfg.params)
    _emit(cfg, _csv(write_density, out), stdout)
    return EXIT_OK


def cmd_verify(args, cfg, stdout):
    if args.suite not in verify.SUITES:
        raise UsageError("unknown suite %r (choose from %s)" % (args.suite, ", ".join(verify.SUITES)))
    rows = verify.run_suite(args.suite, cfg.grid(), cfg.tol)
    ok = all(r["pass"] for r in rows)
    _emit(cfg, _json({"suite": args.suite, "pass": ok, "checks": rows}), stdout)
    return EXIT_OK if ok else EXIT_TOLERANCE


# -- parser --------------------------------------------------------------------


def _common(with_defaults: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags without defaults, so a flag given
    # before the subcommand is not overwritten by the subparser
    def d(value):
        return value if with_defaults else argparse.SUPPRESS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=d(0.0), help="weight exponent (> -1)")
    common.add_argument("--p", type=float, default=d(2.0), help="inner exponent (>= 1)")
    common.add_argument("--q", type=float, default=d(2.0), help="outer exponent (>= 1)")
    common.add_argument(
        "--grid", default=d(DEFAULT_GRID), help="x_halfwidth,n_x,y_max,n_y,grading (default %s)" % DEFAULT_GRID
    )
    common.add_argument("--out", default=d(None), help="output file (default stdout)")
    common.add_argument("--tol", type=float, default=d(None), help="override every verify tolerance")
    return common


def build_parser() -> argparse.ArgumentParser:
    top = _common(True)
    common = _common(False)

    parser = argparse.ArgumentParser(
        prog="mfbergman", description="Mixed-norm Bergman space numerics.", parents=[top]
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("gamma", parents=[common], help="tabulate the spectral function of a symbol")
    p.add_argument("--symbol", required=True)
    p.add_argument("--x-range", default="1e-3,1e3")
    p.add_argument("--n", type=int, default=61)
    p.add_argument("--method", choices=("auto", "closed", "quadrature"), default="auto")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("spectrum", parents=[common], help="boundedness and spectrum report (JSON)")
    p.add_argument("--symbol", required=True)
    p.add_argument("--x-range", default="1e-6,1e6")
    p.add_argument("--n", type=int, default=241)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("synth", parents=[common], help="analytic function from a boundary density")
    p.add_argument("--density", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", parents=[common], help="boundary density of a sampled function")
    p.add_argument("file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("norm", parents=[common], help="norm of a grid-function or density CSV")
    p.add_argument("file")
    p.add_argument("--raw", action="store_true", help="mixed norm of the samples as stored")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("toeplitz-apply", parents=[common], help="apply T_a in the boundary picture")
    p.add_argument("--symbol", required=True)
    p.add_argument("--density", required=True)
    p.set_defaults(func=cmd_toeplitz_apply)

    p = sub.add_parser("verify", parents=[common], help="run residual suites (JSON table)")
    p.add_argument("suite", help="specfun, transforms, toeplitz or all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = _config(args)
        return args.func(args, cfg, stdout)
    except (UsageError, SpecParseError, toeplitz.IntegrabilityError) as exc:
        stderr.write("mfbergman: error: %s\n" % exc)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        stderr.write("mfbergman: error: %s\n" % exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
