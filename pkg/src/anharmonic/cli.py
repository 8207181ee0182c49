"""Command-line interface: ``anharmonic {series,renormalize,table1,solve,quasi-exact}``.

Exit codes: 0 success, 2 invalid input, 3 engine failure, 4 optimization
failure. Defaults of the common flags can be set through environment
variables prefixed ``ANHARMONIC_`` (``ANHARMONIC_MODE``, ``ANHARMONIC_PRECISION``,
``ANHARMONIC_FORMAT``, ``ANHARMONIC_GRID``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .errors import AnharmonicError, OptimizationError, ValidationError
from .numeric import DOUBLE, FLOAT, RATIONAL, NumericContext
from .numerov import ShootingConfig, solve_eigenvalue
from .potential import PotentialSpec, dump_potential, load_potential, sextic
from .quasi_exact import closed_form_potential, quasi_exact_config, quasi_exact_corrections
from .renormalization import (
    ROOT_POLICIES,
    SCHEMES,
    SchemeSpec,
    find_omega0,
    renormalization_order,
)
from .series import OmegaExpansion, compute_series

ENV_PREFIX = "ANHARMONIC_"
EXIT_OK, EXIT_VALIDATION, EXIT_ENGINE, EXIT_OPTIMIZATION = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _env(name, default):
    return os.environ.get(ENV_PREFIX + name, default)


def _env_int(name, default):
    raw = _env(name, None)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{ENV_PREFIX}{name}={raw!r} is not an integer")


# ---------------------------------------------------------------- parsing

def _common(p: argparse.ArgumentParser, default_mode=None):
    p.add_argument("--output", "-o", help="write results to this file (manifest goes next to it)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="output format (default csv)")
    p.add_argument("--precision", type=int, default=None, help="decimal digits in float mode (default 64)")
    p.add_argument("--mode", choices=(RATIONAL, FLOAT, DOUBLE), default=default_mode,
                   help="arithmetic used by the recursion")


def _potential_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--potential", help="JSON potential file")
    g.add_argument("--sextic-lambda", help="use V = (x^2 + lambda x^6)/2 with m = omega = hbar = 1")
    p.add_argument("--hbar", help="override hbar of the potential")
    p.add_argument("--save-potential", metavar="PATH", help="write the parsed potential as a JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anharmonic", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"anharmonic {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("series", help="energy coefficients E_1..E_K")
    _potential_args(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--omega0", help="trial frequency; the closure fixes the single correction")
    p.add_argument("--closure-order", type=int, help="order s of the frequency correction (default: from the couplings)")
    p.add_argument("--max-index", type=int)
    _common(p)

    p = sub.add_parser("renormalize", help="choose omega0 and report the partial sums")
    _potential_args(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--N", type=int, help="number of corrections (see --count); may come from --config")
    p.add_argument("--count", choices=("corrections", "orders"), default="corrections",
                   help="'corrections': N non-vanishing corrections beyond E_1 (order s*N+1); "
                        "'orders': truncate at order N")
    p.add_argument("--scheme", choices=SCHEMES, default="minimal-sensitivity-sum")
    p.add_argument("--root", choices=ROOT_POLICIES, default="flattest")
    p.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--tol", type=float)
    p.add_argument("--turning-points", action="store_true", help="also admit turning points of |g|")
    p.add_argument("--config", help="JSON scheme block; explicit flags win")
    p.add_argument("--check-numeric", action="store_true", help="compare with the Numerov eigenvalue")
    _common(p)

    p = sub.add_parser("table1", help="reproduce the sextic benchmark table")
    p.add_argument("--rows", type=int, nargs="+", default=None)
    p.add_argument("--root", choices=ROOT_POLICIES, default="flattest")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--row-orders", choices=("corrections", "literal"), default="corrections")
    p.add_argument("--turning-points", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)

    p = sub.add_parser("solve", help="Numerov shooting eigenvalue")
    _potential_args(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--L", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--tol", type=float, default=1e-11)
    p.add_argument("--bracket", nargs=2, type=float, metavar=("E_LO", "E_HI"),
                   help="energy interval containing the eigenvalue (default: automatic)")
    p.add_argument("--no-refine", action="store_true")
    _common(p)

    p = sub.add_parser("quasi-exact", help="quasi-exactly solvable sextic check")
    p.add_argument("--v4", required=True)
    p.add_argument("--v6", required=True)
    p.add_argument("--K", type=int, default=6)
    _common(p)
    return ap


# ---------------------------------------------------------------- helpers

def _context(args, default_mode=FLOAT) -> NumericContext:
    mode = args.mode or _env("MODE", default_mode)
    digits = args.precision if args.precision is not None else _env_int("PRECISION", 64)
    if digits < 1:
        raise CliError("--precision must be positive")
    try:
        return NumericContext(mode, digits)
    except ValidationError as exc:
        raise CliError(str(exc))


def _format(args) -> str:
    fmt = args.format or _env("FORMAT", "csv")
    if fmt not in ("csv", "json"):
        raise CliError(f"{ENV_PREFIX}FORMAT must be csv or json, got {fmt!r}")
    return fmt


def _load_potential(args) -> PotentialSpec:
    try:
        if args.potential:
            pot = load_potential(args.potential)
        elif args.sextic_lambda is not None:
            pot = sextic(args.sextic_lambda)
        else:
            raise CliError("one of --potential or --sextic-lambda is required")
        if args.hbar is not None:
            pot = pot.replace(hbar=args.hbar)
    except FileNotFoundError as exc:
        raise CliError(f"--potential: {exc}")
    except ValidationError as exc:
        flag = "--potential" if args.potential else "--sextic-lambda"
        raise CliError(f"{flag}: {exc}")
    if getattr(args, "save_potential", None):
        dump_potential(pot, args.save_potential)
    return pot


def _check_n(n):
    if n < 0:
        raise CliError("--n must be non-negative")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Run:
    """Collects outputs and writes exactly one manifest per invocation."""

    def __init__(self, command, args):
        self.command = command
        self.args = args
        self.inputs = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
        self.outputs = []
        self.t0 = time.perf_counter()

    def emit(self, text: str):
        if self.args.output:
            Path(self.args.output).write_text(text)
            self.outputs.append(str(self.args.output))
        else:
            sys.stdout.write(text)

    def finish(self, status: int):
        manifest = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "versions": {"anharmonic": __version__},
            "status": status,
            "timing": round(time.perf_counter() - self.t0, 6),
        }
        text = json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n"
        if self.args.output:
            Path(str(self.args.output) + ".manifest.json").write_text(text)
        else:
            sys.stderr.write(text)


# ---------------------------------------------------------------- commands

def cmd_series(args, run: Run):
    if args.K < 1:
        raise CliError(f"--K must be >= 1, got {args.K}")
    _check_n(args.n)
    pot = _load_potential(args)
    ctx = _context(args)
    run.inputs["potential"] = pot.to_mapping()
    if ctx.mode == FLOAT and args.K > ctx.precision_digits / 2:
        print(f"warning: K={args.K} exceeds precision/2; consider --precision {2 * args.K}", file=sys.stderr)
    omega = None
    if args.omega0 is not None:
        s = args.closure_order or renormalization_order(pot)
        try:
            omega = OmegaExpansion.one_parameter(pot, args.omega0, s)
        except ValidationError as exc:
            raise CliError(f"--omega0: {exc}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table, series = compute_series(pot, args.n, args.K, omega, ctx, args.max_index)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    ctx = series.ctx
    values = [ctx.format(e) for e in series.orders]
    total = ctx.format(series.partial_sum())
    if _format(args) == "json":
        text = _dump_json({"n": args.n, "K": args.K, "mode": ctx.mode, "hbar": ctx.format(series.hbar),
                           "orders": [{"k": k, "E_k": v} for k, v in enumerate(values, 1)],
                           "partial_sum": total})
    else:
        text = _csv(["k", "E_k"], [(k, v) for k, v in enumerate(values, 1)])
    run.emit(text)
    if args.output:
        print(f"S_{args.K} = {total}")
    return EXIT_OK


def _scheme_from_args(args, pot) -> SchemeSpec:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"--config: {exc}")
    s = renormalization_order(pot)
    N = args.N if args.N is not None else cfg.get("N")
    if N is None:
        raise CliError("--N is required (on the command line or in --config)")
    if not isinstance(N, int) or N < 1:
        raise CliError(f"--N must be >= 1, got {N}")
    count = cfg.get("count", args.count) if args.count == "corrections" else args.count
    order = s * N + 1 if count == "corrections" else N
    kind = args.scheme if args.scheme != "minimal-sensitivity-sum" or "scheme" not in cfg else cfg["scheme"]
    interval = tuple(args.interval) if args.interval else (tuple(cfg["interval"]) if "interval" in cfg else None)
    grid = args.grid or cfg.get("grid") or _env_int("GRID", 256)
    tol = args.tol if args.tol is not None else (float(cfg["tol"]) if "tol" in cfg else None)
    root = args.root if args.root != "flattest" or "root" not in cfg else cfg["root"]
    try:
        return SchemeSpec(kind, order, root, interval, int(grid), tol, args.turning_points)
    except ValidationError as exc:
        raise CliError(str(exc))


def cmd_renormalize(args, run: Run):
    _check_n(args.n)
    pot = _load_potential(args)
    ctx = _context(args, default_mode=DOUBLE)
    scheme = _scheme_from_args(args, pot)
    run.inputs["potential"] = pot.to_mapping()
    run.inputs["order"] = scheme.order_N
    try:
        res = find_omega0(pot, args.n, scheme, ctx)
    except OptimizationError as exc:
        a, b = getattr(exc, "interval", None) or (None, None)
        msg = str(exc) if a is None else f"{exc} (scanned omega0 in [{a:.6g}, {b:.6g}])"
        raise CliError(msg, EXIT_OPTIMIZATION)
    fmt = ctx.format
    numeric = None
    if args.check_numeric:
        numeric = solve_eigenvalue(pot, args.n)
    record = {
        "n": args.n,
        "scheme": scheme.kind,
        "order": scheme.order_N,
        "root_selection": scheme.root_selection,
        "interval": list(res.interval),
        "closure_order": res.closure_order,
        "omega0": fmt(res.omega0),
        "candidates": [{"omega0": fmt(c.omega0), "flatness": fmt(c.flatness), "objective": fmt(c.objective),
                        "partial_sum": fmt(c.partial_sum), "kind": c.kind, "converged": c.converged}
                       for c in res.candidates],
        "partial_sums": [fmt(v) for v in res.partial_sums],
    }
    if numeric is not None:
        rel = abs(float(res.value) - numeric.energy) / abs(numeric.energy)
        record["numeric"] = numeric.to_record()
        record["relative_deviation"] = rel
    if _format(args) == "json":
        text = _dump_json(record)
    else:
        text = _csv(["k", "S_k"], [(k, v) for k, v in enumerate(record["partial_sums"], 1)])
    run.emit(text)
    # keep stdout machine-readable when it carries the data
    out = sys.stdout if args.output else sys.stderr
    print(f"omega0 = {record['omega0']}  ({len(res.candidates)} candidate(s), {scheme.root_selection})", file=out)
    print(f"S_{scheme.order_N} = {fmt(res.value)}", file=out)
    if numeric is not None:
        print(f"E_num = {numeric.energy!r}  relative deviation {record['relative_deviation']:.3e}", file=out)
    return EXIT_OK


def cmd_table1(args, run: Run):
    from . import table1

    rows = args.rows or table1.ROWS
    if any(N < 1 for N in rows):
        raise CliError("--rows must be positive")
    grid = args.grid or _env_int("GRID", 256)
    results = table1.reproduce_table(rows, table1.CELLS, args.root, grid, args.row_orders,
                                     args.turning_points, args.jobs)
    report = table1.diff_report(results)
    if _format(args) == "json":
        text = _dump_json({
            "cells": [{"n": r.n, "lambda": r.lam, "E_num": r.E_num,
                       "sums": {str(N): v for N, v in sorted(r.sums.items())},
                       "omega0": {str(N): v for N, v in sorted(r.omega0.items())},
                       "notes": {str(N): v for N, v in sorted(r.notes.items())},
                       "errors": {str(N): v for N, v in r.errors.items()}} for r in results],
            "diff": [{"row": lab, "n": c[0], "lambda": c[1], "value": repr(v), "printed": p,
                      "rounded_match": m, "within_last_digit": u, "relative_deviation": d}
                     for lab, c, v, p, m, u, d in report],
        })
    else:
        text = _csv(["row", "n", "lambda", "value", "printed", "rounded_match", "within_last_digit",
                     "relative_deviation"],
                    [(lab, c[0], c[1], repr(v), p, m, u, f"{d:.3e}") for lab, c, v, p, m, u, d in report])
    run.emit(text)
    if args.output:
        print(table1.format_table(results, rows))
    hits = sum(1 for *_, m, u, d in report if m)
    print(f"{hits}/{len(report)} printed values reproduced after rounding", file=sys.stderr)
    for r in results:
        for key, msg in r.errors.items():
            print(f"cell n={r.n} lambda={r.lam} row {key}: {msg}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args, run: Run):
    _check_n(args.n)
    pot = _load_potential(args)
    run.inputs["potential"] = pot.to_mapping()
    try:
        cfg = ShootingConfig(domain_halfwidth=args.L, step=args.h, tolerance=args.tol,
                             energy_bracket=tuple(args.bracket) if args.bracket else None,
                             refine_grid=not args.no_refine)
    except ValidationError as exc:
        raise CliError(str(exc))
    res = solve_eigenvalue(pot, args.n, cfg)
    rec = res.to_record()
    if _format(args) == "json":
        text = _dump_json(rec)
    else:
        text = _csv(list(rec), [[repr(v) if isinstance(v, float) else v for v in rec.values()]])
    run.emit(text)
    if args.output:
        print(f"E = {res.energy!r} (nodes {res.nodes})")
    return EXIT_OK


def cmd_quasi_exact(args, run: Run):
    try:
        cfg = quasi_exact_config(args.v4, args.v6)
    except ValidationError as exc:
        raise CliError(f"--v4/--v6: {exc}")
    if not 1 <= args.K <= 6:
        raise CliError("--K must be between 1 and 6")
    ctx = _context(args)
    if ctx.mode == RATIONAL:
        ctx = NumericContext(FLOAT, ctx.precision_digits)
    _, phys = compute_series(cfg.potential, 0, args.K, None, ctx)
    _, eng = compute_series(closed_form_potential(cfg.v2, cfg.v4, cfg.v6), 0, args.K, None, ctx)
    closed = quasi_exact_corrections(cfg.v2, cfg.v4, cfg.v6, args.K, ctx)
    with ctx.local():
        rel = max(float(abs(a - b) / abs(b)) if b != 0 else float(abs(a)) for a, b in zip(eng.orders, closed))
    num = solve_eigenvalue(cfg.potential, 0)
    ok = abs(num.energy - float(cfg.energy)) <= 1e-8
    f = ctx.format
    record = {
        "V2": str(cfg.v2), "V4": str(cfg.v4), "V6": str(cfg.v6),
        "energy": str(cfg.energy),
        "wave_quadratic": str(cfg.wave_quadratic), "wave_quartic": str(cfg.wave_quartic),
        "series_physical": [f(e) for e in phys.orders],
        "series_closed_form_normalization": [f(e) for e in eng.orders],
        "closed_forms": [f(e) for e in closed],
        "closed_form_max_relative_deviation": rel,
        "numeric": num.to_record(),
        "agreement": ok,
    }
    if _format(args) == "json":
        text = _dump_json(record)
    else:
        rows = [(k, a, b, c) for k, (a, b, c) in enumerate(zip(record["series_physical"],
                                                                record["series_closed_form_normalization"],
                                                                record["closed_forms"]), 1)]
        text = _csv(["k", "E_k_physical", "E_k_closed_form_normalization", "E_k_closed_form"], rows)
    run.emit(text)
    print(f"V2 = {cfg.v2}  predicted E = {cfg.energy}  psi = exp(-{cfg.wave_quadratic} x^2 - {cfg.wave_quartic} x^4)")
    print(f"Numerov E = {num.energy:.10f}  |diff| = {abs(num.energy - float(cfg.energy)):.2e}  "
          f"{'PASS' if ok else 'FAIL'} (1e-8)")
    print(f"closed forms vs recursion: max relative deviation {rel:.2e}")
    return EXIT_OK if ok else EXIT_ENGINE


COMMANDS = {
    "series": cmd_series,
    "renormalize": cmd_renormalize,
    "table1": cmd_table1,
    "solve": cmd_solve,
    "quasi-exact": cmd_quasi_exact,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = Run(args.command, args)
    status = EXIT_ENGINE
    try:
        status = COMMANDS[args.command](args, run)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = exc.code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_VALIDATION
    except OptimizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_OPTIMIZATION
    except AnharmonicError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = EXIT_ENGINE
    run.finish(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
