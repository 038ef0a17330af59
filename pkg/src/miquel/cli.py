"""Command line front end.

Exit codes: 0 success, 1 a verification failed or the computation hit a
geometric error, 2 bad usage, 3 unreadable or invalid input/output files.
``MIQUEL_TOL_SCALE`` sets the default of ``verify --tol-scale``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import evolve, extract_p, extract_t
from .errors import MiquelError, SchemaViolation, UnsupportedVersion
from .fileio import FORMATS, dumps_values, load_map, load_values, save_field, save_map
from .generators import KINDS, GeneratorSpec, generate
from .reconstruction import complete_map_from_pcolor, reconstruct_from_x, reconstruct_from_y, x_boundary, y_boundary
from .render import render_layer
from .variables import VariableField, field_of
from .verify import parse_suites, run_suite

VAR_KINDS = {"y": "Y", "xb": "Xb", "xw": "Xw", "wb": "Wb", "ww": "Ww", "gamma": "Gamma"}


class UsageError(Exception):
    pass


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"not a complex number: {text!r}") from exc


def _params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(val)
        except ValueError as exc:
            raise UsageError(f"--param {key} needs a number") from exc
    return out


def _tol_scale(arg) -> float:
    raw = arg if arg is not None else os.environ.get("MIQUEL_TOL_SCALE", "1")
    try:
        s = float(raw)
    except ValueError as exc:
        raise UsageError(f"tolerance scale {raw!r} is not a number") from exc
    if not s > 0:
        raise UsageError("tolerance scale must be positive")
    return s


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ----------------------------------------------------------------- commands


def cmd_generate(a) -> int:
    moebius = None
    if a.moebius:
        parts = a.moebius.split(",")
        if len(parts) != 4:
            raise UsageError("--moebius expects four comma separated coefficients a,b,c,d")
        moebius = tuple(_complex(p) for p in parts)
    try:
        spec = GeneratorSpec(kind=a.kind, dims=(a.rows, a.cols), seed=a.seed, params=_params(a.param),
                             moebius=moebius, steps=a.steps, back_steps=a.back_steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    save_map(generate(spec), a.output, a.format)
    return 0


def cmd_evolve(a) -> int:
    if a.steps < 0:
        raise UsageError("--steps must be non-negative")
    m = evolve(load_map(a.input), a.steps, "forward" if a.direction == "fwd" else "backward")
    save_map(m, a.output, a.format)
    return 0


def cmd_vars(a) -> int:
    f = field_of(load_map(a.input), VAR_KINDS[a.kind])
    if a.layer is not None:
        f = f.layer(a.layer)
    if a.output == "-":
        sys.stdout.write(dumps_values(f.values, edge=f.kind == "Gamma"))
    else:
        save_field(f, a.output)
    return 0


def cmd_verify(a) -> int:
    try:
        suites = parse_suites(a.suite)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    everything = a.suite.strip() == "all"
    rep = run_suite(load_map(a.input), suites, _tol_scale(a.tol_scale), skip_inapplicable=everything)
    _write(a.output, rep.to_json())
    for name in rep.failing():
        print(f"FAIL {name}", file=sys.stderr)
    return 0 if rep.passed else 1


def _boundary_values(path: str) -> tuple[dict | None, object]:
    """Boundary data from a pattern file (returns the map) or a CSV table."""
    if path.endswith(".csv"):
        return load_values(path), None
    return None, load_map(path)


def cmd_reconstruct(a) -> int:
    kind = VAR_KINDS[a.source]
    values = load_values(a.input)
    k = a.layer
    table, bmap = _boundary_values(a.boundary)
    field = VariableField(kind, values)
    if kind == "Y":
        if bmap is not None:
            table = y_boundary(extract_t(bmap), bmap.shape, k)
        t = reconstruct_from_y(field.layer(k), table, k)
        _write(a.output, dumps_values(t))
        return 0
    color = "black" if kind == "Xb" else "white"
    shape = None
    if bmap is not None:
        shape = bmap.shape
        table = x_boundary(extract_p(bmap, color), color, bmap.shape, k)
    pts = reconstruct_from_x(field.layer(k), table, color, k)
    if a.output.endswith(".csv"):
        _write(a.output, dumps_values(pts))
    else:
        save_map(complete_map_from_pcolor(pts, color, k, shape), a.output, a.format)
    return 0


def cmd_render(a) -> int:
    m = load_map(a.input)
    labels = field_of(m, VAR_KINDS[a.label_vars]) if a.label_vars else None
    _write(a.output, render_layer(m, a.layer, a.show_points, a.show_centers, labels))
    return 0


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="miquel", description="Miquel dynamics on circle patterns.")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=FORMATS, default="hex", help="number format of written pattern files")

    g = sub.add_parser("generate", help="build a pattern and write it as JSON")
    g.add_argument("--kind", choices=KINDS, default="generic")
    g.add_argument("--rows", type=int, default=12)
    g.add_argument("--cols", type=int, default=12)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--moebius", help="coefficients a,b,c,d of a deformation, e.g. 1,0,0.05,1")
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    g.add_argument("--steps", type=int, default=0, help="forward steps after generation")
    g.add_argument("--back-steps", type=int, default=0, help="backward steps after generation")
    g.add_argument("-o", "--output", required=True)
    fmt(g)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evolve", help="run Miquel steps")
    e.add_argument("-i", "--input", required=True)
    e.add_argument("--steps", type=int, default=1)
    e.add_argument("--direction", choices=("fwd", "bwd"), default="fwd")
    e.add_argument("-o", "--output", required=True)
    fmt(e)
    e.set_defaults(func=cmd_evolve)

    v = sub.add_parser("vars", help="export a variable family as CSV")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("--kind", choices=tuple(VAR_KINDS), required=True)
    v.add_argument("--layer", type=int)
    v.add_argument("-o", "--output", required=True)
    v.set_defaults(func=cmd_vars)

    c = sub.add_parser("verify", help="run residual checks; exit 1 if any fails")
    c.add_argument("-i", "--input", required=True)
    c.add_argument("--suite", default="all",
                   help="comma separated suite names, or 'all' which skips suites the window cannot support")
    c.add_argument("--tol-scale", help="multiplier for all tolerances (default $MIQUEL_TOL_SCALE or 1)")
    c.add_argument("-o", "--output", default="-")
    c.set_defaults(func=cmd_verify)

    r = sub.add_parser("reconstruct", help="rebuild centers or points from variables and boundary data")
    r.add_argument("-i", "--input", required=True, help="variables CSV")
    r.add_argument("--boundary", required=True, help="pattern file or CSV of boundary values")
    r.add_argument("--from", dest="source", choices=("y", "xb", "xw"), required=True)
    r.add_argument("--layer", type=int, default=0)
    r.add_argument("-o", "--output", required=True, help="CSV, or a pattern file for the X paths")
    fmt(r)
    r.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("render", help="draw one layer as SVG")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--layer", type=int, default=0)
    s.add_argument("--show-points", action="store_true")
    s.add_argument("--show-centers", action="store_true")
    s.add_argument("--label-vars", choices=tuple(VAR_KINDS))
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, SchemaViolation, UnsupportedVersion, json.JSONDecodeError) as exc:
        print(f"miquel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except MiquelError as exc:
        print(f"miquel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
