"""Command-line interface: ``capindex {index,sweep,roots,upsilon,verify}``.

Exit codes: 0 success, 1 configuration error, 2 numerical indeterminacy
(for ``verify``: at least one failed criterion).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import report as rpt
from .acceptance import Settings, run_all
from .constraint_index import (
    Constraint,
    criticality_offset,
    cylinder_typeI_closed_form,
    index_report,
    parse_constraints,
)
from .errors import CapIndexError, ConfigError, FredholmObstruction, IllConditioned
from .geometry import SurfaceKind, make_surface
from .roots import Equation, RootSpec, enumerate_roots, residual
from .spectrum import EPS_COUNT, morse_index_total
from .upsilon import compute_upsilon, index_lower_bound, trace_identity

EXIT_OK, EXIT_CONFIG, EXIT_INDETERMINATE = 0, 1, 2
GRID_ENV = "CAPINDEX_GRID_N"


@dataclass
class RunConfig:
    subcommand: str = "index"
    surface: str = "catenoid"
    n: int = 2
    r: float | None = None
    a: float | None = None
    constraints: str = "typeI,typeII"
    grid_n: int = 256
    quad_n: int = 128
    k_max: int | None = None
    output: str | None = None
    format: str = "json"
    eps_count: float = EPS_COUNT
    eps_int: float = 1e-8
    eps: float = 1e-9
    r_min: float = 0.05
    r_max: float = 0.95
    steps: int = 19
    equation: str = "coth"
    range_max: float = 10.0


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"subcommand"}


def load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def build_config(args, environ=None):
    """Defaults < environment < config file < command-line flags."""
    environ = os.environ if environ is None else environ
    values = {}
    if environ.get(GRID_ENV):
        try:
            values["grid_n"] = int(environ[GRID_ENV])
        except ValueError as exc:
            raise ConfigError(f"{GRID_ENV} must be an integer") from exc
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    cfg = RunConfig(subcommand=args.command, **values)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {cfg.format!r}")
    if cfg.grid_n < 1 or cfg.quad_n < 1:
        raise ConfigError("grid_n and quad_n must be positive")
    try:
        SurfaceKind(cfg.surface)
        parse_constraints(cfg.constraints)
        Equation(cfg.equation)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.subcommand == "sweep":
        if not 0.0 < cfg.r_min <= cfg.r_max < 1.0 or cfg.steps < 1:
            raise ConfigError("sweep needs 0 < r_min <= r_max < 1 and steps >= 1")
        if cfg.r_min == cfg.r_max and cfg.steps != 1:
            raise ConfigError("r_min == r_max requires steps = 1")


def surface_from_config(cfg):
    params = {}
    if cfg.surface == "cylinder":
        if cfg.r is None:
            raise ConfigError("cylinder needs --r")
        params = {"n": cfg.n, "r": cfg.r}
    elif cfg.surface == "torus":
        if cfg.a is None:
            raise ConfigError("torus needs --a")
        params = {"a": cfg.a}
    try:
        return make_surface(cfg.surface, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_row(n, r, grid_n, eps_count=EPS_COUNT):
    """One sweep row; ``typeI`` and ``c`` are ``None`` when the solve is ill-conditioned."""
    s = make_surface("cylinder", n=n, r=r)
    res = morse_index_total(s, grid_n, eps_rel=eps_count)
    try:
        c = criticality_offset(s, Constraint.TYPE_I, grid_n).c
    except IllConditioned:
        c = None
    return rpt.SweepRow(
        r=float(r), mi_q=res.mi_q, typeI=None if c is None else res.mi_q + c,
        classification=cylinder_typeI_closed_form(n, r).label,
        a=res.dirichlet_total, b=res.steklov_total, c=c,
    ), res.stable and c is not None and res.steklov_total is not None


def _emit(text, cfg):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_index(cfg):
    surface = surface_from_config(cfg)
    if cfg.format == "csv":
        if surface.kind != SurfaceKind.CYLINDER:
            raise ConfigError("CSV output is only defined for cylinders")
        row, ok = sweep_row(cfg.n, cfg.r, cfg.grid_n, cfg.eps_count)
        _emit(rpt.rows_to_csv([row]), cfg)
        return EXIT_OK if ok else EXIT_INDETERMINATE
    rep = index_report(surface, parse_constraints(cfg.constraints), cfg.grid_n, cfg.quad_n,
                       cfg.k_max, cfg.eps_count, cfg.eps_int, cfg.eps)
    _emit(rpt.dumps({"command": "index", "report": rep}), cfg)
    return EXIT_INDETERMINATE if rep.indeterminate else EXIT_OK


def cmd_sweep(cfg):
    radii = np.linspace(cfg.r_min, cfg.r_max, cfg.steps)
    rows, ok = [], True
    for r in radii:
        row, good = sweep_row(cfg.n, float(r), cfg.grid_n, cfg.eps_count)
        rows.append(row)
        ok &= good
    if cfg.format == "csv":
        _emit(rpt.rows_to_csv(rows), cfg)
    else:
        _emit(rpt.dumps({"command": "sweep", "n": cfg.n, "grid_n": cfg.grid_n,
                         "rows": rows}), cfg)
    return EXIT_OK if ok else EXIT_INDETERMINATE


def cmd_roots(cfg):
    eq = Equation(cfg.equation)
    try:
        roots = enumerate_roots(RootSpec(eq, cfg.range_max))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    table = [{"index": i, "root": x, "residual": residual(eq, x)} for i, x in enumerate(roots)]
    if cfg.format == "csv":
        lines = ["index,root,residual"] + [
            f"{d['index']},{rpt.format_float(d['root'])!r},{rpt.format_float(d['residual'])!r}"
            for d in table]
        _emit("\n".join(lines) + "\n", cfg)
    else:
        _emit(rpt.dumps({"command": "roots", "equation": eq.value,
                         "range_max": cfg.range_max, "roots": table}), cfg)
    return EXIT_OK


def cmd_upsilon(cfg):
    surface = surface_from_config(cfg)
    ups = compute_upsilon(surface, cfg.quad_n, eps=cfg.eps)
    bound, label = index_lower_bound(surface, ups)
    tr = trace_identity(surface, cfg.quad_n)
    _emit(rpt.dumps({
        "command": "upsilon",
        "surface": surface.describe(),
        "entries": ups.entries,
        "eigenvalues": ups.eigenvalues,
        "asymmetry_residual": ups.asymmetry_residual,
        "ell": ups.ell,
        "band_hits": ups.band_hits,
        "lower_bound": bound,
        "case": label,
        "trace": tr.trace,
        "trace_rhs": tr.rhs,
        "trace_residual": tr.residual,
        "boundary_phi": tr.boundary_phi,
    }), cfg)
    return EXIT_OK


def cmd_verify(cfg):
    """Print one line per criterion; ``--output`` also receives a JSON summary."""
    results = run_all(Settings(cfg.grid_n, cfg.quad_n, cfg.eps_count))
    sys.stdout.write("".join(r.line() + "\n" for r in results))
    if cfg.output:
        _emit(rpt.dumps({"command": "verify", "results": [
            {"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results]}), cfg)
    return EXIT_OK if all(r.passed for r in results) else EXIT_INDETERMINATE


COMMANDS = {"index": cmd_index, "sweep": cmd_sweep, "roots": cmd_roots,
            "upsilon": cmd_upsilon, "verify": cmd_verify}


def build_parser():
    parser = argparse.ArgumentParser(prog="capindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        p.add_argument("--grid-n", dest="grid_n", type=int)
        p.add_argument("--quad-n", dest="quad_n", type=int)
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--eps-count", dest="eps_count", type=float)
        p.add_argument("--eps-int", dest="eps_int", type=float)
        p.add_argument("--eps", type=float)

    def surface_args(p):
        p.add_argument("--surface", choices=[k.value for k in SurfaceKind])
        p.add_argument("--n", type=int)
        p.add_argument("--r", type=float)
        p.add_argument("--a", type=float)

    p = sub.add_parser("index", help="Morse indices with constraints")
    common(p)
    surface_args(p)
    p.add_argument("--constraints", help="comma list of " +
                   ",".join(c.value for c in Constraint))
    p.add_argument("--k-max", dest="k_max", type=int)

    p = sub.add_parser("sweep", help="cylinder radius sweep")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("roots", help="roots of the characteristic equations")
    common(p)
    p.add_argument("--equation", choices=[e.value for e in Equation])
    p.add_argument("--range-max", dest="range_max", type=float)

    p = sub.add_parser("upsilon", help="Upsilon matrix and index lower bound")
    common(p)
    surface_args(p)

    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p)
    return parser


def main(argv=None, environ=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args, environ)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FredholmObstruction, IllConditioned, CapIndexError) as exc:
        print(f"indeterminate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE


if __name__ == "__main__":
    sys.exit(main())
