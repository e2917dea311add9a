"""Command-line front end.

Exit codes: 0 success, 64 configuration error, 65 invariant violation,
2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io as fio
from .ddfv import build_ddfv, discrete_gradient, sample_ddfv, structure_residuals
from .ddfv_lab import DDFV_FAMILIES, DDFV_KINDS, ddfv_estimate, ddfv_kind_exponents
from .inequalities import (ConfigError, InequalityKind, estimate_constant, family_dim,
                           kind_exponents, variation_factor)
from .mesh import FAMILIES, MeshError, check_admissible, pyramid_residuals, quality, refine
from .oracle import closed_form_lambda_min, poincare_eigen_oracle
from .sampling import SamplerSpec
from .solver import MANUFACTURED, TENSORS, convergence_study
from .space import (ExponentError, NormSpec, lp_norm, mean_value, sample_scalar_field,
                    total_variation, w1p_norm, w1p_seminorm, w1p_seminorm_dirichlet)

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 64, 65

FIELDS = {
    "one": lambda x, y, *z: np.ones_like(x),
    "x": lambda x, y, *z: x,
    "sinsin": lambda x, y, *z: np.sin(np.pi * x) * np.sin(np.pi * y),
}


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CLIError(EXIT_CONFIG, f"{self.prog}: error: {message}")


def parse_levels(text: str) -> list[int]:
    """``"3"``, ``"1,2,4"`` or the inclusive range ``"1..5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            levels = list(range(int(lo), int(hi) + 1))
        else:
            levels = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CLIError(EXIT_CONFIG, f"cannot parse levels {text!r}") from None
    if not levels or min(levels) < 0:
        raise CLIError(EXIT_CONFIG, f"levels must be a non-empty set of integers >= 0: {text!r}")
    return levels


@dataclass
class SweepConfig:
    kinds: list[str]
    family: str
    levels: list[int]
    samples: int
    seed: int
    p: float | None = None
    q: float | None = None
    theta: float | None = None
    gamma0: str = "all"
    threads: int | None = None
    bound_factor: float = 2.0


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise CLIError(EXIT_IO, f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _table(header, records, fmt_: str) -> str:
    return fio.table_json(records) if fmt_ == "json" else fio.table_csv(header, records)


# -- mesh --------------------------------------------------------------------

def cmd_mesh(args) -> int:
    if args.action == "gen":
        mesh = refine(args.family, args.level, seed=args.seed)
        _emit(fio.dump_json(fio.mesh_to_dict(mesh)), args.out)
        return EXIT_OK
    if args.action == "check":
        if not args.path:
            raise CLIError(EXIT_CONFIG, "mesh check needs a mesh file")
        mesh = fio.load_mesh(args.path)
        violations = check_admissible(mesh, tol=args.tol)
        q = quality(mesh)
        lines = [f"cells,{mesh.n_cells}", f"faces,{mesh.n_faces}", f"xi,{fio.fmt(q.xi)}",
                 f"h,{fio.fmt(q.h)}", f"violations,{len(violations)}"]
        lines += [str(v) for v in violations[:50]]
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK if not violations else EXIT_INVARIANT
    # refine: quality table over a level range
    rows = []
    bad = False
    for level in parse_levels(args.levels):
        mesh = refine(args.family, level, seed=args.seed)
        q = quality(mesh)
        res = float(pyramid_residuals(mesh).max())
        bad |= res > 1e-10
        rows.append({"level": level, "cells": mesh.n_cells, "faces": mesh.n_faces,
                     "h": q.h, "xi": q.xi, "pyramid_residual": res})
    _emit(_table(("level", "cells", "faces", "h", "xi", "pyramid_residual"), rows, args.format),
          args.out)
    return EXIT_INVARIANT if bad else EXIT_OK


# -- norms -------------------------------------------------------------------

def cmd_norms(args) -> int:
    if args.mesh:
        mesh = fio.load_mesh(args.mesh)
    else:
        mesh = refine(args.family, args.level, seed=args.seed)
    if args.values:
        u = fio.read_values_csv(args.values, mesh)
    else:
        u = sample_scalar_field(FIELDS[args.field], mesh)
    p = args.p
    rows = [("lp", p, lp_norm(u, p)), ("w1p_seminorm", p, w1p_seminorm(u, p))]
    gamma0 = None
    if args.gamma0:
        try:
            gamma0 = mesh.tag(args.gamma0)
        except KeyError as exc:
            raise CLIError(EXIT_CONFIG, str(exc.args[0])) from exc
        rows.append(("w1p_seminorm_dirichlet", p, w1p_seminorm_dirichlet(u, p, gamma0)))
    rows.append(("w1p_norm", p, w1p_norm(u, NormSpec(p, gamma0))))
    rows.append(("total_variation", 1.0, total_variation(u)))
    rows.append(("mean", 1.0, mean_value(u)))
    _emit(fio.norm_lines(rows), args.out)
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _sweep_config(args) -> SweepConfig:
    kinds = [k.strip() for k in args.kind.split(",") if k.strip()]
    if kinds == ["all"]:
        kinds = [k.value for k in InequalityKind]
    return SweepConfig(kinds=kinds, family=args.family, levels=parse_levels(args.levels),
                       samples=args.samples, seed=args.seed, p=args.p, q=args.q,
                       theta=args.theta, gamma0=args.gamma0, threads=args.threads,
                       bound_factor=args.bound_factor)


def run_verify(cfg: SweepConfig) -> tuple[list[dict], list[str]]:
    """Validate everything first, then run; returns CSV records and failures."""
    if cfg.family not in FAMILIES:
        raise ConfigError(f"unknown family {cfg.family!r}; known: {', '.join(FAMILIES)}")
    if cfg.family == "perturbed":
        raise ConfigError("family 'perturbed' is not admissible (no orthogonality)")
    if cfg.samples < 1:
        raise ConfigError("need at least one sample")
    N = family_dim(cfg.family)
    plan = []
    for k in cfg.kinds:
        try:
            kind = InequalityKind(k)
        except ValueError:
            raise ConfigError(f"unknown kind {k!r}; known: "
                              f"{', '.join(x.value for x in InequalityKind)}") from None
        exps = kind_exponents(kind, N, cfg.p, cfg.q, cfg.theta)
        if kind.dirichlet:
            if cfg.gamma0 in (None, "", "none", "empty"):
                raise ConfigError(f"{kind.value} needs a non-empty --gamma0")
            try:
                refine(cfg.family, cfg.levels[0]).tag(cfg.gamma0)
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
        plan.append((kind, exps))

    sampler = SamplerSpec(n_samples=cfg.samples, include_constant=True)
    records, failures = [], []
    for level in cfg.levels:
        mesh = refine(cfg.family, level)
        v = check_admissible(mesh)
        if v:
            failures.append(f"level {level}: mesh not admissible ({v[0]})")
    for kind, exps in plan:
        reports = estimate_constant(kind, exps, cfg.family, cfg.levels, sampler, cfg.seed,
                                    cfg.gamma0, cfg.threads)
        for r in reports:
            records.append(fio.sweep_record(r))
            if r.nonfinite or not np.isfinite(r.C_emp):
                failures.append(f"{kind.value} level {r.level}: non-finite ratio")
        if cfg.bound_factor and len(reports) > 1:
            var = variation_factor(reports)
            if not var <= cfg.bound_factor:
                failures.append(f"{kind.value}: C_emp varies by factor {var:.3f} > "
                                f"{cfg.bound_factor:g} across levels")
        if (kind is InequalityKind.SP_DIRICHLET and exps.p == 2 and exps.q == 2
                and cfg.family == "square" and cfg.gamma0 == "all"):
            for r in reports:
                n = 2**r.level
                best = 1.0 / np.sqrt(closed_form_lambda_min(n))
                if r.C_emp > best + 1e-9:
                    failures.append(f"level {r.level}: C_emp {r.C_emp:.17g} exceeds the "
                                    f"eigenvalue bound {best:.17g}")
    return records, failures


def cmd_verify(args) -> int:
    cfg = _sweep_config(args)
    records, failures = run_verify(cfg)
    _emit(_table(fio.SWEEP_HEADER, records, args.format), args.out)
    for f in failures:
        print(f"invariant violated: {f}", file=sys.stderr)
    return EXIT_INVARIANT if failures else EXIT_OK


# -- oracle ------------------------------------------------------------------

def cmd_oracle(args) -> int:
    rows = []
    for n in parse_levels(args.n):
        if n < 1:
            raise CLIError(EXIT_CONFIG, "grid size must be >= 1")
        r = poincare_eigen_oracle(n, tol=args.tol)
        rows.append({"n": n, "h": r.h, "lambda_min": r.lambda_min,
                     "lambda_closed_form": closed_form_lambda_min(n),
                     "best_constant": r.best_constant, "iterations": r.iterations})
    header = ("n", "h", "lambda_min", "lambda_closed_form", "best_constant", "iterations")
    _emit(_table(header, rows, args.format), args.out)
    return EXIT_OK


# -- ddfv --------------------------------------------------------------------

def cmd_ddfv(args) -> int:
    if args.action == "gen":
        if args.family not in DDFV_FAMILIES:
            raise ConfigError(f"unsupported DDFV family {args.family!r}")
        mesh = build_ddfv(refine(args.family, args.level, seed=args.seed), centers=args.centers)
        _emit(fio.dump_json(fio.ddfv_to_dict(mesh)), args.out)
        return EXIT_OK
    if args.action == "verify":
        kinds = [k.strip() for k in args.kind.split(",") if k.strip()]
        levels = parse_levels(args.levels)
        plan = [(k, ddfv_kind_exponents(k, args.p, args.q, args.theta)) for k in kinds]
        if args.samples < 1:
            raise ConfigError("need at least one sample")
        sampler = SamplerSpec(n_samples=args.samples)
        failures = []
        for level in levels:
            mesh = build_ddfv(refine(args.family, level))
            worst = structure_residuals(mesh).worst()
            if worst > 1e-10:
                failures.append(f"level {level}: structural residual {worst:.3e}")
            affine = sample_ddfv(lambda x, y: 2.0 * x - 3.0 * y + 1.0, mesh)
            err = np.abs(discrete_gradient(affine) - [2.0, -3.0]).max() / 3.0
            if err > 1e-10:
                failures.append(f"level {level}: affine exactness error {err:.3e}")
        records = []
        for kind, exps in plan:
            reports = ddfv_estimate(kind, exps, args.family, levels, sampler, args.seed,
                                    args.gamma0, args.threads)
            for r in reports:
                records.append(fio.sweep_record(r))
                if not np.isfinite(r.C_emp):
                    failures.append(f"{kind} level {r.level}: non-finite ratio")
                if r.max_mean_residual > 1e-12:
                    failures.append(f"{kind} level {r.level}: zero-mean residual "
                                    f"{r.max_mean_residual:.3e}")
            if args.bound_factor and len(reports) > 1:
                var = variation_factor(reports)
                if not var <= args.bound_factor:
                    failures.append(f"{kind}: C_emp varies by factor {var:.3f}")
        _emit(_table(fio.DDFV_SWEEP_HEADER, records, args.format), args.out)
        for f in failures:
            print(f"invariant violated: {f}", file=sys.stderr)
        return EXIT_INVARIANT if failures else EXIT_OK
    # solve
    if args.A not in TENSORS:
        raise ConfigError(f"unknown tensor {args.A!r}; known: {sorted(TENSORS)}")
    if args.mms not in MANUFACTURED:
        raise ConfigError(f"unknown manufactured solution {args.mms!r}")
    if args.family not in ("square", "perturbed"):
        raise ConfigError("manufactured solutions are defined on the unit square")
    rows = convergence_study(parse_levels(args.levels), A=args.A, mms=args.mms,
                             family=args.family)
    header = ("level", "h", "unknowns", "error_l2", "error_h1", "order_l2", "iterations",
              "residual", "energy")
    recs = [{k: getattr(r, k) for k in header} for r in rows]
    _emit(_table(header, recs, args.format), args.out)
    bad = [r for r in rows if r.residual > 1e-10 or not r.energy > 0]
    for r in bad:
        print(f"invariant violated: level {r.level} residual {r.residual:.3e}", file=sys.stderr)
    return EXIT_INVARIANT if bad else EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fvineq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out=True, fmt=False):
        p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", help="output file (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    m = sub.add_parser("mesh", help="generate, check or tabulate meshes")
    m.add_argument("action", choices=("gen", "check", "refine"))
    m.add_argument("path", nargs="?", help="mesh file for 'check'")
    m.add_argument("--family", default="square", choices=FAMILIES)
    m.add_argument("--level", type=int, default=0)
    m.add_argument("--levels", default="0..5")
    m.add_argument("--tol", type=float, default=1e-9)
    common(m, fmt=True)
    m.set_defaults(func=cmd_mesh)

    n = sub.add_parser("norms", help="discrete norms of one function")
    n.add_argument("--mesh", help="mesh JSON (default: --family/--level)")
    n.add_argument("--family", default="square", choices=FAMILIES)
    n.add_argument("--level", type=int, default=2)
    n.add_argument("--values", help="CSV 'cellId,value'")
    n.add_argument("--field", default="sinsin", choices=sorted(FIELDS))
    n.add_argument("--p", type=float, default=2.0)
    n.add_argument("--gamma0", default=None)
    common(n)
    n.set_defaults(func=cmd_norms)

    v = sub.add_parser("verify", help="empirical constants across refinement levels")
    v.add_argument("--kind", required=True, help="comma-separated kinds, or 'all'")
    v.add_argument("--p", type=float)
    v.add_argument("--q", type=float)
    v.add_argument("--theta", type=float)
    v.add_argument("--gamma0", default="all")
    v.add_argument("--family", default="square")
    v.add_argument("--levels", default="1..4")
    v.add_argument("--samples", type=int, default=200)
    v.add_argument("--threads", type=int)
    v.add_argument("--bound-factor", type=float, default=2.0,
                   help="max allowed C_emp variation across levels (0 disables)")
    common(v, fmt=True)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="Dirichlet Poincare eigenvalue oracle")
    o.add_argument("--n", default="8,16,32,64", help="grid sizes")
    o.add_argument("--tol", type=float, default=1e-10)
    common(o, fmt=True)
    o.set_defaults(func=cmd_oracle)

    d = sub.add_parser("ddfv", help="DDFV meshes, inequality sweeps and demo solver")
    d.add_argument("action", choices=("gen", "verify", "solve"))
    d.add_argument("--family", default="square")
    d.add_argument("--level", type=int, default=2)
    d.add_argument("--levels", default=None)
    d.add_argument("--centers", default="given", choices=("given", "centroid", "circumcenter"))
    d.add_argument("--kind", default="pw", help=f"comma-separated: {', '.join(DDFV_KINDS)}")
    d.add_argument("--p", type=float)
    d.add_argument("--q", type=float)
    d.add_argument("--theta", type=float)
    d.add_argument("--gamma0", default="all")
    d.add_argument("--samples", type=int, default=200)
    d.add_argument("--threads", type=int)
    d.add_argument("--bound-factor", type=float, default=2.0)
    d.add_argument("--A", default="iso", help=f"diffusion tensor: {', '.join(TENSORS)}")
    d.add_argument("--mms", default="sin", help=f"manufactured solution: {', '.join(MANUFACTURED)}")
    common(d, fmt=True)
    d.set_defaults(func=cmd_ddfv)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "levels", "") is None:
            args.levels = "1..4" if args.action == "verify" else "2..5"
        return args.func(args)
    except CLIError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except fio.MeshFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ExponentError, MeshError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
