"""JSON and CSV formats for meshes, discrete functions and reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ddfv import DDFVFunction, DDFVMesh, build_ddfv
from .mesh import AdmissibleMesh, MeshError
from .space import DiscreteFunction


class MeshFormatError(ValueError):
    """A file does not follow the expected format."""


def fmt(x) -> str:
    """17 significant digits; integers stay integers; None is blank."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


# -- meshes ----------------------------------------------------------------

def mesh_to_dict(mesh: AdmissibleMesh) -> dict:
    return {
        "dim": mesh.dim,
        "nodes": mesh.nodes.tolist(),
        "cells": [{"verts": mesh.cell_vertex_ids(k).tolist(), "center": mesh.centers[k].tolist()}
                  for k in range(mesh.n_cells)],
        "faces": [{"verts": mesh.face_vertex_ids(f).tolist(),
                   "cells": [int(c) for c in mesh.face_cells[f] if c >= 0]}
                  for f in range(mesh.n_faces)],
        "tags": {k: v.tolist() for k, v in mesh.tags.items() if k != "all"},
    }


def _require(d: dict, key: str, kind):
    if key not in d:
        raise MeshFormatError(f"missing key {key!r}")
    if not isinstance(d[key], kind):
        raise MeshFormatError(f"key {key!r} has the wrong type")
    return d[key]


def mesh_from_dict(d: dict) -> AdmissibleMesh:
    """Rebuild a mesh; measures and distances are always recomputed."""
    if not isinstance(d, dict):
        raise MeshFormatError("mesh document must be a JSON object")
    dim = _require(d, "dim", int)
    try:
        nodes = np.array(_require(d, "nodes", list), dtype=float)
        cells = _require(d, "cells", list)
        verts = [list(map(int, c["verts"])) for c in cells]
        centers = np.array([c["center"] for c in cells], dtype=float)
        faces = _require(d, "faces", list)
        fverts = [list(map(int, f["verts"])) for f in faces]
        fcells = [list(map(int, f["cells"])) for f in faces]
        tags = {str(k): list(map(int, v)) for k, v in d.get("tags", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshFormatError(f"malformed mesh entry: {exc}") from exc
    if nodes.ndim != 2 or nodes.shape[1] != dim:
        raise MeshFormatError(f"nodes do not have {dim} coordinates")
    try:
        return AdmissibleMesh(nodes, verts, centers, fverts, fcells, tags)
    except (MeshError, IndexError, ValueError) as exc:
        raise MeshFormatError(f"inconsistent mesh: {exc}") from exc


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MeshFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                              f"{exc.msg}") from exc


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def save_mesh(mesh: AdmissibleMesh, path) -> None:
    dump_json(mesh_to_dict(mesh), path)


def load_mesh(path) -> AdmissibleMesh:
    return mesh_from_dict(_load_json(path))


def ddfv_to_dict(mesh: DDFVMesh) -> dict:
    d = mesh_to_dict(mesh.primal)
    d["cells"] = [dict(c, center=mesh.primal_centers[k].tolist()) for k, c in enumerate(d["cells"])]
    d["boundary_cells"] = [{"face": int(f), "center": mesh.primal_centers[mesh.n_interior + i].tolist()}
                           for i, f in enumerate(mesh.boundary_face)]
    d["dual_cells"] = [{"vertex": v, "boundary": bool(mesh.dual_boundary[v])}
                       for v in range(mesh.n_dual)]
    d["diamonds"] = [{"K": int(k), "L": int(l), "Kstar": int(ks), "Lstar": int(ls)}
                     for k, l, ks, ls in zip(mesh.K, mesh.L, mesh.Kstar, mesh.Lstar)]
    return d


def ddfv_from_dict(d: dict) -> DDFVMesh:
    """Rebuild from the primal part; stored diamonds must match the rebuilt ones."""
    mesh = build_ddfv(mesh_from_dict(d))
    if "diamonds" in d:
        try:
            got = np.array([[x["K"], x["L"], x["Kstar"], x["Lstar"]] for x in d["diamonds"]])
        except (KeyError, TypeError) as exc:
            raise MeshFormatError(f"malformed diamond entry: {exc}") from exc
        want = np.stack([mesh.K, mesh.L, mesh.Kstar, mesh.Lstar], axis=1)
        if got.shape != want.shape or np.any(got != want):
            raise MeshFormatError("stored diamonds do not match the primal mesh")
    return mesh


def load_ddfv(path) -> DDFVMesh:
    return ddfv_from_dict(_load_json(path))


# -- functions ---------------------------------------------------------------

def values_csv(u: DiscreteFunction) -> str:
    return "".join(f"{k},{fmt(v)}\n" for k, v in enumerate(u.values))


def read_values_csv(path, mesh: AdmissibleMesh) -> DiscreteFunction:
    vals = np.full(mesh.n_cells, np.nan)
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or row[0].strip().startswith("#"):
                    continue
                if row[0].strip() == "cellId":
                    continue
                if len(row) != 2:
                    raise MeshFormatError(f"{path}:{lineno}: expected 'cellId,value'")
                vals[int(row[0])] = float(row[1])
    except OSError as exc:
        raise MeshFormatError(f"cannot read {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc
    if np.any(np.isnan(vals)):
        raise MeshFormatError(f"{path}: missing values for {int(np.isnan(vals).sum())} cells")
    return DiscreteFunction(mesh, vals)


def ddfv_values_csv(u: DDFVFunction) -> str:
    out = [f"primal,{k},{fmt(v)}\n" for k, v in enumerate(u.primal)]
    out += [f"dual,{k},{fmt(v)}\n" for k, v in enumerate(u.dual)]
    return "".join(out)


def read_ddfv_values_csv(text: str, mesh: DDFVMesh) -> DDFVFunction:
    p = np.full(mesh.n_primal, np.nan)
    d = np.full(mesh.n_dual, np.nan)
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        kind, idx, val = row
        {"primal": p, "dual": d}[kind][int(idx)] = float(val)
    if np.any(np.isnan(p)) or np.any(np.isnan(d)):
        raise MeshFormatError("missing DDFV values")
    return DDFVFunction(mesh, p, d)


def norm_lines(rows: Iterable[tuple[str, float, float]]) -> str:
    return "".join(f"{name},{fmt(p)},{fmt(v)}\n" for name, p, v in rows)


# -- reports -----------------------------------------------------------------

SWEEP_HEADER = ("kind", "level", "h", "xi", "p", "q", "theta", "m", "samples", "skipped",
                "C_emp", "seed")
DDFV_SWEEP_HEADER = ("kind", "level", "h", "sin_alpha", "zeta", "p", "q", "theta", "m",
                     "samples", "skipped", "C_emp", "seed")


def sweep_record(r) -> dict:
    e = r.exponents
    rec = {"kind": r.kind, "level": r.level, "h": r.h}
    if hasattr(r, "xi"):
        rec["xi"] = r.xi
    else:
        rec["sin_alpha"] = r.sin_alpha
        rec["zeta"] = r.zeta
    rec.update(p=e.p, q=e.q, theta=e.theta, m=e.m, samples=r.samples, skipped=r.skipped,
               C_emp=r.C_emp, seed=r.seed)
    return rec


def table_csv(header: Sequence[str], records: Iterable[dict]) -> str:
    lines = [",".join(header)]
    for rec in records:
        lines.append(",".join(fmt(rec.get(k)) for k in header))
    return "\n".join(lines) + "\n"


def table_json(records: Iterable[dict]) -> str:
    def clean(v):
        if isinstance(v, (np.floating, float)):
            v = float(v)
            return v if np.isfinite(v) else None
        if isinstance(v, np.integer):
            return int(v)
        return v
    return json.dumps([{k: clean(v) for k, v in r.items()} for r in records], indent=1) + "\n"
