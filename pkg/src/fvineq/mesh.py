"""Admissible finite volume meshes: construction, geometry and validation.

A mesh is a partition of a polygonal/polyhedral domain into control volumes
together with one center per cell.  Interior faces ``K|L`` must be orthogonal
to the segment joining the two centers; every center must see all faces of its
cell from the inside (star-shapedness).  Geometry is always recomputed from
node coordinates and connectivity, never taken on trust.

Cells are numbered with the x index varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9
PYRAMID_TOL = 1e-10

_AXIS_SIDES = (("left", "right"), ("bottom", "top"), ("front", "back"))


class MeshError(ValueError):
    """A mesh could not be constructed."""


class NonAcuteTriangleError(MeshError):
    pass


@dataclass(frozen=True)
class BoundaryTag:
    """A named set of exterior faces (a part of the boundary)."""

    name: str
    faces: frozenset

    def __len__(self) -> int:
        return len(self.faces)

    def __bool__(self) -> bool:
        return bool(self.faces)

    @classmethod
    def empty(cls) -> "BoundaryTag":
        return cls("empty", frozenset())

    def union(self, other: "BoundaryTag") -> "BoundaryTag":
        return BoundaryTag(f"{self.name}+{other.name}", self.faces | other.faces)


@dataclass(frozen=True)
class MeshQuality:
    xi: float
    h: float


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}[{self.index}]: {self.detail}"


def _padded(seq) -> tuple[np.ndarray, np.ndarray]:
    """Pack ragged vertex lists into a 2-D array.

    Short rows are padded by repeating their first vertex, which keeps
    shoelace/Newell sums and diameters unchanged.
    """
    if isinstance(seq, np.ndarray) and seq.ndim == 2:
        arr = np.array(seq, dtype=np.int64)
        return arr, np.full(len(arr), arr.shape[1], dtype=np.int64)
    rows = [np.asarray(r, dtype=np.int64).ravel() for r in seq]
    counts = np.array([len(r) for r in rows], dtype=np.int64)
    if len(rows) == 0:
        return np.zeros((0, 0), dtype=np.int64), counts
    if counts.min() < 1:
        raise MeshError("empty vertex list")
    width = int(counts.max())
    arr = np.empty((len(rows), width), dtype=np.int64)
    for i, r in enumerate(rows):
        arr[i, : len(r)] = r
        arr[i, len(r):] = r[0]
    return arr, counts


def _cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _polygon_area_centroid(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed area and centroid of 2-D polygons, ``pts`` of shape (n, k, 2)."""
    nxt = np.roll(pts, -1, axis=1)
    cr = _cross2(pts, nxt)
    area = 0.5 * cr.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cx = ((pts[..., 0] + nxt[..., 0]) * cr).sum(axis=1) / (6.0 * area)
        cy = ((pts[..., 1] + nxt[..., 1]) * cr).sum(axis=1) / (6.0 * area)
    return area, np.stack([cx, cy], axis=-1)


def _diameters(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    return np.sqrt((diff**2).sum(axis=-1)).max(axis=(1, 2))


class AdmissibleMesh:
    """Cells, faces and centers of a finite volume mesh in dimension 2 or 3.

    Parameters
    ----------
    nodes : (n_nodes, N) array
    cells : per-cell vertex ids. In 2-D the ids must trace the polygon
        boundary (either orientation; stored counter-clockwise). In 3-D the
        vertex set only serves for the diameter and orientation, and cells
        must be convex.
    centers : (n_cells, N) array of cell centers ``x_K``.
    faces : per-face vertex ids (2 in 2-D, a planar cycle in 3-D).
    face_cells : per-face ``[K]`` (exterior) or ``[K, L]`` (interior).
    tags : optional mapping ``name -> exterior face ids``.

    Construction checks structure only; use :func:`check_admissible` for the
    geometric admissibility conditions.
    """

    def __init__(self, nodes, cells, centers, faces, face_cells, tags=None,
                 domain_measure: float | None = None):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] not in (2, 3):
            raise MeshError(f"nodes must have shape (n, 2) or (n, 3), got {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise MeshError("non-finite node coordinates")
        self.dim = nodes.shape[1]
        self.nodes = nodes
        self.cell_verts, self.cell_nverts = _padded(cells)
        self.centers = np.array(centers, dtype=float).reshape(-1, self.dim)
        self.face_verts, self.face_nverts = _padded(faces)
        self.face_cells = self._face_cells_array(face_cells)

        nc, nf = len(self.cell_verts), len(self.face_verts)
        if nc == 0:
            raise MeshError("mesh has no cells")
        if len(self.centers) != nc:
            raise MeshError(f"{len(self.centers)} centers for {nc} cells")
        if not np.all(np.isfinite(self.centers)):
            raise MeshError("non-finite cell centers")
        if len(self.face_cells) != nf:
            raise MeshError(f"{len(self.face_cells)} face/cell entries for {nf} faces")
        for arr, what in ((self.cell_verts, "cell"), (self.face_verts, "face")):
            if arr.size and (arr.min() < 0 or arr.max() >= len(nodes)):
                raise MeshError(f"{what} references a missing node")
        if self.face_cells[:, 0].min() < 0 or self.face_cells.max() >= nc:
            raise MeshError("face references a missing cell")
        if np.any(self.face_cells[:, 0] == self.face_cells[:, 1]):
            raise MeshError("face with identical cells on both sides")
        if self.dim == 2 and np.any(self.face_nverts != 2):
            raise MeshError("2-D faces must have exactly two vertices")
        if self.dim == 3 and np.any(self.face_nverts < 3):
            raise MeshError("3-D faces need at least three vertices")

        self._compute_geometry()
        self.domain_measure = float(self.cell_measure.sum() if domain_measure is None
                                    else domain_measure)

        self.tags: dict[str, np.ndarray] = {}
        ext = set(np.flatnonzero(self.exterior).tolist())
        for name, ids in (tags or {}).items():
            ids = np.unique(np.asarray(list(ids), dtype=np.int64))
            bad = [int(i) for i in ids if int(i) not in ext]
            if bad:
                raise MeshError(f"tag {name!r} lists non-exterior faces {bad[:5]}")
            self.tags[name] = ids
        self.tags.setdefault("all", np.flatnonzero(self.exterior))

        for arr in (self.nodes, self.centers, self.cell_verts, self.face_verts,
                    self.face_cells, self.cell_measure, self.face_measure,
                    self.face_normal, self.face_centroid, self.d_sigma,
                    self.inc_cell, self.inc_face, self.inc_sdist):
            arr.setflags(write=False)

    @staticmethod
    def _face_cells_array(face_cells) -> np.ndarray:
        if isinstance(face_cells, np.ndarray) and face_cells.ndim == 2:
            return np.array(face_cells, dtype=np.int64)
        out = np.full((len(face_cells), 2), -1, dtype=np.int64)
        for i, fc in enumerate(face_cells):
            fc = list(fc)
            if len(fc) not in (1, 2):
                raise MeshError(f"face {i} must have 1 or 2 cells, got {len(fc)}")
            out[i, : len(fc)] = fc
        return out

    # -- geometry --------------------------------------------------------

    def _compute_geometry(self) -> None:
        X = self.nodes
        fv = X[self.face_verts]
        if self.dim == 2:
            t = fv[:, 1] - fv[:, 0]
            self.face_measure = np.sqrt((t**2).sum(axis=1))
            self.face_centroid = 0.5 * (fv[:, 0] + fv[:, 1])
            with np.errstate(invalid="ignore", divide="ignore"):
                normal = np.stack([t[:, 1], -t[:, 0]], axis=1) / self.face_measure[:, None]
            # Orient cells counter-clockwise.
            cv = X[self.cell_verts]
            area, _ = _polygon_area_centroid(cv)
            flip = area < 0
            if np.any(flip):
                for c in np.flatnonzero(flip):
                    k = self.cell_nverts[c]
                    row = self.cell_verts[c, :k][::-1]
                    self.cell_verts[c, :k] = row
                    self.cell_verts[c, k:] = row[0]
                cv = X[self.cell_verts]
                area = np.abs(area)
            self.cell_measure = area
            # The face normal points outward of face_cells[:, 0] when (a, b)
            # is traversed counter-clockwise by that cell.
            nn = len(X)
            a, b = self.face_verts[:, 0], self.face_verts[:, 1]
            K = self.face_cells[:, 0]
            nxt = np.roll(self.cell_verts, -1, axis=1)
            cell_ids = np.repeat(np.arange(len(self.cell_verts)), self.cell_verts.shape[1])
            codes = (cell_ids * nn + self.cell_verts.ravel()) * nn + nxt.ravel()
            fwd = np.isin((K * nn + a) * nn + b, codes)
            bwd = np.isin((K * nn + b) * nn + a, codes)
            missing = np.flatnonzero(~fwd & ~bwd)
            if missing.size:
                raise MeshError(f"face {int(missing[0])} is not an edge of cell {int(K[missing[0]])}")
            normal[bwd & ~fwd] *= -1.0
        else:
            nxt = np.roll(fv, -1, axis=1)
            vec = 0.5 * np.cross(fv, nxt).sum(axis=1)
            self.face_measure = np.sqrt((vec**2).sum(axis=1))
            with np.errstate(invalid="ignore", divide="ignore"):
                normal = vec / self.face_measure[:, None]
            # Area-weighted centroid from a fan around the first vertex.
            p0 = fv[:, :1, :]
            tri = np.cross(fv[:, 1:-1] - p0, fv[:, 2:] - p0)
            w = np.einsum("fkd,fd->fk", tri, normal)
            cen = (p0 + fv[:, 1:-1] + fv[:, 2:]) / 3.0
            with np.errstate(invalid="ignore", divide="ignore"):
                self.face_centroid = (w[..., None] * cen).sum(axis=1) / w.sum(axis=1)[:, None]
            ref = self._cell_vertex_mean()
            K = self.face_cells[:, 0]
            s = np.einsum("fd,fd->f", self.face_centroid - ref[K], normal)
            normal[s < 0] *= -1.0
        self.face_normal = normal

        # Cell/face incidences, oriented outward of the incident cell.
        interior = self.face_cells[:, 1] >= 0
        fid = np.arange(len(self.face_cells))
        inc_cell = np.concatenate([self.face_cells[:, 0], self.face_cells[interior, 1]])
        inc_face = np.concatenate([fid, fid[interior]])
        inc_sign = np.concatenate([np.ones(len(fid)), -np.ones(int(interior.sum()))])
        order = np.lexsort((inc_face, inc_cell))
        self.inc_cell = inc_cell[order]
        self.inc_face = inc_face[order]
        self.inc_sign = inc_sign[order]
        outward = self.inc_sign[:, None] * self.face_normal[self.inc_face]
        self.inc_sdist = np.einsum(
            "id,id->i", self.face_centroid[self.inc_face] - self.centers[self.inc_cell], outward)
        self.inc_ptr = np.searchsorted(self.inc_cell, np.arange(len(self.cell_verts) + 1))

        if self.dim == 3:
            # Divergence theorem about a reference point independent of x_K.
            ref = self._cell_vertex_mean()
            h = np.einsum("id,id->i",
                          self.face_centroid[self.inc_face] - ref[self.inc_cell], outward)
            self.cell_measure = np.bincount(
                self.inc_cell, weights=self.face_measure[self.inc_face] * h / 3.0,
                minlength=len(self.cell_verts))

        d = np.empty(len(fid))
        K, L = self.face_cells[:, 0], self.face_cells[:, 1]
        d[interior] = np.linalg.norm(self.centers[L[interior]] - self.centers[K[interior]], axis=1)
        first = self.inc_sign > 0
        ext_dist = np.zeros(len(fid))
        ext_dist[self.inc_face[first]] = np.abs(self.inc_sdist[first])
        d[~interior] = ext_dist[~interior]
        self.d_sigma = d
        self.cell_diam = _diameters(X[self.cell_verts])

    def _cell_vertex_mean(self) -> np.ndarray:
        X = self.nodes[self.cell_verts]
        mask = np.arange(self.cell_verts.shape[1])[None, :] < self.cell_nverts[:, None]
        return (X * mask[..., None]).sum(axis=1) / self.cell_nverts[:, None]

    # -- convenience -----------------------------------------------------

    @property
    def n_cells(self) -> int:
        return len(self.cell_verts)

    @property
    def n_faces(self) -> int:
        return len(self.face_verts)

    @cached_property
    def interior(self) -> np.ndarray:
        return self.face_cells[:, 1] >= 0

    @cached_property
    def exterior(self) -> np.ndarray:
        return self.face_cells[:, 1] < 0

    @cached_property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.interior)

    @cached_property
    def exterior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.exterior)

    @cached_property
    def d_cell_face(self) -> np.ndarray:
        """``d(x_K, sigma)`` per incidence (aligned with ``inc_cell``/``inc_face``)."""
        return np.abs(self.inc_sdist)

    @cached_property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def cell_faces(self, k: int) -> np.ndarray:
        return self.inc_face[self.inc_ptr[k]:self.inc_ptr[k + 1]]

    def cell_vertex_ids(self, k: int) -> np.ndarray:
        return self.cell_verts[k, : self.cell_nverts[k]]

    def face_vertex_ids(self, f: int) -> np.ndarray:
        return self.face_verts[f, : self.face_nverts[f]]

    def tag(self, name: str | BoundaryTag | None) -> BoundaryTag:
        """Resolve a tag name (``"all"``, ``"none"``, a side, or ``a+b``)."""
        if name is None:
            return BoundaryTag.empty()
        if isinstance(name, BoundaryTag):
            return name
        if name in ("none", "empty", ""):
            return BoundaryTag.empty()
        faces: set[int] = set()
        for part in name.split("+"):
            if part not in self.tags:
                raise KeyError(f"unknown boundary tag {part!r}; known: {sorted(self.tags)}")
            faces.update(int(f) for f in self.tags[part])
        return BoundaryTag(name, frozenset(faces))

    def __repr__(self) -> str:
        return (f"AdmissibleMesh(dim={self.dim}, cells={self.n_cells}, "
                f"faces={self.n_faces}, interior={int(self.interior.sum())})")


# -- validation ------------------------------------------------------------


def pyramid_residuals(mesh: AdmissibleMesh) -> np.ndarray:
    """Relative residual of ``sum_sigma m(sigma) d(x_K, sigma) = N m(K)`` per cell."""
    lhs = np.bincount(mesh.inc_cell,
                      weights=mesh.face_measure[mesh.inc_face] * mesh.d_cell_face,
                      minlength=mesh.n_cells)
    rhs = mesh.dim * mesh.cell_measure
    return np.abs(lhs - rhs) / rhs


def check_admissible(mesh: AdmissibleMesh, tol: float = DEFAULT_TOL,
                     pyramid_tol: float = PYRAMID_TOL) -> list[Violation]:
    """List every violated admissibility condition (empty list if none)."""
    out: list[Violation] = []
    scale = float(mesh.cell_diam.max())

    for c in np.flatnonzero(~(mesh.cell_measure > 0)):
        out.append(Violation("cell-measure", int(c), f"m(K)={mesh.cell_measure[c]:.3g}"))
    for f in np.flatnonzero(~(mesh.face_measure > tol * scale ** (mesh.dim - 1))):
        out.append(Violation("face-measure", int(f), f"m(sigma)={mesh.face_measure[f]:.3g}"))

    # x_K strictly on the inner side of every face of K: x_K lies in the
    # kernel of K, i.e. K is star-shaped with respect to x_K.
    bad = np.flatnonzero(~(mesh.inc_sdist > tol * scale))
    for i in bad:
        out.append(Violation(
            "star-shaped", int(mesh.inc_cell[i]),
            f"center not strictly inside face {int(mesh.inc_face[i])} "
            f"(signed distance {mesh.inc_sdist[i]:.3g})"))

    f = mesh.interior_faces
    K, L = mesh.face_cells[f, 0], mesh.face_cells[f, 1]
    seg = mesh.centers[L] - mesh.centers[K]
    length = np.linalg.norm(seg, axis=1)
    along = np.einsum("fd,fd->f", seg, mesh.face_normal[f])
    if mesh.dim == 2:
        tangential = np.abs(_cross2(seg, mesh.face_normal[f]))
    else:
        tangential = np.linalg.norm(np.cross(seg, mesh.face_normal[f]), axis=1)
    for i in np.flatnonzero(~(tangential <= tol * length) | ~(along > 0)):
        out.append(Violation(
            "orthogonality", int(f[i]),
            f"(x_K, x_L) for K={int(K[i])}, L={int(L[i])} deviates from the face normal "
            f"(tangential {tangential[i]:.3g}, normal {along[i]:.3g})"))

    res = pyramid_residuals(mesh)
    for c in np.flatnonzero(~(res <= max(pyramid_tol, tol))):
        out.append(Violation("pyramid", int(c), f"relative residual {res[c]:.3g}"))

    # Closure: outward area vectors of each cell sum to zero.
    outward = (mesh.inc_sign * mesh.face_measure[mesh.inc_face])[:, None] \
        * mesh.face_normal[mesh.inc_face]
    closure = np.zeros((mesh.n_cells, mesh.dim))
    np.add.at(closure, mesh.inc_cell, outward)
    cscale = np.bincount(mesh.inc_cell, weights=mesh.face_measure[mesh.inc_face],
                         minlength=mesh.n_cells)
    for c in np.flatnonzero(np.linalg.norm(closure, axis=1) > tol * cscale):
        out.append(Violation("closure", int(c), "faces do not close the cell boundary"))

    total = mesh.cell_measure.sum()
    if abs(total - mesh.domain_measure) > PYRAMID_TOL * mesh.domain_measure:
        out.append(Violation("partition", -1,
                             f"sum m(K)={total!r} != m(Omega)={mesh.domain_measure!r}"))
    return out


def quality(mesh: AdmissibleMesh) -> MeshQuality:
    """Largest ``xi`` with ``d(x_K, sigma) >= xi d_sigma``, and the mesh size ``h``."""
    ratio = mesh.d_cell_face / mesh.d_sigma[mesh.inc_face]
    return MeshQuality(xi=float(ratio.min()), h=float(mesh.cell_diam.max()))


def is_convex_domain(mesh: AdmissibleMesh, tol: float = DEFAULT_TOL) -> bool:
    """True when every node lies on the inner side of every boundary face."""
    ext = mesh.exterior_faces
    n = mesh.face_normal[ext]
    off = np.einsum("fd,fd->f", n, mesh.face_centroid[ext])
    scale = float(mesh.cell_diam.max())
    for lo in range(0, len(ext), 256):
        side = mesh.nodes @ n[lo:lo + 256].T - off[lo:lo + 256]
        if np.any(side > tol * scale):
            return False
    return True


# -- generators ------------------------------------------------------------


def build_structured(dim: int, n: int, lower: Sequence[float] | None = None,
                     upper: Sequence[float] | None = None) -> AdmissibleMesh:
    """Uniform Cartesian grid of ``n`` cells per axis on a box, centers at centroids."""
    if dim not in (2, 3):
        raise MeshError(f"dimension must be 2 or 3, got {dim}")
    if int(n) != n or n < 1:
        raise MeshError(f"need at least one cell per axis, got n={n}")
    n = int(n)
    lo = np.zeros(dim) if lower is None else np.asarray(lower, dtype=float)
    hi = np.ones(dim) if upper is None else np.asarray(upper, dtype=float)
    if lo.shape != (dim,) or hi.shape != (dim,) or not np.all(hi > lo):
        raise MeshError(f"degenerate box {lo.tolist()} .. {hi.tolist()}")

    axes = [np.linspace(lo[a], hi[a], n + 1) for a in range(dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel(order="F") for g in grids], axis=1)
    nshape = (n + 1,) * dim
    cshape = (n,) * dim

    def node_id(idx):
        return np.ravel_multi_index(idx, nshape, order="F")

    cidx = np.indices(cshape).reshape(dim, -1, order="F")
    if dim == 2:
        offs = [(0, 0), (1, 0), (1, 1), (0, 1)]
    else:
        offs = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
                (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
    cells = np.stack([node_id(tuple(cidx[a] + o[a] for a in range(dim))) for o in offs], axis=1)
    step = (hi - lo) / n
    centers = lo + (cidx.T + 0.5) * step

    faces, face_cells = [], []
    tags: dict[str, list[int]] = {}
    count = 0
    for a in range(dim):
        others = [b for b in range(dim) if b != a]
        fshape = tuple(n + 1 if b == a else n for b in range(dim))
        fidx = np.indices(fshape).reshape(dim, -1, order="F")
        corner = [(0,), (1,)] if dim == 2 else [(0, 0), (1, 0), (1, 1), (0, 1)]
        fv = []
        for c in corner:
            idx = [fidx[b].copy() for b in range(dim)]
            for b, o in zip(others, c):
                idx[b] = idx[b] + o
            fv.append(node_id(tuple(idx)))
        fv = np.stack(fv, axis=1)
        below = fidx.copy()
        below[a] -= 1
        has_below = fidx[a] > 0
        has_above = fidx[a] < n
        lower_cell = np.where(has_below, np.ravel_multi_index(
            np.where(has_below, below, 0), cshape, order="F"), -1)
        above = np.minimum(fidx, n - 1)
        upper_cell = np.where(has_above, np.ravel_multi_index(above, cshape, order="F"), -1)
        K = np.where(has_below, lower_cell, upper_cell)
        L = np.where(has_below & has_above, upper_cell, -1)
        faces.append(fv)
        face_cells.append(np.stack([K, L], axis=1))
        ids = count + np.arange(len(fv))
        tags[_AXIS_SIDES[a][0]] = ids[fidx[a] == 0].tolist()
        tags[_AXIS_SIDES[a][1]] = ids[fidx[a] == n].tolist()
        count += len(fv)
    return AdmissibleMesh(nodes, cells, centers, np.concatenate(faces),
                          np.concatenate(face_cells), tags,
                          domain_measure=float(np.prod(hi - lo)))


# Acute triangulation of the unit square (24 triangles, largest angle ~79.8 deg).
_SQUARE_NODES = np.array([
    [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.0], [1.0, 0.5],
    [0.5, 1.0], [0.0, 0.5], [0.5, 0.5], [0.25, 0.4], [0.4, 0.25], [0.6, 0.25],
    [0.75, 0.4], [0.75, 0.6], [0.6, 0.75], [0.4, 0.75], [0.25, 0.6]])
_SQUARE_TRIS = np.array([
    [4, 10, 0], [5, 12, 1], [6, 14, 2], [7, 16, 3], [9, 7, 0], [9, 10, 8],
    [9, 16, 7], [10, 9, 0], [10, 11, 8], [11, 4, 1], [11, 10, 4], [11, 12, 8],
    [12, 11, 1], [12, 13, 8], [13, 5, 2], [13, 12, 5], [13, 14, 8], [14, 13, 2],
    [14, 15, 8], [15, 6, 3], [15, 14, 6], [15, 16, 8], [16, 9, 8], [16, 15, 3]])

POLYGONS = {
    "square": np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
    "equilateral": np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]]),
    "hexagon": np.array([[np.cos(t), np.sin(t)] for t in np.arange(6) * np.pi / 3.0]),
}
_SQUARE_SIDES = ("bottom", "right", "top", "left")


def circumcenters(pts: np.ndarray) -> np.ndarray:
    """Circumcenters of triangles ``pts`` of shape (n, 3, 2)."""
    a, b, c = pts[:, 0], pts[:, 1], pts[:, 2]
    ba, ca = b - a, c - a
    d = 2.0 * _cross2(ba, ca)
    bb, cc = (ba**2).sum(axis=1), (ca**2).sum(axis=1)
    ux = (ca[:, 1] * bb - ba[:, 1] * cc) / d
    uy = (ba[:, 0] * cc - ca[:, 0] * bb) / d
    return a + np.stack([ux, uy], axis=1)


def _max_angle_cos(pts: np.ndarray) -> np.ndarray:
    """Smallest normalized dot product over the three corners of each triangle."""
    worst = np.full(len(pts), np.inf)
    for i in range(3):
        u = pts[:, (i + 1) % 3] - pts[:, i]
        v = pts[:, (i + 2) % 3] - pts[:, i]
        cos = (u * v).sum(axis=1) / np.linalg.norm(u, axis=1) / np.linalg.norm(v, axis=1)
        worst = np.minimum(worst, cos)
    return worst


def red_refine(nodes: np.ndarray, tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split each triangle into four similar ones through the edge midpoints."""
    edges = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(edges, axis=0, return_inverse=True)
    mids = len(nodes) + inv.reshape(3, -1).T
    new_nodes = np.vstack([nodes, 0.5 * (nodes[uniq[:, 0]] + nodes[uniq[:, 1]])])
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = mids[:, 0], mids[:, 1], mids[:, 2]
    new_tris = np.concatenate([
        np.stack([a, ab, ca], axis=1), np.stack([ab, b, bc], axis=1),
        np.stack([ca, bc, c], axis=1), np.stack([ab, bc, ca], axis=1)])
    return new_nodes, new_tris


def mesh_from_triangles(nodes: np.ndarray, tris: np.ndarray, centers: np.ndarray,
                        polygon: np.ndarray | None = None,
                        side_names: Sequence[str] | None = None) -> AdmissibleMesh:
    """Build a 2-D mesh from a conforming triangulation."""
    edges = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    owner = np.tile(np.arange(len(tris)), 3)
    uniq, inv, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
    if counts.max() > 2:
        raise MeshError("non-manifold triangulation: an edge is shared by three triangles")
    order = np.argsort(inv, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    face_cells = np.full((len(uniq), 2), -1, dtype=np.int64)
    face_cells[:, 0] = owner[order[starts]]
    two = counts == 2
    face_cells[two, 1] = owner[order[starts[two] + 1]]
    tags = {}
    if polygon is not None:
        names = side_names or [f"side{i}" for i in range(len(polygon))]
        ext = np.flatnonzero(~two)
        mid = 0.5 * (nodes[uniq[ext, 0]] + nodes[uniq[ext, 1]])
        scale = np.ptp(polygon, axis=0).max()
        for i, name in enumerate(names):
            p, q = polygon[i], polygon[(i + 1) % len(polygon)]
            t = (q - p) / np.linalg.norm(q - p)
            dist = np.abs(_cross2(t[None, :], mid - p))
            tags[name] = ext[dist < 1e-9 * scale].tolist()
    return AdmissibleMesh(nodes, tris, centers, uniq, face_cells, tags)


def _convex_ccw(polygon: np.ndarray) -> np.ndarray:
    poly = np.asarray(polygon, dtype=float)
    if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 3:
        raise MeshError("domain must be a polygon given as (k>=3, 2) vertices")
    area, _ = _polygon_area_centroid(poly[None])
    if area[0] < 0:
        poly = poly[::-1]
    e = np.roll(poly, -1, axis=0) - poly
    turn = _cross2(e, np.roll(e, -1, axis=0))
    if np.any(turn <= 0):
        raise MeshError("domain polygon is not strictly convex")
    return poly


def build_acute_triangulation(n: int, domain="square") -> AdmissibleMesh:
    """Acute triangulation with circumcenters as cell centers.

    The unit square uses a fixed acute seed; any other convex polygon is
    split into a fan around its vertex mean (a triangle is kept as is).  The
    seed is then red-refined ``n`` times, which preserves all angles, so
    circumcenters stay strictly inside their triangles at every level.
    """
    if int(n) != n or n < 0:
        raise MeshError(f"refinement level must be >= 0, got {n}")
    side_names = None
    if isinstance(domain, str):
        if domain not in POLYGONS:
            raise MeshError(f"unknown domain {domain!r}; known: {sorted(POLYGONS)}")
        polygon = POLYGONS[domain]
        if domain == "square":
            side_names = _SQUARE_SIDES
    else:
        polygon = domain
    polygon = _convex_ccw(polygon)

    if isinstance(domain, str) and domain == "square":
        nodes, tris = _SQUARE_NODES.copy(), _SQUARE_TRIS.copy()
    elif len(polygon) == 3:
        nodes, tris = polygon.copy(), np.array([[0, 1, 2]])
    else:
        k = len(polygon)
        nodes = np.vstack([polygon, polygon.mean(axis=0)])
        tris = np.array([[i, (i + 1) % k, k] for i in range(k)])

    cos = _max_angle_cos(nodes[tris])
    bad = np.flatnonzero(~(cos > 1e-12))
    if bad.size:
        t = int(bad[0])
        ang = np.degrees(np.arccos(np.clip(cos[t], -1, 1)))
        raise NonAcuteTriangleError(
            f"triangle {t} with vertices {nodes[tris[t]].tolist()} is not acute "
            f"(largest angle {ang:.2f} deg)")
    for _ in range(int(n)):
        nodes, tris = red_refine(nodes, tris)
    return mesh_from_triangles(nodes, tris, circumcenters(nodes[tris]), polygon, side_names)


def build_perturbed_quads(n: int, amplitude: float = 0.2, seed: int = 0) -> AdmissibleMesh:
    """Unit-square quadrilateral grid with randomly displaced interior nodes.

    Centers are the cell centroids.  Such meshes are generally *not*
    orthogonal (check_admissible reports it); they exercise schemes that
    do not need orthogonality, e.g. DDFV.
    """
    if not 0 <= amplitude < 0.5:
        raise MeshError("amplitude must lie in [0, 0.5) to keep cells convex")
    base = build_structured(2, n)
    nodes = base.nodes.copy()
    rng = np.random.default_rng(seed)
    inner = np.all((nodes > 1e-12) & (nodes < 1 - 1e-12), axis=1)
    nodes[inner] += amplitude / n * rng.uniform(-1.0, 1.0, size=(int(inner.sum()), 2))
    _, cen = _polygon_area_centroid(nodes[base.cell_verts])
    return AdmissibleMesh(nodes, base.cell_verts, cen, base.face_verts, base.face_cells,
                          {k: v for k, v in base.tags.items() if k != "all"},
                          domain_measure=1.0)


FAMILIES = ("square", "cube", "acute-square", "equilateral", "hexagon", "perturbed")


def refine(family: str, level: int, seed: int = 0) -> AdmissibleMesh:
    """Mesh ``level`` of a named refinement family (h roughly halves per level)."""
    if int(level) != level or level < 0:
        raise MeshError(f"level must be >= 0, got {level}")
    level = int(level)
    if family == "square":
        return build_structured(2, 2**level)
    if family == "cube":
        return build_structured(3, 2**level)
    if family == "acute-square":
        return build_acute_triangulation(level, "square")
    if family in ("equilateral", "hexagon"):
        return build_acute_triangulation(level, family)
    if family == "perturbed":
        return build_perturbed_quads(2**level, seed=seed + level)
    raise MeshError(f"unsupported mesh family {family!r}; known: {', '.join(FAMILIES)}")
