"""Discrete duality finite volume (DDFV) meshes on 2-D polygonal domains.

Unknowns live on the primal cells (interior cells plus boundary edges seen
as degenerate cells) and on the dual cells (one per mesh vertex).  The
gradient is reconstructed on diamonds, one per primal edge.

Primal unknowns are numbered interior cells first, then one per exterior
face in increasing face order.  Dual unknowns follow the node numbering of
the primal mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import AdmissibleMesh, BoundaryTag, MeshError, circumcenters, _polygon_area_centroid
from .space import _check_p, abs_pow, root

DEFAULT_TOL = 1e-12


class DDFVError(MeshError):
    """The primal mesh and centers do not define a valid DDFV mesh."""


class FlatDiamondError(DDFVError):
    pass


class NotStarShapedError(DDFVError):
    pass


def _det(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.stack([-v[:, 1], v[:, 0]], axis=1)


class DDFVMesh:
    """Primal, dual and diamond meshes built from a 2-D polygonal mesh.

    Diamond ``D`` joins primal centers ``x_K, x_L`` and vertices
    ``x_K*, x_L*``; the vertices are ordered so that
    ``det(x_L* - x_K*, x_L - x_K) > 0``.  This makes
    ``(tau_{K*,L*}, n_{sigma,K})`` and ``(n_{sigma*,K*}, tau_{K,L})`` direct
    bases with ``n_{sigma,K}`` pointing from K to L and ``n_{sigma*,K*}``
    from K* to L*.
    """

    def __init__(self, primal: AdmissibleMesh, centers=None, tol: float = DEFAULT_TOL):
        if primal.dim != 2:
            raise DDFVError("DDFV meshes are two-dimensional")
        self.primal = primal
        nK = primal.n_cells
        ext = primal.exterior_faces
        nB = len(ext)
        xK = primal.centers if centers is None else np.array(centers, dtype=float)
        if xK.shape != (nK, 2):
            raise DDFVError(f"need {nK} centers, got shape {xK.shape}")

        self.n_interior = nK
        self.n_boundary = nB
        self.boundary_face = ext
        bidx = np.full(primal.n_faces, -1, dtype=np.int64)
        bidx[ext] = nK + np.arange(nB)
        self.primal_centers = np.vstack([xK, primal.face_centroid[ext]])
        self.dual_centers = primal.nodes
        on_boundary = np.zeros(len(primal.nodes), dtype=bool)
        on_boundary[primal.face_verts[ext].ravel()] = True
        self.dual_boundary = on_boundary

        # one diamond per primal edge
        fc = primal.face_cells
        K = fc[:, 0].copy()
        L = np.where(fc[:, 1] >= 0, fc[:, 1], bidx)
        a, b = primal.face_verts[:, 0].copy(), primal.face_verts[:, 1].copy()
        P, Q = self.primal_centers, self.dual_centers
        orient = _det(Q[b] - Q[a], P[L] - P[K])
        scale = np.linalg.norm(Q[b] - Q[a], axis=1) * np.linalg.norm(P[L] - P[K], axis=1)
        flat = ~(np.abs(orient) > tol * scale)
        if np.any(flat):
            d = int(np.flatnonzero(flat)[0])
            raise FlatDiamondError(f"diamond of face {d} is flat (sin alpha = 0)")
        swap = orient < 0
        Ks = np.where(swap, b, a)
        Ls = np.where(swap, a, b)
        self.K, self.L, self.Kstar, self.Lstar = K, L, Ks, Ls
        self.interior = fc[:, 1] >= 0

        xk, xl, xks, xls = P[K], P[L], Q[Ks], Q[Ls]
        e = xls - xks
        s = xl - xk
        self.m_sigma = np.linalg.norm(e, axis=1)
        self.m_sigma_star = np.linalg.norm(s, axis=1)
        self.tau_star = e / self.m_sigma[:, None]
        self.tau = s / self.m_sigma_star[:, None]
        self.sin_alpha = _det(self.tau_star, self.tau)
        self.n_sigma_K = _rot90(self.tau_star)
        self.n_sigma_star_K_star = np.stack([self.tau[:, 1], -self.tau[:, 0]], axis=1)

        quad = np.stack([xk, xls, xl, xks], axis=1)
        self.m_D = 0.5 * _det(quad, np.roll(quad, -1, axis=1)).sum(axis=1)
        self.diamond_diam = np.maximum(self.m_sigma, self.m_sigma_star)

        # Sub-triangles of the diamond, one per adjacent primal or dual cell.
        tri_K = 0.5 * _det(xls - xk, xks - xk)
        tri_L = 0.5 * _det(xks - xl, xls - xl)
        tri_Ks = 0.5 * _det(xk - xks, xl - xks)
        tri_Ls = 0.5 * _det(xl - xls, xk - xls)
        tri_L[~self.interior] = 0.0
        floor = tol * self.m_sigma * self.m_sigma_star
        for tri, who, mask in ((tri_K, K, None), (tri_L, L, self.interior),
                               (tri_Ks, Ks, None), (tri_Ls, Ls, None)):
            bad = ~(tri > floor)
            if mask is not None:
                bad &= mask
            if np.any(bad):
                d = int(np.flatnonzero(bad)[0])
                kind = "dual" if who is Ks or who is Ls else "primal"
                raise NotStarShapedError(
                    f"{kind} cell {int(who[d])} is not star-shaped with respect to "
                    f"its center (diamond {d})")
        self.primal_measure = (np.bincount(K, tri_K, minlength=nK + nB)
                               + np.bincount(L, tri_L, minlength=nK + nB))
        self.primal_measure[nK:] = 0.0
        self.dual_measure = (np.bincount(Ks, tri_Ks, minlength=len(Q))
                             + np.bincount(Ls, tri_Ls, minlength=len(Q)))

        # Boundary diamonds: distances from the vertices to the edge midpoint.
        self.d_Kstar_L = np.full(self.n_diamonds, np.nan)
        self.d_Lstar_L = np.full(self.n_diamonds, np.nan)
        bd = ~self.interior
        self.d_Kstar_L[bd] = np.linalg.norm(xks[bd] - xl[bd], axis=1)
        self.d_Lstar_L[bd] = np.linalg.norm(xls[bd] - xl[bd], axis=1)

        self.domain_measure = primal.domain_measure
        self.h = float(primal.cell_diam.max())
        for arr in vars(self).values():
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @property
    def n_primal(self) -> int:
        return self.n_interior + self.n_boundary

    @property
    def n_dual(self) -> int:
        return len(self.dual_centers)

    @property
    def n_diamonds(self) -> int:
        return len(self.K)

    @property
    def n_unknowns(self) -> int:
        return self.n_primal + self.n_dual

    @property
    def boundary_primal(self) -> np.ndarray:
        return np.arange(self.n_interior, self.n_primal)

    def unknown_points(self) -> np.ndarray:
        """Centers of all primal cells followed by all dual cells."""
        return np.vstack([self.primal_centers, self.dual_centers])

    def unknown_weights(self) -> np.ndarray:
        """Half cell measures: the weights of the ``L^p`` norm."""
        return 0.5 * np.concatenate([self.primal_measure, self.dual_measure])

    def gradient_matrix(self) -> sp.csr_matrix:
        """Sparse ``(2 n_D, n_primal + n_dual)`` map from unknowns to gradients.

        Rows ``2D`` and ``2D+1`` hold the x and y components on diamond D.
        """
        nD, nP = self.n_diamonds, self.n_primal
        c1 = 1.0 / (self.sin_alpha * self.m_sigma_star)
        c2 = 1.0 / (self.sin_alpha * self.m_sigma)
        rows, cols, vals = [], [], []
        for comp in (0, 1):
            r = 2 * np.arange(nD) + comp
            a = c1 * self.n_sigma_K[:, comp]
            b = c2 * self.n_sigma_star_K_star[:, comp]
            rows += [r, r, r, r]
            cols += [self.L, self.K, nP + self.Lstar, nP + self.Kstar]
            vals += [a, -a, b, -b]
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(2 * nD, self.n_unknowns))

    def __repr__(self) -> str:
        return (f"DDFVMesh(primal={self.n_interior}+{self.n_boundary}, dual={self.n_dual}, "
                f"diamonds={self.n_diamonds})")


def primal_centers(primal: AdmissibleMesh, kind: str = "given") -> np.ndarray:
    """Centers for ``build_ddfv``: the mesh's own, cell centroids, or circumcenters."""
    if kind == "given":
        return primal.centers
    if kind == "centroid":
        X = primal.nodes[primal.cell_verts]
        _, cen = _polygon_area_centroid(X)
        return cen
    if kind == "circumcenter":
        if np.any(primal.cell_nverts != 3):
            raise DDFVError("circumcenters need a triangular mesh")
        return circumcenters(primal.nodes[primal.cell_verts[:, :3]])
    raise DDFVError(f"unknown center choice {kind!r}")


def build_ddfv(primal: AdmissibleMesh, centers: str = "given",
               tol: float = DEFAULT_TOL) -> DDFVMesh:
    return DDFVMesh(primal, primal_centers(primal, centers), tol)


@dataclass(frozen=True)
class DDFVQuality:
    sin_alpha_T: float
    zeta: float


def zeta_ratios(mesh: DDFVMesh) -> tuple[np.ndarray, np.ndarray]:
    """``m(V) / sum_{D in D_V} m_sigma m_sigma*`` for interior primal and all dual cells."""
    w = mesh.m_sigma * mesh.m_sigma_star
    sp_ = (np.bincount(mesh.K, w, minlength=mesh.n_primal)
           + np.bincount(mesh.L, w, minlength=mesh.n_primal))[: mesh.n_interior]
    sd = (np.bincount(mesh.Kstar, w, minlength=mesh.n_dual)
          + np.bincount(mesh.Lstar, w, minlength=mesh.n_dual))
    return mesh.primal_measure[: mesh.n_interior] / sp_, mesh.dual_measure / sd


def ddfv_quality(mesh: DDFVMesh) -> DDFVQuality:
    zp, zd = zeta_ratios(mesh)
    return DDFVQuality(sin_alpha_T=float(np.abs(mesh.sin_alpha).min()),
                       zeta=float(min(zp.min(), zd.min())))


@dataclass(frozen=True)
class StructureReport:
    """Largest relative residual of each structural identity."""

    diamond_identity: float
    diamond_partition: float
    primal_partition: float
    dual_partition: float

    def worst(self) -> float:
        return max(self.diamond_identity, self.diamond_partition,
                   self.primal_partition, self.dual_partition)


def structure_residuals(mesh: DDFVMesh) -> StructureReport:
    m = mesh.domain_measure
    ident = np.abs(2 * mesh.m_D - mesh.m_sigma * mesh.m_sigma_star * mesh.sin_alpha) / mesh.m_D
    return StructureReport(
        diamond_identity=float(ident.max()),
        diamond_partition=abs(mesh.m_D.sum() - m) / m,
        primal_partition=abs(mesh.primal_measure.sum() - m) / m,
        dual_partition=abs(mesh.dual_measure.sum() - m) / m)


@dataclass(frozen=True, eq=False)
class DDFVFunction:
    """An element of Z(T): values on all primal cells and all dual cells."""

    mesh: DDFVMesh
    primal: np.ndarray
    dual: np.ndarray

    def __post_init__(self):
        p = np.array(self.primal, dtype=float).ravel()
        d = np.array(self.dual, dtype=float).ravel()
        if len(p) != self.mesh.n_primal or len(d) != self.mesh.n_dual:
            raise ValueError(f"expected {self.mesh.n_primal} primal and {self.mesh.n_dual} "
                             f"dual values, got {len(p)} and {len(d)}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(d))):
            raise ValueError("values must be finite")
        p.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "primal", p)
        object.__setattr__(self, "dual", d)

    @classmethod
    def from_vector(cls, mesh: DDFVMesh, vec) -> "DDFVFunction":
        vec = np.asarray(vec, dtype=float)
        return cls(mesh, vec[: mesh.n_primal], vec[mesh.n_primal:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.primal, self.dual])

    def __add__(self, other):
        if isinstance(other, DDFVFunction):
            return DDFVFunction(self.mesh, self.primal + other.primal, self.dual + other.dual)
        return DDFVFunction(self.mesh, self.primal + float(other), self.dual + float(other))

    def __sub__(self, other):
        if isinstance(other, DDFVFunction):
            return DDFVFunction(self.mesh, self.primal - other.primal, self.dual - other.dual)
        return self + (-float(other))

    def __mul__(self, scalar):
        s = float(scalar)
        return DDFVFunction(self.mesh, self.primal * s, self.dual * s)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not (np.any(self.primal[: self.mesh.n_interior]) or np.any(self.dual))


def sample_ddfv(f, mesh: DDFVMesh) -> DDFVFunction:
    """``u_K = f(x_K)`` on every primal and dual center."""
    vals = np.broadcast_to(np.asarray(f(*mesh.unknown_points().T), dtype=float),
                           (mesh.n_unknowns,))
    return DDFVFunction.from_vector(mesh, vals)


def discrete_gradient(u: DDFVFunction) -> np.ndarray:
    """Per-diamond gradient, shape ``(n_D, 2)``."""
    m = u.mesh
    dp = (u.primal[m.L] - u.primal[m.K]) / m.m_sigma_star
    dd = (u.dual[m.Lstar] - u.dual[m.Kstar]) / m.m_sigma
    return (dp[:, None] * m.n_sigma_K + dd[:, None] * m.n_sigma_star_K_star) / m.sin_alpha[:, None]


def ddfv_lp_norm(u: DDFVFunction, p: float) -> float:
    """``(1/2 sum_K m_K |u_K|^p + 1/2 sum_K* m_K* |u_K*|^p)^(1/p)``."""
    p = _check_p(p)
    m = u.mesh
    nK = m.n_interior
    s = 0.5 * (np.sum(m.primal_measure[:nK] * abs_pow(u.primal[:nK], p))
               + np.sum(m.dual_measure * abs_pow(u.dual, p)))
    return root(s, p)


def ddfv_w1p_seminorm(u: DDFVFunction, p: float) -> float:
    """``(sum_D m_D |grad_D u|^p)^(1/p)`` with the Euclidean norm of the gradient."""
    p = _check_p(p)
    g = discrete_gradient(u)
    mag2 = (g * g).sum(axis=1)
    gp = mag2 if p == 2.0 else np.sqrt(mag2) ** p
    return root(np.sum(u.mesh.m_D * gp), p)


def ddfv_w1p_norm(u: DDFVFunction, p: float) -> float:
    return ddfv_lp_norm(u, p) + ddfv_w1p_seminorm(u, p)


def ddfv_means(u: DDFVFunction) -> tuple[float, float]:
    """``(sum_K m_K u_K, sum_K* m_K* u_K*)``."""
    m = u.mesh
    nK = m.n_interior
    return (float(np.sum(m.primal_measure[:nK] * u.primal[:nK])),
            float(np.sum(m.dual_measure * u.dual)))


def project_zero_mean(u: DDFVFunction) -> DDFVFunction:
    """Subtract the primal and dual means separately.

    The primal shift is applied to the degenerate boundary cells too, so the
    gradient is unchanged.
    """
    m = u.mesh
    wp = m.primal_measure[: m.n_interior].sum()
    wd = m.dual_measure.sum()
    p, d = u.primal, u.dual
    for _ in range(2):  # second pass removes the rounding left by the first
        sp_, sd = ddfv_means(DDFVFunction(m, p, d))
        p, d = p - sp_ / wp, d - sd / wd
    return DDFVFunction(m, p, d)


def dirichlet_sets(mesh: DDFVMesh, gamma0: BoundaryTag | None) -> tuple[np.ndarray, np.ndarray]:
    """Primal and dual unknown ids fixed to zero by homogeneous data on gamma0."""
    if not gamma0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    faces = np.fromiter(gamma0.faces, dtype=np.int64)
    if np.any(mesh.primal.face_cells[faces, 1] >= 0):
        raise ValueError(f"boundary tag {gamma0.name!r} contains interior faces")
    pos = np.searchsorted(mesh.boundary_face, faces)
    prim = np.sort(mesh.n_interior + pos)
    dual = np.unique(mesh.primal.face_verts[faces].ravel())
    return prim, dual


def apply_dirichlet_mask(u: DDFVFunction, gamma0: BoundaryTag | None) -> DDFVFunction:
    """Zero the boundary edges in gamma0 and the boundary vertices touching it."""
    prim, dual = dirichlet_sets(u.mesh, gamma0)
    p, d = u.primal.copy(), u.dual.copy()
    p[prim] = 0.0
    d[dual] = 0.0
    return DDFVFunction(u.mesh, p, d)


def satisfies_dirichlet(u: DDFVFunction, gamma0: BoundaryTag | None) -> bool:
    prim, dual = dirichlet_sets(u.mesh, gamma0)
    return not (np.any(u.primal[prim]) or np.any(u.dual[dual]))
