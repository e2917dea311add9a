"""Demo DDFV solver for ``-div(A grad u) = f`` with Dirichlet data.

The scheme is the variational form of DDFV:

    sum_D m_D (A_D grad_D u) . grad_D v = 1/2 sum_K m_K f_K v_K + 1/2 sum_K* m_K* f_K* v_K*

for every ``v`` vanishing on the boundary unknowns.  The discrete divergence
is thereby the adjoint of the discrete gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .ddfv import DDFVFunction, DDFVMesh, build_ddfv, ddfv_lp_norm, ddfv_w1p_seminorm, sample_ddfv
from .linalg import pcg
from .mesh import refine


class NonSPDError(ValueError):
    pass


TENSORS = {
    "iso": np.eye(2),
    "aniso": np.diag([1.0, 100.0]),
}


def _mms_sin(kx: float = 1.0, ky: float = 1.0):
    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(A):
        a11, a12, a21, a22 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]

        def f(x, y):
            sx, sy = np.sin(np.pi * x), np.sin(np.pi * y)
            cx, cy = np.cos(np.pi * x), np.cos(np.pi * y)
            return np.pi**2 * ((a11 + a22) * sx * sy - (a12 + a21) * cx * cy)
        return f
    return exact, source


def _mms_poly():
    def exact(x, y):
        return x * (1.0 - x) * y * (1.0 - y)

    def source(A):
        a11, a12, a21, a22 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]

        def f(x, y):
            return (2 * a11 * y * (1 - y) + 2 * a22 * x * (1 - x)
                    - (a12 + a21) * (1 - 2 * x) * (1 - 2 * y))
        return f
    return exact, source


# Manufactured solutions on the unit square vanishing on its boundary:
# name -> (exact, source builder taking a constant tensor).
MANUFACTURED = {"sin": _mms_sin(), "poly": _mms_poly()}


def diamond_centroids(mesh: DDFVMesh) -> np.ndarray:
    P, Q = mesh.primal_centers, mesh.dual_centers
    return 0.25 * (P[mesh.K] + P[mesh.L] + Q[mesh.Kstar] + Q[mesh.Lstar])


def tensor_field(mesh: DDFVMesh, A) -> np.ndarray:
    """Per-diamond 2x2 tensors from a constant matrix or a callable of (x, y)."""
    if callable(A):
        c = diamond_centroids(mesh)
        T = np.asarray(A(c[:, 0], c[:, 1]), dtype=float)
    else:
        T = np.asarray(A, dtype=float)
    T = np.broadcast_to(T, (mesh.n_diamonds, 2, 2))
    if not np.allclose(T, np.swapaxes(T, 1, 2), rtol=1e-12, atol=0.0):
        raise NonSPDError("diffusion tensor is not symmetric")
    if np.any(np.linalg.eigvalsh(T)[:, 0] <= 0):
        raise NonSPDError("diffusion tensor is not positive definite")
    return T


def stiffness(mesh: DDFVMesh, T: np.ndarray) -> sp.csr_matrix:
    G = mesh.gradient_matrix()
    W = sp.block_diag(list(mesh.m_D[:, None, None] * T), format="csr")
    return (G.T @ W @ G).tocsr()


@dataclass
class SolveResult:
    u: DDFVFunction
    residual: float
    iterations: int
    energy: float


def solve_anisotropic_laplace(mesh: DDFVMesh, A, f: Callable, g: Callable | None = None,
                              rtol: float = 1e-10) -> SolveResult:
    """Solve with Dirichlet data ``g`` (default 0) on the whole boundary."""
    T = tensor_field(mesh, A)
    S = stiffness(mesh, T)
    nP = mesh.n_primal
    fixed = np.zeros(mesh.n_unknowns, dtype=bool)
    fixed[mesh.n_interior:nP] = True
    fixed[nP:][mesh.dual_boundary] = True
    free = ~fixed

    pts = mesh.unknown_points()
    rhs = mesh.unknown_weights() * np.broadcast_to(
        np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float), (mesh.n_unknowns,))
    x = np.zeros(mesh.n_unknowns)
    if g is not None:
        x[fixed] = np.broadcast_to(np.asarray(g(pts[fixed, 0], pts[fixed, 1]), dtype=float),
                                   (int(fixed.sum()),))
    b = rhs[free] - S[free][:, fixed] @ x[fixed]
    xf, info = pcg(S[free][:, free], b, rtol=rtol)
    x[free] = xf
    u = DDFVFunction.from_vector(mesh, x)
    return SolveResult(u=u, residual=info.residual, iterations=info.iterations,
                       energy=float(x @ (S @ x)))


@dataclass
class ConvergenceRow:
    level: int
    h: float
    unknowns: int
    error_l2: float
    error_h1: float
    order_l2: float
    iterations: int
    residual: float
    energy: float
    stability: float  # ||u||_{0,2} / |u|_{1,2}


def convergence_study(levels, A="iso", mms: str = "sin", family: str = "square",
                      rtol: float = 1e-10) -> list[ConvergenceRow]:
    """Errors of the manufactured solution ``mms`` over refinement levels."""
    if mms not in MANUFACTURED:
        raise ValueError(f"unknown manufactured solution {mms!r}; known: {sorted(MANUFACTURED)}")
    tensor = TENSORS[A] if isinstance(A, str) else np.asarray(A, dtype=float)
    exact, source = MANUFACTURED[mms]
    rows: list[ConvergenceRow] = []
    for level in levels:
        mesh = build_ddfv(refine(family, level))
        res = solve_anisotropic_laplace(mesh, tensor, source(tensor), rtol=rtol)
        err = res.u - sample_ddfv(exact, mesh)
        e2 = ddfv_lp_norm(err, 2)
        order = float("nan")
        if rows:
            order = np.log(rows[-1].error_l2 / e2) / np.log(rows[-1].h / mesh.h)
        semi = ddfv_w1p_seminorm(res.u, 2)
        rows.append(ConvergenceRow(
            level=int(level), h=mesh.h, unknowns=mesh.n_unknowns, error_l2=e2,
            error_h1=ddfv_w1p_seminorm(err, 2), order_l2=float(order),
            iterations=res.iterations, residual=res.residual, energy=res.energy,
            stability=ddfv_lp_norm(res.u, 2) / semi if semi > 0 else float("nan")))
    return rows
