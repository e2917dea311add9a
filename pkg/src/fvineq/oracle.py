"""Best Dirichlet Sobolev-Poincare constant at p = q = 2 as an eigenvalue problem.

``sup_u ||u||_{0,2} / |u|_{1,2,Gamma0}`` equals ``1/sqrt(lambda_min)`` for the
generalized problem ``A u = lambda M u``, where ``u^T A u`` is the squared
seminorm and ``M = diag(m_K)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .linalg import ConvergenceError, pcg
from .mesh import AdmissibleMesh, BoundaryTag, build_structured


def dirichlet_form(mesh: AdmissibleMesh, gamma0: BoundaryTag | None) -> sp.csr_matrix:
    """Matrix of ``u -> |u|_{1,2,gamma0}^2``."""
    f = mesh.interior_faces
    w = mesh.face_measure[f] / mesh.d_sigma[f]
    K, L = mesh.face_cells[f, 0], mesh.face_cells[f, 1]
    n = mesh.n_cells
    diag = np.bincount(K, w, minlength=n) + np.bincount(L, w, minlength=n)
    if gamma0:
        g = np.fromiter(gamma0.faces, dtype=np.int64)
        diag += np.bincount(mesh.face_cells[g, 0], mesh.face_measure[g] / mesh.d_sigma[g],
                            minlength=n)
    off = sp.coo_matrix((-w, (K, L)), shape=(n, n))
    return (off + off.T + sp.diags(diag)).tocsr()


@dataclass(frozen=True)
class EigenOracleResult:
    n: int
    h: float
    lambda_min: float
    best_constant: float
    iterations: int


def inverse_iteration(A: sp.spmatrix, mass: np.ndarray, tol: float = 1e-10,
                      maxiter: int = 500) -> tuple[float, np.ndarray, int]:
    """Smallest eigenpair of ``A x = lambda diag(mass) x`` by inverse power iteration.

    Stops when ``||A x - lambda M x||_{M^-1} <= tol * lambda ||x||_M``.
    """
    x = np.ones(A.shape[0])
    x /= np.sqrt(x @ (mass * x))
    for it in range(1, maxiter + 1):
        y, _ = pcg(A, mass * x, rtol=1e-12)
        x = y / np.sqrt(y @ (mass * y))
        Ax = A @ x
        lam = float(x @ Ax)
        r = Ax - lam * mass * x
        if np.sqrt(r @ (r / mass)) <= tol * lam:
            return lam, x, it
    raise ConvergenceError(f"inverse iteration did not converge in {maxiter} steps")


def poincare_eigen_oracle(n: int, tol: float = 1e-10, maxiter: int = 500) -> EigenOracleResult:
    """Oracle on the ``n x n`` uniform unit-square grid with Dirichlet data on all sides."""
    mesh = build_structured(2, n)
    A = dirichlet_form(mesh, mesh.tag("all"))
    lam, _, it = inverse_iteration(A, mesh.cell_measure.copy(), tol, maxiter)
    return EigenOracleResult(n=n, h=1.0 / n, lambda_min=lam,
                             best_constant=float(1.0 / np.sqrt(lam)), iterations=it)


def closed_form_lambda_min(n: int) -> float:
    """``8 n^2 sin^2(pi / (2n))``.

    The 1-D factor with half-cell boundary distance is tridiagonal
    ``(-1, 2, -1)`` with 3 on both ends; its eigenvectors are
    ``sin(k pi (j - 1/2) / n)`` with eigenvalues ``4 sin^2(k pi / (2n))``.
    """
    return 8.0 * n * n * np.sin(np.pi / (2.0 * n)) ** 2


def dense_lambda_min(n: int) -> float:
    """Brute-force dense generalized eigensolve (small ``n`` only)."""
    mesh = build_structured(2, n)
    A = dirichlet_form(mesh, mesh.tag("all")).toarray()
    return float(scipy.linalg.eigh(A, np.diag(mesh.cell_measure), eigvals_only=True)[0])


CONTINUOUS_BEST_CONSTANT = 1.0 / (np.pi * np.sqrt(2.0))
