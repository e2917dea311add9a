"""Piecewise constant functions on a finite volume mesh and their discrete norms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import AdmissibleMesh, BoundaryTag


class ExponentError(ValueError):
    """An exponent is outside the admissible range."""


def _check_p(p: float) -> float:
    p = float(p)
    if not (p >= 1.0 and np.isfinite(p)):
        raise ExponentError(f"p must be a finite real >= 1, got {p}")
    return p


def abs_pow(x: np.ndarray, p: float) -> np.ndarray:
    """``|x|**p`` with exact fast paths for p = 1 and p = 2."""
    if p == 1.0:
        return np.abs(x)
    if p == 2.0:
        return x * x
    return np.abs(x) ** p


def root(s: float, p: float) -> float:
    if p == 1.0:
        return float(s)
    if p == 2.0:
        return float(np.sqrt(s))
    return float(s ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """An element of X(M): one value per cell."""

    mesh: AdmissibleMesh
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if len(v) != self.mesh.n_cells:
            raise ValueError(f"{len(v)} values for {self.mesh.n_cells} cells")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "DiscreteFunction":
        return DiscreteFunction(self.mesh, values)

    def __add__(self, other):
        if isinstance(other, DiscreteFunction):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DiscreteFunction):
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, scalar):
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)


def lp_norm(u: DiscreteFunction, p: float) -> float:
    """``(sum_K m(K) |u_K|^p)^(1/p)``."""
    p = _check_p(p)
    return root(np.sum(u.mesh.cell_measure * abs_pow(u.values, p)), p)


def _interior_jumps(u: DiscreteFunction) -> tuple[np.ndarray, np.ndarray]:
    m = u.mesh
    f = m.interior_faces
    jump = u.values[m.face_cells[f, 1]] - u.values[m.face_cells[f, 0]]
    return f, jump


def w1p_seminorm(u: DiscreteFunction, p: float) -> float:
    """Interior-jump seminorm ``(sum_{K|L} m(s)/d_s^(p-1) |u_L-u_K|^p)^(1/p)``."""
    p = _check_p(p)
    m = u.mesh
    f, jump = _interior_jumps(u)
    weight = m.face_measure[f] if p == 1.0 else m.face_measure[f] / m.d_sigma[f] ** (p - 1.0)
    return root(np.sum(weight * abs_pow(jump, p)), p)


def face_jumps(u: DiscreteFunction, gamma0: BoundaryTag | None) -> np.ndarray:
    """``D_sigma u`` for every face: interior jump, ``|u_K|`` on gamma0, else 0."""
    m = u.mesh
    d = np.zeros(m.n_faces)
    f, jump = _interior_jumps(u)
    d[f] = np.abs(jump)
    if gamma0:
        g = np.fromiter(gamma0.faces, dtype=np.int64)
        if np.any(m.face_cells[g, 1] >= 0):
            raise ValueError(f"boundary tag {gamma0.name!r} contains interior faces")
        d[g] = np.abs(u.values[m.face_cells[g, 0]])
    return d


def w1p_seminorm_dirichlet(u: DiscreteFunction, p: float,
                           gamma0: BoundaryTag | None) -> float:
    """Seminorm counting boundary jumps ``|u_K|`` on the faces of ``gamma0``."""
    p = _check_p(p)
    m = u.mesh
    d = face_jumps(u, gamma0)
    weight = m.face_measure if p == 1.0 else m.face_measure / m.d_sigma ** (p - 1.0)
    return root(np.sum(weight * abs_pow(d, p)), p)


@dataclass(frozen=True)
class NormSpec:
    p: float
    gamma0: BoundaryTag | None = None

    def __post_init__(self):
        _check_p(self.p)


def w1p_norm(u: DiscreteFunction, spec: NormSpec) -> float:
    if spec.gamma0 is None:
        semi = w1p_seminorm(u, spec.p)
    else:
        semi = w1p_seminorm_dirichlet(u, spec.p, spec.gamma0)
    return lp_norm(u, spec.p) + semi


def total_variation(u: DiscreteFunction) -> float:
    """Total variation of a piecewise constant function: the sum of
    ``m(sigma) |u_L - u_K|`` over interior faces.

    For piecewise constants on a polytopal partition the supremum defining
    TV is attained by the jump set, so this equals ``w1p_seminorm(u, 1)``.
    """
    return w1p_seminorm(u, 1.0)


def mean_value(u: DiscreteFunction) -> float:
    m = u.mesh
    return float(np.sum(m.cell_measure * u.values) / m.domain_measure)


def sample_scalar_field(f: Callable, mesh: AdmissibleMesh) -> DiscreteFunction:
    """``u_K = f(x_K)``; ``f`` receives the coordinates as separate arrays."""
    vals = f(*mesh.centers.T)
    return DiscreteFunction(mesh, np.broadcast_to(np.asarray(vals, dtype=float),
                                                  (mesh.n_cells,)))
