"""DDFV versions of the GNS, Sobolev-Poincare and Poincare-Wirtinger ratios."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ddfv import (DDFVFunction, DDFVMesh, apply_dirichlet_mask, build_ddfv,
                   ddfv_lp_norm, ddfv_means, ddfv_quality, ddfv_w1p_norm,
                   ddfv_w1p_seminorm, project_zero_mean, satisfies_dirichlet)
from .inequalities import (ConfigError, DegenerateSampleError, ExponentSet,
                           admissible_exponents, sp_exponents)
from .mesh import BoundaryTag, is_convex_domain, refine
from .sampling import SamplePoints, SamplerSpec, evaluate_samples, summarize
from .space import ExponentError

DDFV_KINDS = ("gns_general", "sp_general", "pw", "gns_dirichlet")
DDFV_FAMILIES = ("square", "perturbed", "acute-square", "equilateral", "hexagon")
MEAN_TOL = 1e-12


class PreconditionError(ValueError):
    """A DDFV function does not satisfy the hypotheses of the inequality."""


def ddfv_gns_exponents(p: float, q: float, theta: float) -> ExponentSet:
    if not 1.0 < p <= 2.0:
        raise ExponentError(f"DDFV GNS needs 1 < p <= 2, got p={p:g}")
    return admissible_exponents(p, q, 2, theta)


def _nonzero(u: DDFVFunction) -> None:
    if u.is_zero():
        raise DegenerateSampleError("u is identically zero")


def ddfv_gns_ratio(u: DDFVFunction, exps: ExponentSet,
                   gamma0: BoundaryTag | None = None) -> float:
    """``||u||_m / (||u||_{1,p}^theta ||u||_q^(1-theta))``.

    With ``gamma0`` the full norm becomes the seminorm, and ``u`` must
    already vanish on gamma0 (see :func:`apply_dirichlet_mask`).
    """
    if exps.theta is None or exps.N != 2:
        raise ConfigError("DDFV GNS ratio needs 2-D exponents with theta and m")
    _nonzero(u)
    if gamma0 is None:
        grad = ddfv_w1p_norm(u, exps.p)
    else:
        if not gamma0:
            raise ConfigError("Dirichlet variant needs a non-empty gamma0")
        if not satisfies_dirichlet(u, gamma0):
            raise PreconditionError("Dirichlet mask not applied: u is nonzero on gamma0")
        grad = ddfv_w1p_seminorm(u, exps.p)
    if exps.theta > 0 and grad == 0.0:
        raise DegenerateSampleError("gradient term vanishes")
    den = grad**exps.theta * ddfv_lp_norm(u, exps.q) ** (1.0 - exps.theta)
    if den == 0.0:
        raise DegenerateSampleError("denominator vanishes")
    return ddfv_lp_norm(u, exps.m) / den


def ddfv_sp_ratio(u: DDFVFunction, p: float, q: float) -> float:
    """``||u||_q / ||u||_{1,p}``; ``q <= 2p/(2-p)`` when ``p < 2``."""
    sp_exponents(p, q, 2)
    _nonzero(u)
    den = ddfv_w1p_norm(u, p)
    if den == 0.0:
        raise DegenerateSampleError("denominator vanishes")
    return ddfv_lp_norm(u, q) / den


def has_zero_means(u: DDFVFunction, tol: float = MEAN_TOL) -> bool:
    m = u.mesh
    nK = m.n_interior
    sp_, sd = ddfv_means(u)
    scale_p = np.sum(m.primal_measure[:nK] * np.abs(u.primal[:nK]))
    scale_d = np.sum(m.dual_measure * np.abs(u.dual))
    return abs(sp_) <= tol * max(scale_p, 1e-300) and abs(sd) <= tol * max(scale_d, 1e-300)


def ddfv_pw_ratio(u: DDFVFunction, tol: float = MEAN_TOL) -> float:
    """``||u||_{0,2} / |u|_{1,2}`` for ``u`` with zero primal and dual means."""
    _nonzero(u)
    if not has_zero_means(u, tol):
        raise PreconditionError("primal and dual means must both vanish; "
                                "use project_zero_mean first")
    den = ddfv_w1p_seminorm(u, 2.0)
    if den == 0.0:
        raise DegenerateSampleError("u is constant")
    return ddfv_lp_norm(u, 2.0) / den


def predicted_factor(kind: str, exps: ExponentSet, sin_alpha: float, zeta: float) -> float:
    """Mesh-dependent factor multiplying the constant in the DDFV estimates."""
    if kind.startswith("gns"):
        th, p = exps.theta, exps.p
        return sin_alpha ** (-th / p) * zeta ** (-th * (p - 1) / p)
    if kind.startswith("sp"):
        p = exps.p
        return sin_alpha ** (-1 / p) * zeta ** (-(p - 1) / p)
    return 1.0 / sin_alpha


def ddfv_kind_exponents(kind: str, p=None, q=None, theta=None) -> ExponentSet:
    if kind not in DDFV_KINDS:
        raise ConfigError(f"unknown DDFV kind {kind!r}; known: {', '.join(DDFV_KINDS)}")
    if kind.startswith("gns"):
        return ddfv_gns_exponents(2.0 if p is None else p, 1.0 if q is None else q,
                                  0.5 if theta is None else theta)
    if kind.startswith("sp"):
        return sp_exponents(2.0 if p is None else p, 2.0 if q is None else q, 2)
    return ExponentSet(p=2.0, q=2.0, N=2)


def ddfv_sample_points(mesh: DDFVMesh) -> SamplePoints:
    pts = mesh.unknown_points()
    eligible = np.concatenate([mesh.primal_measure, mesh.dual_measure]) > 0
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    width = np.sqrt(mesh.domain_measure / mesh.n_interior)
    return SamplePoints(pts, lo, hi, width, eligible)


def prepare_sample(kind: str, u: DDFVFunction, gamma0: BoundaryTag | None) -> DDFVFunction:
    """Project a raw sample onto the space where the inequality is stated."""
    if kind == "pw":
        return project_zero_mean(u)
    if kind.endswith("_dirichlet"):
        return apply_dirichlet_mask(u, gamma0)
    return u


def ddfv_ratio(kind: str, u: DDFVFunction, exps: ExponentSet,
               gamma0: BoundaryTag | None = None) -> float:
    if kind == "gns_general":
        return ddfv_gns_ratio(u, exps)
    if kind == "gns_dirichlet":
        return ddfv_gns_ratio(u, exps, gamma0)
    if kind == "sp_general":
        return ddfv_sp_ratio(u, exps.p, exps.q)
    if kind == "pw":
        return ddfv_pw_ratio(u)
    raise ConfigError(f"unknown DDFV kind {kind!r}")


@dataclass
class DDFVReport:
    kind: str
    level: int
    h: float
    sin_alpha: float
    zeta: float
    exponents: ExponentSet
    samples: int
    skipped: int
    C_emp: float
    seed: int
    ratios: np.ndarray = field(repr=False)
    factor: float = 1.0
    max_mean_residual: float = 0.0


def ddfv_mesh_for(family: str, level: int) -> DDFVMesh:
    if family not in DDFV_FAMILIES:
        raise ConfigError(f"unsupported DDFV family {family!r}; known: {', '.join(DDFV_FAMILIES)}")
    return build_ddfv(refine(family, level))


def ddfv_estimate(kind: str, exps: ExponentSet, family: str, levels: Sequence[int],
                  sampler: SamplerSpec, seed: int = 0, gamma0: str | None = "all",
                  threads: int | None = None) -> list[DDFVReport]:
    """Empirical constants of a DDFV inequality per refinement level."""
    if kind not in DDFV_KINDS:
        raise ConfigError(f"unknown DDFV kind {kind!r}")
    if not levels:
        raise ConfigError("need at least one level")
    out = []
    for level in levels:
        mesh = ddfv_mesh_for(family, level)
        q = ddfv_quality(mesh)
        tag = mesh.primal.tag(gamma0) if kind.endswith("_dirichlet") else None
        if kind.endswith("_dirichlet"):
            if not tag:
                raise ConfigError("Dirichlet kind needs a non-empty gamma0")
            if not is_convex_domain(mesh.primal):
                raise ConfigError("the Dirichlet DDFV inequality is stated on convex domains only")
        where = ddfv_sample_points(mesh)
        mean_res = [0.0]

        def one(values, mesh=mesh, tag=tag):
            u = prepare_sample(kind, DDFVFunction.from_vector(mesh, values), tag)
            if kind == "pw" and not u.is_zero():
                sp_, sd = ddfv_means(u)
                mean_res.append(max(abs(sp_), abs(sd)) / max(np.abs(u.vector()).max(), 1e-300))
            try:
                return ddfv_ratio(kind, u, exps, tag)
            except DegenerateSampleError:
                return None

        results = evaluate_samples(sampler, seed, where, one, threads)
        kept, skipped, c_emp, _ = summarize(results)
        out.append(DDFVReport(kind=kind, level=int(level), h=mesh.h, sin_alpha=q.sin_alpha_T,
                              zeta=q.zeta, exponents=exps, samples=sampler.total,
                              skipped=skipped, C_emp=c_emp, seed=int(seed), ratios=kept,
                              factor=predicted_factor(kind, exps, q.sin_alpha_T, q.zeta),
                              max_mean_residual=float(max(mean_res))))
    return out
