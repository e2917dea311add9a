"""Both sides of the discrete Sobolev-type inequalities, and empirical constants.

Each ``*_ratio`` returns left-hand side divided by the right-hand side
without its constant, so the inequality holds with constant ``C`` exactly
when every ratio is at most ``C``.  All ratios are invariant under
``u -> lambda u``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .mesh import AdmissibleMesh, BoundaryTag, quality, refine
from .sampling import SamplePoints, SamplerSpec, evaluate_samples, summarize
from .space import (DiscreteFunction, ExponentError, lp_norm, mean_value,
                    w1p_seminorm, w1p_seminorm_dirichlet)


class DegenerateSampleError(ValueError):
    """The ratio is undefined for this sample (e.g. 0/0)."""


class ConfigError(ValueError):
    """An experiment configuration is invalid."""


def _fmt_fraction(x: float) -> str:
    fr = Fraction(x).limit_denominator(1000)
    if abs(float(fr) - x) <= 1e-12 * max(1.0, abs(x)):
        return str(fr)
    return f"{x:.6g}"


@dataclass(frozen=True)
class ExponentSet:
    """Exponents of a Gagliardo-Nirenberg-Sobolev type estimate.

    ``theta`` and ``m`` are ``None`` for pure Sobolev-Poincare estimates.
    """

    p: float
    q: float
    N: int
    theta: float | None = None
    m: float | None = None

    @property
    def theta_max(self) -> float:
        return self.p / (self.p + self.q * (self.p - 1.0))


def theta_bound(p: float, q: float) -> float:
    return p / (p + q * (p - 1.0))


def admissible_exponents(p: float, q: float, N: int, theta: float) -> ExponentSet:
    """Validate ``(p, q, theta)`` and solve ``1/m = (1-theta)/q + theta/p - theta/N``.

    Requires ``1 < p <= N``, ``q >= 1`` and ``0 <= theta <= p/(p + q(p-1))``.
    """
    p, q, theta = float(p), float(q), float(theta)
    if N < 2:
        raise ExponentError(f"dimension must be >= 2, got N={N}")
    if not (1.0 < p <= N):
        raise ExponentError(f"p must satisfy 1 < p <= N={N}, got p={p:g}")
    if not (q >= 1.0 and np.isfinite(q)):
        raise ExponentError(f"q must be a finite real >= 1, got q={q:g}")
    bound = theta_bound(p, q)
    if theta < 0.0:
        raise ExponentError(f"theta must be >= 0, got {theta:g}")
    if theta > bound * (1.0 + 1e-14):
        raise ExponentError(f"theta exceeds p/(p+q(p-1))={_fmt_fraction(bound)}"
                            f" (got theta={theta:g})")
    inv_m = (1.0 - theta) / q + theta / p - theta / N
    if not inv_m > 0.0:
        raise ExponentError(f"1/m = {inv_m:g} is not positive")
    return ExponentSet(p=p, q=q, N=int(N), theta=theta, m=1.0 / inv_m)


def sobolev_conjugate(p: float, N: int) -> float:
    """``p* = pN/(N-p)`` for ``p < N``, infinity otherwise."""
    return p * N / (N - p) if p < N else float("inf")


def sp_exponents(p: float, q: float, N: int) -> ExponentSet:
    """Validate a Sobolev-Poincare pair: ``q <= p*`` if ``p < N``, any finite q if ``p >= N``."""
    p, q = float(p), float(q)
    if not (p >= 1.0 and np.isfinite(p)):
        raise ExponentError(f"p must be a finite real >= 1, got p={p:g}")
    if not (q >= 1.0 and np.isfinite(q)):
        raise ExponentError(f"q must be a finite real >= 1, got q={q:g}")
    star = sobolev_conjugate(p, N)
    if q > star * (1.0 + 1e-14):
        raise ExponentError(f"q={q:g} exceeds p*=pN/(N-p)={_fmt_fraction(star)}")
    return ExponentSet(p=p, q=q, N=int(N))


def nash_exponents(N: int) -> ExponentSet:
    """Nash's inequality as the GNS instance ``p=2, q=1, theta=N/(N+2), m=2``."""
    return ExponentSet(p=2.0, q=1.0, N=int(N), theta=N / (N + 2.0), m=2.0)


def pw_exponents(N: int) -> ExponentSet:
    return ExponentSet(p=1.0, q=N / (N - 1.0), N=int(N))


def _require_nonzero(u: DiscreteFunction) -> None:
    if u.is_zero():
        raise DegenerateSampleError("u is identically zero")


def _require_gamma0(gamma0) -> BoundaryTag:
    if gamma0 is None or not gamma0:
        raise ConfigError("Dirichlet variant needs a non-empty boundary part gamma0")
    return gamma0


def _divide(num: float, den: float, what: str) -> float:
    if den == 0.0:
        raise DegenerateSampleError(f"{what} vanishes")
    return num / den


def gns_ratio(u: DiscreteFunction, exps: ExponentSet,
              gamma0: BoundaryTag | None = None) -> float:
    """``||u||_m / (||u||_{1,p}^theta ||u||_q^(1-theta))``.

    With ``gamma0`` the full W^{1,p} norm is replaced by the seminorm that
    counts boundary jumps on ``gamma0``.
    """
    if exps.theta is None:
        raise ConfigError("GNS ratio needs theta and m")
    if exps.N != u.mesh.dim:
        raise ConfigError(f"exponents for N={exps.N} used on a {u.mesh.dim}-D mesh")
    _require_nonzero(u)
    p, q, theta = exps.p, exps.q, exps.theta
    if gamma0 is None:
        grad = lp_norm(u, p) + w1p_seminorm(u, p)
    else:
        grad = w1p_seminorm_dirichlet(u, p, _require_gamma0(gamma0))
    if theta > 0.0 and grad == 0.0:
        raise DegenerateSampleError("gradient term vanishes for a nonzero u")
    den = grad**theta * lp_norm(u, q) ** (1.0 - theta)
    return _divide(lp_norm(u, exps.m), den, "denominator")


def sp_ratio(u: DiscreteFunction, p: float, q: float,
             gamma0: BoundaryTag | None = None) -> float:
    """``||u||_q / ||u||_{1,p}`` (or over the gamma0 seminorm)."""
    sp_exponents(p, q, u.mesh.dim)
    _require_nonzero(u)
    if gamma0 is None:
        den = lp_norm(u, p) + w1p_seminorm(u, p)
    else:
        den = w1p_seminorm_dirichlet(u, p, _require_gamma0(gamma0))
    return _divide(lp_norm(u, q), den, "W^{1,p} term")


def nash_ratio(u: DiscreteFunction, gamma0: BoundaryTag | None = None) -> float:
    """``||u||_2^(1+2/N) / (||u||_{1,2} ||u||_1^(2/N))``."""
    _require_nonzero(u)
    N = u.mesh.dim
    if gamma0 is None:
        grad = lp_norm(u, 2) + w1p_seminorm(u, 2)
    else:
        grad = w1p_seminorm_dirichlet(u, 2, _require_gamma0(gamma0))
    den = grad * lp_norm(u, 1) ** (2.0 / N)
    return _divide(lp_norm(u, 2) ** (1.0 + 2.0 / N), den, "denominator")


def pw_ratio(u: DiscreteFunction) -> float:
    """``||u - mean(u)||_{N/(N-1)} / |u|_{1,1}``."""
    N = u.mesh.dim
    den = w1p_seminorm(u, 1)
    if den == 0.0:
        raise DegenerateSampleError("u is constant")
    return lp_norm(u - mean_value(u), N / (N - 1.0)) / den


def dirichlet_l1_embedding_check(u: DiscreteFunction,
                                 gamma0: BoundaryTag) -> tuple[float, float]:
    """``(||u||_{N/(N-1)}, |u|_{1,1,gamma0})``; the first is bounded by a
    domain constant times the second."""
    gamma0 = _require_gamma0(gamma0)
    N = u.mesh.dim
    return lp_norm(u, N / (N - 1.0)), w1p_seminorm_dirichlet(u, 1, gamma0)


class InequalityKind(str, enum.Enum):
    GNS_GENERAL = "gns_general"
    SP_GENERAL = "sp_general"
    NASH_GENERAL = "nash_general"
    POINCARE_WIRTINGER = "pw"
    GNS_DIRICHLET = "gns_dirichlet"
    SP_DIRICHLET = "sp_dirichlet"
    NASH_DIRICHLET = "nash_dirichlet"

    @property
    def dirichlet(self) -> bool:
        return self.value.endswith("_dirichlet")

    @property
    def family(self) -> str:
        return self.value.split("_")[0]


def kind_exponents(kind: InequalityKind | str, N: int, p: float | None = None,
                   q: float | None = None, theta: float | None = None) -> ExponentSet:
    """Validated exponents for ``kind`` (defaults: p=2, q=1/2 as stated below).

    GNS defaults to ``p=2, q=1, theta=1/2``; SP to ``p=q=2``.
    """
    kind = InequalityKind(kind)
    if kind.family == "gns":
        return admissible_exponents(2.0 if p is None else p, 1.0 if q is None else q,
                                    N, 0.5 if theta is None else theta)
    if kind.family == "sp":
        return sp_exponents(2.0 if p is None else p, 2.0 if q is None else q, N)
    if kind.family == "nash":
        return nash_exponents(N)
    return pw_exponents(N)


def ratio(kind: InequalityKind | str, u: DiscreteFunction, exps: ExponentSet,
          gamma0: BoundaryTag | None = None) -> float:
    kind = InequalityKind(kind)
    g = gamma0 if kind.dirichlet else None
    if kind.dirichlet:
        _require_gamma0(gamma0)
    if kind.family == "gns":
        return gns_ratio(u, exps, g)
    if kind.family == "sp":
        return sp_ratio(u, exps.p, exps.q, g)
    if kind.family == "nash":
        return nash_ratio(u, g)
    return pw_ratio(u)


def xi_exponent(kind: InequalityKind | str, exps: ExponentSet) -> float:
    """Power ``a`` in the predicted constant scaling ``xi^(-a)``."""
    kind = InequalityKind(kind)
    if kind.family == "gns":
        return (exps.p - 1.0) * exps.theta / exps.p
    if kind.family == "sp":
        return (exps.p - 1.0) / exps.p
    return 0.5


@dataclass
class InequalityReport:
    kind: str
    level: int
    h: float
    xi: float
    exponents: ExponentSet
    samples: int
    skipped: int
    C_emp: float
    seed: int
    ratios: np.ndarray = field(repr=False)
    nonfinite: int = 0
    argmax: int = -1
    argmax_label: str = ""
    xi_factor: float = 1.0

    def __post_init__(self):
        if self.ratios.size and np.all(np.isfinite(self.ratios)):
            assert self.C_emp >= self.ratios.max()


def family_dim(family: str) -> int:
    return 3 if family == "cube" else 2


def mesh_sample_points(mesh: AdmissibleMesh) -> SamplePoints:
    lo, hi = mesh.bbox
    width = (mesh.domain_measure / mesh.n_cells) ** (1.0 / mesh.dim)
    return SamplePoints(mesh.centers, lo, hi, width)


def estimate_constant(kind: InequalityKind | str, exps: ExponentSet, family: str,
                      levels: Sequence[int], sampler: SamplerSpec, seed: int = 0,
                      gamma0: str | None = "all",
                      threads: int | None = None) -> list[InequalityReport]:
    """Empirical constants ``C_emp = max ratio`` over a sample mix, per level."""
    kind = InequalityKind(kind)
    if not levels:
        raise ConfigError("need at least one level")
    reports = []
    for level in levels:
        mesh = refine(family, level)
        if exps.N != mesh.dim:
            raise ConfigError(f"exponents for N={exps.N} but family {family!r} is {mesh.dim}-D")
        qual = quality(mesh)
        tag = mesh.tag(gamma0) if kind.dirichlet else None
        if kind.dirichlet:
            _require_gamma0(tag)
        where = mesh_sample_points(mesh)

        def one(values, mesh=mesh, tag=tag):
            try:
                return ratio(kind, DiscreteFunction(mesh, values), exps, tag)
            except DegenerateSampleError:
                return None

        results = evaluate_samples(sampler, seed, where, one, threads)
        kept, skipped, c_emp, arg = summarize(results)
        reports.append(InequalityReport(
            kind=kind.value, level=int(level), h=qual.h, xi=qual.xi, exponents=exps,
            samples=sampler.total, skipped=skipped, C_emp=c_emp, seed=int(seed),
            ratios=kept, nonfinite=int(np.sum(~np.isfinite(kept))), argmax=arg,
            argmax_label=sampler.label(arg) if arg >= 0 else "",
            xi_factor=qual.xi ** (-xi_exponent(kind, exps))))
    return reports


def variation_factor(reports: Sequence) -> float:
    """``max C_emp / min C_emp`` over levels."""
    c = np.array([r.C_emp for r in reports], dtype=float)
    return float(c.max() / c.min())
