import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from fvineq.inequalities import (ConfigError, DegenerateSampleError, InequalityKind,
                                 admissible_exponents, dirichlet_l1_embedding_check,
                                 estimate_constant, gns_ratio, kind_exponents, nash_exponents,
                                 nash_ratio, pw_ratio, ratio, sobolev_conjugate, sp_exponents,
                                 sp_ratio, variation_factor)
from fvineq.mesh import build_acute_triangulation, build_structured
from fvineq.sampling import SamplerSpec
from fvineq.space import DiscreteFunction, ExponentError

U4 = [1.0, 2.0, 3.0, 4.0]
IND = [1.0, 0.0, 0.0, 0.0]


def test_worked_exponents():
    e = admissible_exponents(2, 1, 2, 0.5)
    assert e.m == 2.0
    assert admissible_exponents(2, 1, 2, 2 / 3).m == pytest.approx(3.0, rel=1e-14)
    for p, q, N in [(2, 3, 2), (1.5, 4, 2), (3, 2, 3)]:
        assert admissible_exponents(p, q, N, 0).m == pytest.approx(q)


@pytest.mark.parametrize("theta", [0.7, 0.9, 1.0])
def test_theta_above_bound(theta):
    with pytest.raises(ExponentError, match=r"p/\(p\+q\(p-1\)\)=2/3"):
        admissible_exponents(2, 1, 2, theta)


@pytest.mark.parametrize("p,q,N,theta", [(1, 2, 2, 0.1), (3, 1, 2, 0.1), (2, 0.5, 2, 0.1),
                                         (2, 1, 2, -0.1)])
def test_exponent_ranges(p, q, N, theta):
    with pytest.raises(ExponentError):
        admissible_exponents(p, q, N, theta)


def test_m_near_theta_bound():
    e = admissible_exponents(1.01, 1, 2, 0.99)
    assert 1 / e.m == pytest.approx(0.01 + 0.99 / 1.01 - 0.99 / 2, rel=1e-14)


def test_sobolev_conjugate():
    assert sobolev_conjugate(1, 2) == 2
    assert sobolev_conjugate(1, 3) == pytest.approx(1.5)
    assert sobolev_conjugate(2, 2) == np.inf
    with pytest.raises(ExponentError, match="exceeds p\\*"):
        sp_exponents(1.5, 7, 2)
    sp_exponents(2, 1e6, 2)


def test_gns_indicator(grid2):
    u = DiscreteFunction(grid2, IND)
    e = admissible_exponents(2, 1, 2, 0.5)
    expected = 0.5 / (np.sqrt(0.5 + np.sqrt(2)) * np.sqrt(0.25))
    assert gns_ratio(u, e) == pytest.approx(expected, rel=1e-14)
    assert gns_ratio(u, e) == pytest.approx(0.7228, abs=1e-4)


def test_gns_theta_zero_is_one(grid2, rng):
    u = DiscreteFunction(grid2, rng.normal(size=4))
    for q in (1.0, 2.5):
        assert gns_ratio(u, admissible_exponents(2, q, 2, 0.0)) == pytest.approx(1.0, rel=1e-14)


def test_gns_dirichlet_constant(grid2):
    u = DiscreteFunction(grid2, np.ones(4))
    r = gns_ratio(u, admissible_exponents(2, 1, 2, 0.5), grid2.tag("all"))
    assert np.isfinite(r) and r > 0


def test_sp_examples(grid2):
    one = DiscreteFunction(grid2, np.ones(4))
    for p, q in [(1, 2), (2, 2), (2, 7), (1, 1)]:
        assert sp_ratio(one, p, q) == pytest.approx(1.0)
    u = DiscreteFunction(grid2, IND)
    # corner cell: two interior faces (m/d = 1, jump 1) and two boundary faces (m/d = 2)
    expected = 0.25**0.25 / np.sqrt(2 * 1 + 2 * 2)
    assert sp_ratio(u, 2, 4, grid2.tag("all")) == pytest.approx(expected, rel=1e-14)


def test_nash_examples(grid2, rng):
    one = DiscreteFunction(grid2, np.ones(4))
    assert nash_ratio(one) == pytest.approx(1.0)
    e = nash_exponents(2)
    assert (e.theta, e.m) == (0.5, 2.0)
    for _ in range(20):
        u = DiscreteFunction(grid2, rng.normal(size=4))
        assert nash_ratio(u) == pytest.approx(gns_ratio(u, e) ** 2, rel=1e-13)
        assert nash_ratio(u * 2) == pytest.approx(nash_ratio(u), rel=1e-13)


@pytest.mark.parametrize("N", [2, 3, 4, 7])
def test_nash_exponents_any_dimension(N):
    e = nash_exponents(N)
    assert e.theta == pytest.approx(N / (N + 2))
    inv_m = (1 - e.theta) / 1 + e.theta / 2 - e.theta / N
    assert 1 / inv_m == pytest.approx(2.0, rel=1e-14)


def test_pw_examples(grid2):
    u = DiscreteFunction(grid2, U4)
    assert pw_ratio(u) == pytest.approx(np.sqrt(1.25) / 3, rel=1e-14)
    assert pw_ratio(DiscreteFunction(grid2, IND)) == pytest.approx(np.sqrt(0.1875), rel=1e-14)
    with pytest.raises(DegenerateSampleError):
        pw_ratio(DiscreteFunction(grid2, np.full(4, 7.0)))


def test_l1_embedding_examples(grid2):
    assert dirichlet_l1_embedding_check(DiscreteFunction(grid2, np.zeros(4)),
                                        grid2.tag("all")) == (0.0, 0.0)
    lhs, rhs = dirichlet_l1_embedding_check(DiscreteFunction(grid2, np.ones(4)), grid2.tag("all"))
    assert (lhs, rhs) == (pytest.approx(1.0), pytest.approx(4.0))
    lhs, rhs = dirichlet_l1_embedding_check(DiscreteFunction(grid2, IND), grid2.tag("left"))
    assert (lhs, rhs) == (pytest.approx(0.5), pytest.approx(1.5))
    with pytest.raises(ConfigError):
        dirichlet_l1_embedding_check(DiscreteFunction(grid2, IND), grid2.tag("none"))


def test_zero_sample_is_degenerate(grid2):
    z = DiscreteFunction(grid2, np.zeros(4))
    with pytest.raises(DegenerateSampleError):
        gns_ratio(z, admissible_exponents(2, 1, 2, 0.5))
    with pytest.raises(DegenerateSampleError):
        sp_ratio(z, 2, 2)
    with pytest.raises(DegenerateSampleError):
        nash_ratio(z)


def test_dirichlet_kind_needs_gamma0(grid2):
    u = DiscreteFunction(grid2, U4)
    with pytest.raises(ConfigError):
        ratio("sp_dirichlet", u, kind_exponents("sp_dirichlet", 2), grid2.tag("none"))


MESH = build_structured(2, 6)
ACUTE = build_acute_triangulation(1)
vals = arrays(np.float64, MESH.n_cells, elements=st.floats(-100, 100))


@given(vals, st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-6),
       st.sampled_from(list(InequalityKind)))
def test_ratio_scale_invariance(v, lam, kind):
    u = DiscreteFunction(MESH, v)
    assume(np.ptp(v) > 1e-6)
    exps = kind_exponents(kind, 2)
    g = MESH.tag("all")
    r = ratio(kind, u, exps, g)
    assert ratio(kind, u * lam, exps, g) == pytest.approx(r, rel=1e-12)


@given(vals, st.floats(-1e3, 1e3))
def test_pw_translation_invariance(v, c):
    assume(np.ptp(v) > 1e-3)
    u = DiscreteFunction(MESH, v)
    assert pw_ratio(u + c) == pytest.approx(pw_ratio(u), rel=1e-12)


@given(arrays(np.float64, ACUTE.n_cells, elements=st.floats(-10, 10)),
       st.floats(1.05, 2.0), st.floats(1.0, 4.0), st.floats(0, 1))
def test_gns_finite_on_acute(v, p, q, t):
    assume(np.ptp(v) > 1e-3)
    exps = admissible_exponents(p, q, 2, t * p / (p + q * (p - 1)))
    r = gns_ratio(DiscreteFunction(ACUTE, v), exps)
    assert np.isfinite(r) and r > 0


def test_estimate_constant_sp_constant_sample():
    s = SamplerSpec(n_samples=20, include_constant=True)
    reps = estimate_constant("sp_general", sp_exponents(2, 2, 2), "square", [1, 2, 3], s, seed=1)
    assert [r.level for r in reps] == [1, 2, 3]
    assert all(r.C_emp >= 1.0 - 1e-14 for r in reps)
    assert all(r.C_emp >= r.ratios.max() for r in reps)


def test_estimate_constant_deterministic_and_thread_independent():
    s = SamplerSpec(n_samples=40)
    e = kind_exponents("gns_dirichlet", 2)
    a = estimate_constant("gns_dirichlet", e, "acute-square", [0, 1], s, seed=5, threads=1)
    b = estimate_constant("gns_dirichlet", e, "acute-square", [0, 1], s, seed=5, threads=4)
    for x, y in zip(a, b):
        assert x.C_emp == y.C_emp
        assert np.array_equal(x.ratios, y.ratios)
        assert x.skipped == y.skipped


def test_pw_smooth_field_converges():
    s = SamplerSpec(n_samples=0, fields=(lambda x, y: np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y),))
    reps = estimate_constant("pw", kind_exponents("pw", 2), "square", range(1, 7), s)
    c = [r.C_emp for r in reps]
    assert abs(c[-1] - c[-2]) / c[-1] < 0.05
    assert variation_factor(reps[2:]) < 1.5


def test_xi_factor_reported():
    s = SamplerSpec(n_samples=4)
    reps = estimate_constant("sp_general", sp_exponents(2, 2, 2), "square", [2], s)
    assert reps[0].xi_factor == pytest.approx(0.5 ** -0.5)


def test_dimension_mismatch():
    s = SamplerSpec(n_samples=4)
    with pytest.raises(ConfigError):
        estimate_constant("sp_general", sp_exponents(2, 2, 3), "square", [1], s)
