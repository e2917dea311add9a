import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fvineq.mesh import build_acute_triangulation, build_structured
from fvineq.space import (DiscreteFunction, ExponentError, NormSpec, lp_norm, mean_value,
                          sample_scalar_field, total_variation, w1p_norm, w1p_seminorm,
                          w1p_seminorm_dirichlet)

U4 = [1.0, 2.0, 3.0, 4.0]


def loop_seminorm(u, p, gamma0=()):
    """Face-by-face reference sum, written independently of the vectorized code."""
    m = u.mesh
    total = 0.0
    for f in range(m.n_faces):
        K, L = m.face_cells[f]
        if L >= 0:
            d = abs(u.values[L] - u.values[K])
        elif f in gamma0:
            d = abs(u.values[K])
        else:
            continue
        total += m.face_measure[f] / m.d_sigma[f] ** (p - 1) * d**p
    return total ** (1 / p)


def test_lp_examples(grid2):
    u = DiscreteFunction(grid2, U4)
    assert lp_norm(u, 2) == pytest.approx(np.sqrt(7.5), rel=1e-15)
    assert lp_norm(DiscreteFunction(grid2, np.ones(4)), 3.7) == pytest.approx(1.0)
    assert lp_norm(DiscreteFunction(grid2, np.zeros(4)), 2) == 0.0


def test_seminorm_examples(grid2):
    u = DiscreteFunction(grid2, U4)
    assert w1p_seminorm(u, 1) == pytest.approx(3.0, rel=1e-15)
    assert w1p_seminorm(u, 2) == pytest.approx(np.sqrt(10.0), rel=1e-15)
    assert w1p_seminorm(DiscreteFunction(grid2, np.full(4, 2.0)), 2) == 0.0


def test_dirichlet_examples(grid2):
    u = DiscreteFunction(grid2, U4)
    full = grid2.tag("all")
    assert w1p_seminorm_dirichlet(u, 1, full) == pytest.approx(13.0, rel=1e-15)
    assert w1p_seminorm_dirichlet(u, 2, grid2.tag("none")) == w1p_seminorm(u, 2)
    c = DiscreteFunction(grid2, np.full(4, -3.0))
    assert w1p_seminorm_dirichlet(c, 1, full) == pytest.approx(3.0 * 4.0)


def test_full_norm_examples(grid2):
    u = DiscreteFunction(grid2, U4)
    assert w1p_norm(u, NormSpec(1)) == pytest.approx(5.5)
    assert w1p_norm(u, NormSpec(1, grid2.tag("all"))) == pytest.approx(15.5)
    assert w1p_norm(DiscreteFunction(grid2, np.ones(4)), NormSpec(2)) == pytest.approx(1.0)


def test_tv_and_mean(grid2):
    u = DiscreteFunction(grid2, U4)
    assert total_variation(u) == 3.0
    assert total_variation(DiscreteFunction(grid2, [1, 0, 0, 0])) == pytest.approx(1.0)
    assert mean_value(u) == pytest.approx(2.5)
    assert mean_value(u - mean_value(u)) == pytest.approx(0.0, abs=1e-15)


def test_sample_field(grid2):
    u = sample_scalar_field(lambda x, y: x, grid2)
    np.testing.assert_allclose(u.values, [0.25, 0.75, 0.25, 0.75])
    s = sample_scalar_field(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
                            build_structured(2, 7))
    assert s.values.min() >= 0 and s.values.max() <= 1
    assert np.all(sample_scalar_field(lambda x, y: 1.0, grid2).values == 1.0)


@pytest.mark.parametrize("p", [0.5, 0.0, -1.0, np.inf])
def test_bad_p(grid2, p):
    u = DiscreteFunction(grid2, U4)
    with pytest.raises(ExponentError):
        lp_norm(u, p)
    with pytest.raises(ExponentError):
        w1p_seminorm(u, p)


def test_function_validation(grid2):
    with pytest.raises(ValueError):
        DiscreteFunction(grid2, [1, 2, 3])
    with pytest.raises(ValueError):
        DiscreteFunction(grid2, [1, 2, 3, np.nan])


MESHES = [build_structured(2, 5), build_acute_triangulation(1), build_structured(3, 3)]
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
ps = st.floats(1.0, 6.0)


def values_for(mesh):
    return arrays(np.float64, mesh.n_cells, elements=finite)


@pytest.mark.parametrize("mesh", MESHES, ids=["grid5", "acute1", "cube3"])
@given(data=st.data(), p=ps)
def test_matches_loop_oracle(mesh, data, p):
    u = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    full = set(mesh.tag("all").faces)
    ref = loop_seminorm(u, p)
    assert w1p_seminorm(u, p) == pytest.approx(ref, rel=1e-10, abs=1e-300)
    assert w1p_seminorm_dirichlet(u, p, mesh.tag("all")) == pytest.approx(
        loop_seminorm(u, p, full), rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("mesh", MESHES, ids=["grid5", "acute1", "cube3"])
@given(data=st.data(), p=ps, lam=st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
def test_homogeneity(mesh, data, p, lam):
    u = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    for f in (lambda v: lp_norm(v, p), lambda v: w1p_seminorm(v, p),
              lambda v: w1p_seminorm_dirichlet(v, p, mesh.tag("all"))):
        assert f(u * lam) == pytest.approx(abs(lam) * f(u), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("mesh", MESHES, ids=["grid5", "acute1", "cube3"])
@given(data=st.data(), p=ps)
def test_triangle_inequality(mesh, data, p):
    u = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    v = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    for f in (lambda w: lp_norm(w, p), lambda w: w1p_seminorm(w, p)):
        assert f(u + v) <= (f(u) + f(v)) * (1 + 1e-12) + 1e-12


@given(data=st.data(), q=st.floats(1, 5), r=st.floats(1, 8), alpha=st.floats(0, 1))
def test_lp_interpolation(data, q, r, alpha):
    mesh = MESHES[1]
    u = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    m = 1 / ((1 - alpha) / q + alpha / r)
    assert lp_norm(u, m) <= lp_norm(u, r) ** alpha * lp_norm(u, q) ** (1 - alpha) * (1 + 1e-10) + 1e-300


@given(data=st.data())
def test_tv_identity_bitwise(data):
    mesh = MESHES[0]
    u = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    assert total_variation(u) == w1p_seminorm(u, 1)


@given(data=st.data(), p=ps, sides=st.lists(st.sampled_from(["left", "right", "top", "bottom"]),
                                             min_size=1, max_size=3, unique=True))
def test_dirichlet_monotone_in_gamma0(data, p, sides):
    mesh = MESHES[0]
    u = DiscreteFunction(mesh, data.draw(values_for(mesh)))
    small = mesh.tag("+".join(sides))
    big = mesh.tag("all")
    none = w1p_seminorm_dirichlet(u, p, mesh.tag("none"))
    mid = w1p_seminorm_dirichlet(u, p, small)
    assert none <= mid * (1 + 1e-12) + 1e-300
    assert mid <= w1p_seminorm_dirichlet(u, p, big) * (1 + 1e-12) + 1e-300
