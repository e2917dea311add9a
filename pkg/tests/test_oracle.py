import numpy as np
import pytest

from fvineq.inequalities import sp_ratio
from fvineq.mesh import build_structured
from fvineq.oracle import (CONTINUOUS_BEST_CONSTANT, closed_form_lambda_min, dense_lambda_min,
                           dirichlet_form, inverse_iteration, poincare_eigen_oracle)
from fvineq.space import DiscreteFunction


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_closed_form_matches_dense(n):
    assert dense_lambda_min(n) == pytest.approx(closed_form_lambda_min(n), rel=1e-8)


def test_inverse_iteration_matches_closed_form():
    for n in (8, 16):
        r = poincare_eigen_oracle(n)
        assert r.lambda_min == pytest.approx(closed_form_lambda_min(n), rel=1e-9)


def test_sequence_decreases_towards_continuum():
    # 4 n^2 sin^2(pi/2n) < pi^2/4 per direction, so every discrete constant sits above the limit
    c = [1 / np.sqrt(closed_form_lambda_min(n)) for n in (8, 16, 32, 64, 128)]
    assert all(b < a for a, b in zip(c, c[1:]))
    assert all(x > CONTINUOUS_BEST_CONSTANT for x in c)
    assert abs(c[3] / CONTINUOUS_BEST_CONSTANT - 1) < 0.05
    assert CONTINUOUS_BEST_CONSTANT == pytest.approx(0.22508, abs=1e-5)


def test_form_matches_seminorm(rng):
    mesh = build_structured(2, 5)
    A = dirichlet_form(mesh, mesh.tag("all"))
    for _ in range(5):
        v = rng.normal(size=mesh.n_cells)
        u = DiscreteFunction(mesh, v)
        l2 = np.sqrt(np.sum(mesh.cell_measure * v**2))
        assert np.sqrt(v @ (A @ v)) == pytest.approx(l2 / sp_ratio(u, 2, 2, mesh.tag("all")),
                                                     rel=1e-12)


def test_eigenvector_attains_constant():
    mesh = build_structured(2, 12)
    A = dirichlet_form(mesh, mesh.tag("all"))
    lam, x, _ = inverse_iteration(A, mesh.cell_measure.copy())
    r = sp_ratio(DiscreteFunction(mesh, x), 2, 2, mesh.tag("all"))
    assert r == pytest.approx(1 / np.sqrt(lam), rel=1e-9)
