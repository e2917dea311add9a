import numpy as np
import pytest

from fvineq.ddfv import build_ddfv, ddfv_lp_norm, sample_ddfv
from fvineq.linalg import ConvergenceError, pcg
from fvineq.mesh import refine
from fvineq.solver import (MANUFACTURED, NonSPDError, TENSORS, convergence_study,
                           solve_anisotropic_laplace, stiffness, tensor_field)
import scipy.sparse as sp


def test_zero_source_gives_zero():
    m = build_ddfv(refine("square", 2))
    res = solve_anisotropic_laplace(m, np.eye(2), lambda x, y: np.zeros_like(x))
    assert not np.any(res.u.vector())
    assert res.energy == 0.0


def test_affine_boundary_data_reproduced():
    # affine functions are discretely harmonic for a constant tensor
    for fam in ("square", "perturbed"):
        m = build_ddfv(refine(fam, 2))
        g = lambda x, y: 1.0 + 2.0 * x - 0.5 * y
        res = solve_anisotropic_laplace(m, TENSORS["aniso"], lambda x, y: np.zeros_like(x), g=g)
        assert np.allclose(res.u.vector(), sample_ddfv(g, m).vector(), atol=1e-8)


def test_stiffness_symmetric_and_annihilates_constants():
    m = build_ddfv(refine("perturbed", 2))
    S = stiffness(m, tensor_field(m, TENSORS["aniso"]))
    assert abs(S - S.T).max() < 1e-12
    assert np.abs(S @ np.ones(m.n_unknowns)).max() < 1e-9


def test_sin_convergence():
    rows = convergence_study([1, 2, 3, 4], A="iso", mms="sin")
    errs = [r.error_l2 for r in rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert min(r.order_l2 for r in rows[1:]) >= 1.5
    assert max(r.residual for r in rows) <= 1e-10


def test_aniso_poly():
    rows = convergence_study([2, 3, 4], A="aniso", mms="poly", family="perturbed")
    assert rows[-1].error_l2 < rows[0].error_l2
    assert all(r.energy > 0 and r.residual <= 1e-10 for r in rows)


def test_variable_tensor():
    m = build_ddfv(refine("square", 3))
    A = lambda x, y: np.stack([np.stack([1 + x, 0 * x], -1), np.stack([0 * x, 1 + y], -1)], -2)
    res = solve_anisotropic_laplace(m, A, lambda x, y: np.ones_like(x))
    assert res.energy > 0 and ddfv_lp_norm(res.u, 2) > 0


@pytest.mark.parametrize("A", [np.array([[1.0, 0.5], [0.0, 1.0]]), np.diag([1.0, -1.0]),
                               np.zeros((2, 2))])
def test_non_spd(A):
    m = build_ddfv(refine("square", 1))
    with pytest.raises(NonSPDError):
        solve_anisotropic_laplace(m, A, lambda x, y: x)


def test_unknown_mms():
    with pytest.raises(ValueError):
        convergence_study([1], mms="exp")
    assert set(MANUFACTURED) == {"sin", "poly"}


def test_pcg_iteration_cap():
    n = 200
    A = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
    with pytest.raises(ConvergenceError):
        pcg(A, np.ones(n), maxiter=3)
    x, info = pcg(A, np.ones(n))
    assert info.residual <= 1e-10
    assert pcg(A, np.zeros(n))[1].iterations == 0
