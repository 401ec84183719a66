"""Equilibration examples and properties."""

import numpy as np
import pytest

from proxip import Iterate, QpProblem, SparseMatrixCsc, ruiz_equilibrate, unscale_solution
from proxip.scaling import Equilibration, _stacked_row_norms
from proxip.sparse import StructureError
from conftest import make_badly_scaled_qp


def simple_problem(Pd, c, A=None, b=None, G=None, h=None):
    return QpProblem(
        P=SparseMatrixCsc.from_dense(Pd, keep_upper=True),
        c=np.asarray(c, dtype=float),
        A=SparseMatrixCsc.from_dense(A) if A is not None else None,
        b=np.asarray(b, dtype=float) if b is not None else None,
        G=SparseMatrixCsc.from_dense(G) if G is not None else None,
        h=np.asarray(h, dtype=float) if h is not None else None,
    )


def test_unit_norms_are_a_fixed_point():
    prob = simple_problem(np.eye(3), np.zeros(3), A=[[1.0, 0.0, 0.0]], b=[1.0])
    scaled, eq = ruiz_equilibrate(prob)
    assert eq.passes == 0
    assert eq.is_identity()
    np.testing.assert_array_equal(scaled.P.values, prob.P.values)
    np.testing.assert_array_equal(scaled.A.values, prob.A.values)
    np.testing.assert_array_equal(scaled.b, prob.b)


def test_single_entry_reciprocal_sqrt():
    prob = simple_problem([[4.0]], [1.0])
    scaled, eq = ruiz_equilibrate(prob)
    np.testing.assert_allclose(eq.d_x, [0.5])
    np.testing.assert_allclose(scaled.P.to_dense(), [[1.0]])
    assert eq.c_scale == 1.0


def test_zero_problem_identity():
    prob = simple_problem(np.zeros((2, 2)), np.zeros(2))
    scaled, eq = ruiz_equilibrate(prob)
    assert eq.is_identity()
    assert scaled.P.nnz == 0


def test_badly_scaled_rows_reach_unit_window():
    rng = np.random.default_rng(77)
    prob = make_badly_scaled_qp(rng, 30, 5, 10)
    scaled, eq = ruiz_equilibrate(prob, max_iters=10, tol=1e-3)
    norms = _stacked_row_norms(prob, eq.d_x, eq.d_y, eq.d_z)
    nz = norms > 0
    assert eq.passes <= 10
    assert np.all(norms[nz] >= 0.99) and np.all(norms[nz] <= 1.01)


def test_inverse_transform_restores_data():
    rng = np.random.default_rng(5)
    prob = make_badly_scaled_qp(rng, 12, 3, 6)
    scaled, eq = ruiz_equilibrate(prob)
    # undo: P = D_x^-1 (scaled.P / c) D_x^-1 etc.
    dx, dy, dz, cs = eq.d_x, eq.d_y, eq.d_z, eq.c_scale
    P_back = scaled.P.to_dense_symmetric() / cs / np.outer(dx, dx)
    A_back = scaled.A.to_dense() / np.outer(dy, dx)
    G_back = scaled.G.to_dense() / np.outer(dz, dx)
    np.testing.assert_allclose(P_back, prob.P.to_dense_symmetric(), rtol=1e-14, atol=0)
    np.testing.assert_allclose(A_back, prob.A.to_dense(), rtol=1e-14, atol=0)
    np.testing.assert_allclose(G_back, prob.G.to_dense(), rtol=1e-14, atol=0)
    np.testing.assert_allclose(scaled.c / cs / dx, prob.c, rtol=1e-14, atol=0)
    np.testing.assert_allclose(scaled.b / dy, prob.b, rtol=1e-14, atol=0)
    np.testing.assert_allclose(scaled.h / dz, prob.h, rtol=1e-14, atol=0)


def test_determinism():
    rng = np.random.default_rng(6)
    prob = make_badly_scaled_qp(rng, 10, 2, 4)
    s1, e1 = ruiz_equilibrate(prob)
    s2, e2 = ruiz_equilibrate(prob)
    np.testing.assert_array_equal(e1.d_x, e2.d_x)
    np.testing.assert_array_equal(s1.P.values, s2.P.values)
    assert e1.c_scale == e2.c_scale
    assert np.all(e1.d_x > 0) and np.all(np.isfinite(e1.d_x))


def test_unscale_identity_is_noop():
    eq = Equilibration.identity(2, 1, 1)
    it = Iterate(np.array([1.0, 2.0]), np.array([3.0]), np.array([4.0]), np.array([5.0]))
    out = unscale_solution(eq, it)
    np.testing.assert_array_equal(out.x, it.x)
    np.testing.assert_array_equal(out.s, it.s)
    np.testing.assert_array_equal(out.y, it.y)
    np.testing.assert_array_equal(out.z, it.z)


def test_unscale_applies_transform():
    eq = Equilibration(np.array([2.0]), np.ones(0), np.ones(0), 1.0)
    it = Iterate(np.array([3.0]), np.zeros(0), np.zeros(0), np.zeros(0))
    assert unscale_solution(eq, it).x.tolist() == [6.0]


def test_unscale_dimension_mismatch():
    eq = Equilibration.identity(2, 0, 0)
    it = Iterate(np.ones(3), np.zeros(0), np.zeros(0), np.zeros(0))
    with pytest.raises(StructureError):
        unscale_solution(eq, it)


def test_max_iters_validation():
    prob = simple_problem([[1.0]], [0.0])
    with pytest.raises(ValueError):
        ruiz_equilibrate(prob, max_iters=0)
