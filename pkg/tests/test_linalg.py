import numpy as np
import pytest

from nalscp.cones import ConeDesc, Orthant, spectral, identity
from nalscp.errors import DimensionMismatch, NonPositiveEigenvalue, RankDeficient
from nalscp.linalg import LinearMap, ScmMatrix, cond_number, scm_assemble, scm_solve
from nalscp.nal import compute_sz

from conftest import MIXED, random_element, random_problem, scalar_lp


def row_map():
    return LinearMap(1, [0, 0], [0, 1], [1.0, 1.0], ConeDesc([Orthant(2)]))


def test_apply_primal_examples(rng):
    A = row_map()
    np.testing.assert_allclose(A.apply_primal([0.3, 0.7]), [1.0])
    np.testing.assert_array_equal(A.apply_primal([0.0, 0.0]), [0.0])
    T = rng.standard_normal((4, MIXED.vec_len))
    x = rng.standard_normal(MIXED.vec_len)
    np.testing.assert_allclose(LinearMap.from_dense(T, MIXED).apply_primal(x), T @ x, rtol=1e-14, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        A.apply_primal([1.0])


def test_apply_adjoint_examples(rng):
    np.testing.assert_allclose(row_map().apply_adjoint([2.0]), [2.0, 2.0])
    cone = ConeDesc([Orthant(3)])
    T = rng.standard_normal((2, 3))
    lam = rng.standard_normal(2)
    np.testing.assert_allclose(LinearMap.from_dense(T, cone).apply_adjoint(lam), T.T @ lam, atol=1e-15)
    with pytest.raises(DimensionMismatch):
        row_map().apply_adjoint([1.0, 2.0])


def test_adjoint_consistency(rng):
    """<A x, lam> = <x, A* lam> in the trace inner product."""
    for _ in range(10):
        A = LinearMap.from_dense(rng.standard_normal((5, MIXED.vec_len)), MIXED)
        x = rng.standard_normal(MIXED.vec_len)
        lam = rng.standard_normal(5)
        lhs = A.apply_primal(x) @ lam
        assert lhs == pytest.approx(MIXED.inner(x, A.apply_adjoint(lam)), rel=1e-12, abs=1e-12)


def test_triplets_duplicates_summed_and_bounds():
    cone = ConeDesc([Orthant(2)])
    A = LinearMap(1, [0, 0], [0, 0], [1.0, 1.0], cone)
    r, c, v = A.triplets()
    assert list(r) == [0] and list(c) == [0] and list(v) == [2.0]
    with pytest.raises(DimensionMismatch):
        LinearMap(1, [1], [0], [1.0], cone)
    with pytest.raises(DimensionMismatch):
        LinearMap(1, [0], [2], [1.0], cone)


def test_rank_check():
    cone = ConeDesc([Orthant(3)])
    A = LinearMap.from_dense(np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]]), cone)
    with pytest.raises(RankDeficient):
        A.aat_factor


def test_scm_equal_pair_is_half_aat(rng):
    A = LinearMap.from_dense(rng.standard_normal((4, MIXED.vec_len)), MIXED)
    sp = spectral(MIXED, identity(MIXED))
    M = scm_assemble(A, sp, sp)
    np.testing.assert_allclose(M.matrix, 0.5 * A.aat, atol=1e-13)


def test_scm_scalar_worked_example():
    prob = scalar_lp()
    pair = compute_sz(prob, [0.0], [0.0], 1.0, 1.0)
    np.testing.assert_allclose(pair.s, [1.6180339887498949])
    np.testing.assert_allclose(pair.z, [0.6180339887498949])
    M = scm_assemble(prob.A, pair.s_spec, pair.z_spec)
    assert M.matrix[0, 0] == pytest.approx(0.2763932022500210, rel=1e-12)


def test_scm_symmetric_positive_definite(rng):
    for _ in range(5):
        prob = random_problem(MIXED, 6, rng)
        x = random_element(MIXED, rng)
        pair = compute_sz(prob, x, rng.standard_normal(6), 0.3, 0.7)
        M = scm_assemble(prob.A, pair.s_spec, pair.z_spec).matrix
        assert np.abs(M - M.T).max() <= 1e-12 * np.abs(M).max()
        assert np.linalg.eigvalsh(M).min() > 0


def test_scm_spectral_bounds(rng):
    """lambda_max(M) <= lambda_max(AA*), lambda_min(M) >= w_min lambda_min(AA*)."""
    from nalscp.cones import weight_eigenvalues

    for _ in range(5):
        prob = random_problem(MIXED, 6, rng)
        pair = compute_sz(prob, random_element(MIXED, rng), rng.standard_normal(6), 0.2, 1.0)
        M = scm_assemble(prob.A, pair.s_spec, pair.z_spec).matrix
        ev = np.linalg.eigvalsh(M)
        ea = np.linalg.eigvalsh(prob.A.aat)
        wmin = weight_eigenvalues(pair.s_spec, pair.z_spec).min()
        assert ev[-1] <= ea[-1] * (1 + 1e-12)
        assert ev[0] >= wmin * ea[0] * (1 - 1e-10)


def test_scm_solve_examples(rng):
    r = rng.standard_normal(4)
    np.testing.assert_allclose(scm_solve(ScmMatrix(np.eye(4)), r), r)
    d = scm_solve(ScmMatrix(np.array([[0.2763932022500210]])), [0.3819660112501051])
    assert d[0] == pytest.approx(1.3819660112501051, rel=1e-12)
    for _ in range(5):
        B = rng.standard_normal((8, 8))
        M = B @ B.T + 0.1 * np.eye(8)
        r = rng.standard_normal(8)
        d = scm_solve(ScmMatrix(M), r)
        assert np.linalg.norm(M @ d - r) <= 1e-10 * (1 + np.linalg.norm(r))


def test_scm_shift_ladder_on_semidefinite():
    M = ScmMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    M.factorize()
    assert M.shift > 0
    with pytest.raises(RankDeficient):
        ScmMatrix(-np.eye(2)).factorize()


def test_cond_number_examples(rng):
    assert cond_number(np.eye(3)) == pytest.approx(1.0)
    assert cond_number(np.diag([4.0, 1.0])) == pytest.approx(4.0)
    A = LinearMap.from_dense(rng.standard_normal((4, 9)), ConeDesc([Orthant(9)]))
    assert cond_number(0.5 * A.aat) == pytest.approx(cond_number(A.aat), rel=1e-12)
    with pytest.raises(NonPositiveEigenvalue):
        cond_number(np.diag([1.0, -1.0]))
