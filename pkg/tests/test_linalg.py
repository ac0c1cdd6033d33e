import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kuramoto_sdre.linalg import (
    NoConvergence,
    SingularMatrix,
    lu_solve,
    numerical_rank,
    pinv,
    svd,
)


def random_matrix(rng, m, n):
    return rng.normal(size=(m, n))


def penrose_errors(m, mp):
    return (
        np.linalg.norm(m @ mp @ m - m),
        np.linalg.norm(mp @ m @ mp - mp),
        np.linalg.norm((m @ mp).T - m @ mp),
        np.linalg.norm((mp @ m).T - mp @ m),
    )


# -- lu_solve ----------------------------------------------------------------

def test_lu_identity_returns_rhs():
    b = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(lu_solve(np.eye(3), b), b)


def test_lu_diagonal():
    x = lu_solve([[2.0, 0.0], [0.0, 4.0]], [[1.0], [1.0]])
    np.testing.assert_allclose(x, [[0.5], [0.25]], rtol=0, atol=1e-15)


def test_lu_random_residual():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(8, 8)) + 8 * np.eye(8)
    b = rng.normal(size=(8, 3))
    x = lu_solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-9


def test_lu_vector_rhs_keeps_shape():
    x = lu_solve(np.diag([1.0, 2.0]), np.array([1.0, 1.0]))
    assert x.shape == (2,)


def test_lu_needs_pivoting():
    # zero leading entry: fails without row exchanges
    x = lu_solve([[0.0, 1.0], [1.0, 0.0]], [3.0, 5.0])
    np.testing.assert_allclose(x, [5.0, 3.0])


@pytest.mark.parametrize("a", [np.zeros((3, 3)), [[1.0, 2.0], [2.0, 4.0]], [[1.0, 1.0], [1.0, 1.0 + 1e-16]]])
def test_lu_singular(a):
    with pytest.raises(SingularMatrix):
        lu_solve(a, np.ones(len(a)))


def test_lu_shape_errors():
    with pytest.raises(ValueError):
        lu_solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        lu_solve(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        lu_solve([[np.nan, 0], [0, 1]], np.ones(2))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_lu_residual_property(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=(n, 2))
    x = lu_solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-8 * max(1.0, np.linalg.norm(b)) * np.linalg.cond(a)


# -- svd ---------------------------------------------------------------------

def test_svd_diagonal():
    np.testing.assert_allclose(svd(np.diag([3.0, 1.0])).singular_values, [3.0, 1.0])


def test_svd_zero():
    res = svd(np.zeros((2, 3)))
    assert np.array_equal(res.singular_values, [0.0, 0.0])
    assert res.u.shape == (2, 2) and res.vt.shape == (3, 3)


def test_svd_random_reconstruction():
    m = random_matrix(np.random.default_rng(2), 5, 3)
    res = svd(m)
    assert np.linalg.norm(res.u @ res.sigma() @ res.vt - m) <= 1e-9


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        svd([[np.inf, 1.0]])


def test_no_convergence_is_linalg_error():
    assert issubclass(NoConvergence, ArithmeticError)


@settings(max_examples=150, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 12)),
              elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)))
def test_svd_invariants(m):
    res = svd(m)
    rows, cols = m.shape
    s = res.singular_values
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    assert np.linalg.norm(res.u.T @ res.u - np.eye(rows)) <= 1e-10 * rows
    assert np.linalg.norm(res.vt @ res.vt.T - np.eye(cols)) <= 1e-10 * cols
    assert np.linalg.norm(res.u @ res.sigma() @ res.vt - m) <= 1e-9 * max(1.0, np.linalg.norm(m))


# -- pinv --------------------------------------------------------------------

def test_pinv_identity():
    np.testing.assert_allclose(pinv(np.eye(4)), np.eye(4), atol=1e-15)


def test_pinv_rank_one_diagonal():
    np.testing.assert_allclose(pinv([[1.0, 0.0], [0.0, 0.0]]), [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)


def test_pinv_zero_matrix():
    assert np.array_equal(pinv(np.zeros((2, 3))), np.zeros((3, 2)))


def test_pinv_random_penrose():
    m = random_matrix(np.random.default_rng(3), 3, 4)
    mp = pinv(m)
    assert max(penrose_errors(m, mp)) <= 1e-8 * max(1.0, np.linalg.norm(m))


def test_pinv_explicit_tol_drops_small_values():
    m = np.diag([1.0, 1e-3])
    np.testing.assert_allclose(pinv(m, tol=1e-2), np.diag([1.0, 0.0]))
    np.testing.assert_allclose(pinv(m), np.diag([1.0, 1e3]))
    with pytest.raises(ValueError):
        pinv(m, tol=-1.0)


def test_pinv_matches_least_squares_min_norm():
    rng = np.random.default_rng(4)
    m = rng.normal(size=(3, 5))
    b = rng.normal(size=3)
    x_ls = np.linalg.lstsq(m, b, rcond=None)[0]
    np.testing.assert_allclose(pinv(m) @ b, x_ls, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_pinv_involution_full_rank(m, n, seed):
    a = np.random.default_rng(seed).normal(size=(m, n))
    np.testing.assert_allclose(pinv(pinv(a)), a, atol=1e-7)


# -- numerical_rank ----------------------------------------------------------

def test_rank_identity_and_zero():
    assert numerical_rank(np.eye(5)) == 5
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_rank_outer_product():
    rng = np.random.default_rng(5)
    assert numerical_rank(np.outer(rng.normal(size=4), rng.normal(size=4))) == 1


def test_rank_with_tol():
    assert numerical_rank(np.diag([1.0, 1e-6]), tol=1e-3) == 1
