import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irs_spectrum.numerics import (EigenvalueError, as_cvector, is_hermitian, max_eigenvalue,
                                   outer_product, quadratic_form)

from conftest import cn, random_hermitian


def test_as_cvector_flattens_and_rejects_bad_input():
    assert as_cvector([[1, 2]]).shape == (2,)
    with pytest.raises(ValueError):
        as_cvector([])
    with pytest.raises(ValueError):
        as_cvector([1.0, np.nan])


def test_outer_product_is_rank_one_hermitian(rng):
    h = cn(rng, 5)
    H = outer_product(h)
    assert is_hermitian(H)
    evals = np.linalg.eigvalsh(H)
    assert evals[-1] == pytest.approx(np.vdot(h, h).real)
    assert np.allclose(evals[:-1], 0.0, atol=1e-12)


def test_quadratic_form_matches_explicit_product(rng):
    M = random_hermitian(rng, 6)
    x = cn(rng, 6)
    assert quadratic_form(M, x) == pytest.approx(float((x.conj() @ M @ x).real), rel=1e-13)


def test_quadratic_form_rejects_mismatch_and_non_hermitian(rng):
    with pytest.raises(ValueError):
        quadratic_form(np.eye(3), np.ones(4))
    M = np.array([[0, 1j], [1j, 0]])  # anti-Hermitian part gives an imaginary value
    with pytest.raises(ValueError):
        quadratic_form(M, np.array([1, 1]))


def test_max_eigenvalue_diagonal_example():
    assert max_eigenvalue(np.diag([1.0, 5.0, 2.0]).astype(complex)) == pytest.approx(5.0, rel=1e-8)


@pytest.mark.parametrize("M, expected", [
    (np.zeros((3, 3)), 0.0),
    (np.array([[-2.0]]), -2.0),
    (np.diag([-3.0, -1.0, -7.0]), -1.0),
    (np.diag([3.0, -3.0]), 3.0),  # equal magnitudes, opposite signs
])
def test_max_eigenvalue_edge_cases(M, expected):
    assert max_eigenvalue(M.astype(complex)) == pytest.approx(expected, abs=1e-8)


def test_max_eigenvalue_rejects_non_hermitian():
    with pytest.raises(ValueError):
        max_eigenvalue(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("n", [2, 5, 11, 21, 61])
@pytest.mark.parametrize("psd", [True, False])
def test_max_eigenvalue_matches_dense_solver(n, psd):
    rng = np.random.default_rng(n + 100 * psd)
    for _ in range(20):
        B = random_hermitian(rng, n, psd=psd)
        ref = np.linalg.eigvalsh(B)[-1]
        assert max_eigenvalue(B) == pytest.approx(ref, rel=1e-8, abs=1e-8 * np.abs(B).max())


def test_max_eigenvalue_rank_one_plus_identity(rng):
    # the structure used by the beamforming denominators
    h = cn(rng, 21)
    B = 3.0 * outer_product(h) + 0.01 * np.eye(21)
    assert max_eigenvalue(B) == pytest.approx(3.0 * np.vdot(h, h).real + 0.01, rel=1e-9)


def test_max_eigenvalue_budget_exhaustion_raises():
    B = np.diag([1.0, 1.0 - 1e-9, 0.5]).astype(complex)
    B[0, 1] = B[1, 0] = 1e-12
    with pytest.raises(EigenvalueError):
        max_eigenvalue(B, tol=1e-16, max_iter=8)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
def test_max_eigenvalue_bounds_rayleigh_quotients(n, seed):
    rng = np.random.default_rng(seed)
    B = random_hermitian(rng, n)
    lam = max_eigenvalue(B)
    for _ in range(5):
        x = cn(rng, n)
        assert quadratic_form(B, x) / np.vdot(x, x).real <= lam + 1e-8 * max(1.0, abs(lam))
