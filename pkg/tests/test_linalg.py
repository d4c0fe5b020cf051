import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from h2qse.linalg import ConvergenceError, LinalgError, NotHermitianError, eigh, gen_eigh, is_hermitian, is_psd


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_eigh_matches_lapack(d, seed):
    a = random_hermitian(np.random.default_rng(seed), d)
    w, v = eigh(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * max(1, np.abs(a).max()))
    np.testing.assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-10)
    np.testing.assert_allclose(a @ v, v * w, atol=1e-9 * max(1, np.abs(a).max()))


def test_eigh_real_symmetric():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    w, _ = eigh(a)
    np.testing.assert_allclose(w, [1.0, 3.0], atol=1e-14)


def test_eigh_degenerate_and_diagonal():
    w, v = eigh(np.diag([3.0, 1.0, 1.0, -2.0]))
    np.testing.assert_allclose(w, [-2, 1, 1, 3])
    assert np.allclose(np.abs(v).sum(axis=0), 1)


def test_eigh_tiny_and_huge_scale():
    rng = np.random.default_rng(3)
    a = random_hermitian(rng, 5)
    for scale in (1e-12, 1e12):
        w, _ = eigh(scale * a)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(scale * a), rtol=1e-9, atol=0)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        eigh(np.zeros((2, 3)))


def test_eigh_sweep_limit():
    a = random_hermitian(np.random.default_rng(0), 8)
    with pytest.raises(ConvergenceError):
        eigh(a, max_sweeps=1)


def test_hermitian_and_psd_checks():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
    assert is_psd(np.array([[1, 0], [0, 0]]))
    assert not is_psd(np.array([[1, 0], [0, -0.1]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_gen_eigh_full_rank_matches_scipy(d, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, d)
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    s = b @ b.conj().T + d * np.eye(d)
    res = gen_eigh(h, s)
    assert res.rank == d
    np.testing.assert_allclose(res.eigenvalues, scipy.linalg.eigh(h, s, eigvals_only=True), atol=1e-9)
    c = res.eigenvectors
    np.testing.assert_allclose(h @ c, s @ c * res.eigenvalues, atol=1e-8)


def test_gen_eigh_drops_null_directions():
    # S has a zero eigenvalue along (1, -1)/sqrt(2); H restricted to the rest is 5
    s = np.array([[1.0, 1.0], [1.0, 1.0]])
    h = np.array([[5.0, 5.0], [5.0, 5.0]]) * 1.0
    res = gen_eigh(h, s)
    assert res.rank == 1
    np.testing.assert_allclose(res.eigenvalues, [5.0])


def test_gen_eigh_cutoff_is_relative():
    s = np.diag([1.0, 1e-9, 1e-7])
    h = np.diag([1.0, 2.0, 3.0]) * np.diag(s)
    assert gen_eigh(h, s).rank == 2
    assert gen_eigh(100 * h, 100 * s).rank == 2
    assert gen_eigh(h, s, cutoff=1e-10).rank == 3


def test_gen_eigh_errors():
    with pytest.raises(LinalgError):
        gen_eigh(np.eye(2), np.diag([1.0, -0.5]))
    with pytest.raises(LinalgError):
        gen_eigh(np.eye(2), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        gen_eigh(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        gen_eigh(np.eye(2), np.eye(2), cutoff=0.0)
