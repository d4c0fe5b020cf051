import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h2qse.hamiltonian import exact_eigenstates, exact_spectrum, hamiltonian_at
from h2qse.pauli import OperatorSet, QubitOperator, named_set, pauli_basis
from h2qse.qse import (
    QseProblem,
    Sampled,
    build_matrices,
    classify_spurious,
    required_strings,
    sampled_match_tol,
    solve,
    vectorized_elements,
)
from h2qse.state import DensityMatrix, apply_channel, pauli_x, pauli_y

from conftest import random_density

SQRT5 = np.sqrt(5.0)
TOY = QubitOperator({"ZI": 1.0, "IZ": 1.0, "XX": 1.0})


def toy_ground():
    w, v = np.linalg.eigh(TOY.to_matrix())
    return DensityMatrix.from_vector(v[:, 0])


def oracle_qse(rho, h, ops, cutoff=1e-8):
    """Direct traces plus canonical orthogonalization via numpy.linalg."""
    mats = [p.matrix() for p in ops]
    hm = h.to_matrix()
    H = np.array([[np.trace(a.conj().T @ hm @ b @ rho) for b in mats] for a in mats])
    S = np.array([[np.trace(a.conj().T @ b @ rho) for b in mats] for a in mats])
    sw, su = np.linalg.eigh(S)
    keep = sw > cutoff * sw.max()
    x = su[:, keep] / np.sqrt(sw[keep])
    return np.linalg.eigvalsh(x.conj().T @ H @ x), int(keep.sum())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["linear_response", "si_nine", "si_six", "full_p2", "zz_pair"]))
def test_solve_matches_oracle(seed, label):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, rank=int(rng.integers(1, 5)))
    coef = rng.normal(size=6)
    h = QubitOperator(dict(zip(["II", "ZI", "IZ", "ZZ", "YY", "XX"], coef)))
    sol = solve(QseProblem(DensityMatrix(2, rho), h, named_set(label)))
    ref, rank = oracle_qse(rho, h, named_set(label))
    assert sol.rank == rank
    np.testing.assert_allclose(sol.eigenvalues, ref, atol=1e-9)


def test_vectorized_agrees():
    rng = np.random.default_rng(4)
    prob = QseProblem(DensityMatrix(2, random_density(rng)), TOY, pauli_basis(2, 2))
    for a, b in zip(build_matrices(prob), vectorized_elements(prob)):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_vectorized_rejects_sampled():
    prob = QseProblem(toy_ground(), TOY, named_set("zz_pair"), Sampled(10, np.random.default_rng(0)))
    with pytest.raises(ValueError):
        vectorized_elements(prob)


def test_lr_recovers_spectrum(table):
    for R in (0.35, 0.75, 2.45):
        h = hamiltonian_at(table, R)
        rho = DensityMatrix.from_vector(exact_eigenstates(table, R).eigenvectors[:, 0])
        sol = solve(QseProblem(rho, h, named_set("linear_response")))
        np.testing.assert_allclose(sol.eigenvalues, exact_spectrum(table, R), atol=1e-9)
        assert sol.rank == 4


def test_single_pauli_sets_resolve_part_of_spectrum(table):
    h = hamiltonian_at(table, 0.75)
    rho = DensityMatrix.from_vector(exact_eigenstates(table, 0.75).eigenvectors[:, 0])
    exact = exact_spectrum(table, 0.75)
    for label in ("single_x", "single_y", "single_z"):
        sol = solve(QseProblem(rho, h, named_set(label)))
        assert sol.rank < 4
        rep = classify_spurious(sol, exact)
        assert rep.matched[0][1] == pytest.approx(exact[0])


def test_sampled_converges(table):
    h = hamiltonian_at(table, 0.75)
    rho = DensityMatrix.from_vector(exact_eigenstates(table, 0.75).eigenvectors[:, 0])
    ops = named_set("linear_response")
    hx, sx = build_matrices(QseProblem(rho, h, ops))
    hs, ss = build_matrices(QseProblem(rho, h, ops, Sampled(10**6, np.random.default_rng(1))))
    np.testing.assert_allclose(hs, hx, atol=0.02)
    np.testing.assert_allclose(ss, sx, atol=0.01)
    np.testing.assert_allclose(hs, hs.conj().T)


def test_sampled_reuses_strings():
    strings = required_strings(named_set("zz_pair"), TOY)
    assert len(strings) == len(set(strings))
    assert all(not p.is_identity() for p in strings)


def test_problem_validation():
    with pytest.raises(ValueError):
        QseProblem(toy_ground(), TOY, named_set("zz_pair"), cutoff=2.0)
    with pytest.raises(ValueError):
        QseProblem(DensityMatrix.maximally_mixed(3), TOY, named_set("zz_pair"))


def test_classify_spurious():
    rep = classify_spurious([-1.0, -1.0 + 1e-9, 0.3, 2.0], [-1.0, 2.0])
    assert rep.multiplicities() == [2, 1]
    assert rep.spurious == [0.3]
    with pytest.raises(ValueError):
        classify_spurious([0.0], [0.0], match_tol=0)


def test_sampled_match_tol(table):
    h = hamiltonian_at(table, 0.75)
    assert sampled_match_tol(h, 10_000) == pytest.approx(sampled_match_tol(h, 100) / 10)


# Two-qubit toy problem H = Z1 + Z2 + X1 X2, spectrum {-sqrt5, -1, 1, sqrt5}.
# Values below come from oracle_qse (numpy.linalg), not from the code under test.


def test_toy_x_channel_values():
    rho = apply_channel(toy_ground(), pauli_x(0.5, qubit=1))
    nine = solve(QseProblem(rho, TOY, named_set("si_nine")))
    ref, rank = oracle_qse(rho.mat, TOY, named_set("si_nine"))
    assert nine.rank == rank == 7
    np.testing.assert_allclose(nine.eigenvalues, ref, atol=1e-9)
    np.testing.assert_allclose(nine.eigenvalues[[1, 3]], [-1.5426593, 0.6482316], atol=1e-6)
    assert classify_spurious(nine, [-SQRT5, -1, 1, SQRT5]).n_spurious == 2

    six = solve(QseProblem(rho, TOY, named_set("si_six")))
    np.testing.assert_allclose(six.eigenvalues, [-SQRT5, -np.sqrt(2), -1, 1, np.sqrt(2), SQRT5], atol=1e-9)

    zz = solve(QseProblem(rho, TOY, named_set("zz_pair")))
    assert zz.eigenvalues[0] == pytest.approx(-SQRT5, abs=1e-9)


def test_toy_y_channel_reproduces_counts():
    # a Y1 flip composes the X1 flip with a sign change of the |11> amplitude
    rho = apply_channel(toy_ground(), pauli_y(0.5, qubit=1))
    exact = [-SQRT5, -1, 1, SQRT5]
    nine = solve(QseProblem(rho, TOY, named_set("si_nine")))
    assert nine.rank == 7
    assert classify_spurious(nine, exact).n_spurious == 3

    six = solve(QseProblem(rho, TOY, named_set("si_six")))
    np.testing.assert_allclose(six.eigenvalues, [-SQRT5, -1, -1, 1, 1, SQRT5], atol=1e-9)
    rep = classify_spurious(six, exact)
    assert rep.n_spurious == 0
    assert rep.multiplicities() == [1, 2, 2, 1]

    zz = solve(QseProblem(rho, TOY, named_set("zz_pair")))
    assert zz.eigenvalues[0] == pytest.approx(-SQRT5, abs=1e-9)


def test_full_basis_on_mixed_state_is_degenerate():
    sol = solve(QseProblem(DensityMatrix.maximally_mixed(2), TOY, pauli_basis(2, 2)))
    assert sol.rank == 16
    assert classify_spurious(sol, [-SQRT5, -1, 1, SQRT5]).multiplicities() == [4, 4, 4, 4]


def test_pure_state_full_basis_rank():
    sol = solve(QseProblem(toy_ground(), TOY, pauli_basis(2, 2)))
    assert sol.rank == 4
    np.testing.assert_allclose(sol.eigenvalues, [-SQRT5, -1, 1, SQRT5], atol=1e-9)


def test_psd_projection():
    from h2qse.qse import psd_projection

    s = np.array([[1.0, 0.0], [0.0, -0.01]])
    np.testing.assert_allclose(psd_projection(s), np.diag([1.0, 0.0]), atol=1e-14)
    good = random_density(np.random.default_rng(0))
    np.testing.assert_allclose(psd_projection(good), good, atol=1e-12)


def test_sampled_solve_tolerates_noisy_overlap(table):
    h = hamiltonian_at(table, 0.75)
    rho = DensityMatrix.from_vector(exact_eigenstates(table, 0.75).eigenvectors[:, 0])
    prob = QseProblem(rho, h, named_set("linear_response"), Sampled(10**5, np.random.default_rng(1)), cutoff=10**-2.5)
    sol = solve(prob)
    assert sol.eigenvalues[0] == pytest.approx(exact_spectrum(table, 0.75)[0], abs=5e-3)
