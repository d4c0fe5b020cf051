"""Quantum subspace expansion on a (possibly mixed) state.

For expansion operators O_i the subspace Hamiltonian and overlap are

    H_ij = Tr[O_i^dag H O_j rho],    S_ij = Tr[O_i^dag O_j rho]

and the spectrum comes from the generalized problem H C = S C E.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import eigh, gen_eigh
from .pauli import OperatorSet, PauliString, QubitOperator, multiply, to_matrix
from .state import DensityMatrix, sample_correlator

DEFAULT_CUTOFF = 1e-8
EXACT_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class Sampled:
    """Estimate every needed Pauli correlator from ``shots`` single shots."""

    shots: int
    rng: np.random.Generator = field(compare=False)

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


@dataclass(frozen=True)
class QseProblem:
    state: DensityMatrix
    hamiltonian: QubitOperator
    ops: OperatorSet
    mode: Sampled | None = None
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        if not 0.0 < self.cutoff < 1.0:
            raise ValueError(f"cutoff must lie in (0, 1), got {self.cutoff}")
        if not self.hamiltonian.n == self.ops.n == self.state.n:
            raise ValueError("state, Hamiltonian and operator set act on different qubit counts")

    @property
    def exact(self) -> bool:
        return self.mode is None


@dataclass
class QseSolution:
    eigenvalues: np.ndarray
    rank: int
    s_spectrum: np.ndarray
    h_matrix: np.ndarray
    s_matrix: np.ndarray
    op_labels: list[str]

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "rank": self.rank,
            "s_spectrum": [float(s) for s in self.s_spectrum],
            "op_labels": list(self.op_labels),
        }


@dataclass
class SpuriousReport:
    matched: list[tuple[float, float, int]]
    spurious: list[float]
    tolerance: float

    @property
    def n_spurious(self) -> int:
        return len(self.spurious)

    def multiplicities(self) -> list[int]:
        return [m for _, _, m in self.matched]

    def to_dict(self) -> dict:
        return {
            "matched": [{"qse": q, "exact": e, "multiplicity": m} for q, e, m in self.matched],
            "spurious": list(self.spurious),
            "tolerance": self.tolerance,
        }


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def expand_elements(ops: OperatorSet, hamiltonian: QubitOperator):
    """Pauli expansions of O_i^dag H O_j and O_i^dag O_j for every pair.

    Returns two nested lists of ``{PauliString: coefficient}`` maps. Pauli
    strings are self-adjoint, so O_i^dag = O_i.
    """
    strings = list(ops)
    h_terms, s_terms = [], []
    for a in strings:
        h_row, s_row = [], []
        for b in strings:
            ph, ab = multiply(a, b)
            s_row.append({ab: ph})
            acc: dict[PauliString, complex] = {}
            for p, c in hamiltonian:
                ph1, ap = multiply(a, p)
                ph2, apb = multiply(ap, b)
                acc[apb] = acc.get(apb, 0j) + c * ph1 * ph2
            h_row.append(acc)
        h_terms.append(h_row)
        s_terms.append(s_row)
    return h_terms, s_terms


def required_strings(ops: OperatorSet, hamiltonian: QubitOperator) -> list[PauliString]:
    """Distinct non-identity Pauli strings whose correlators fill H and S."""
    h_terms, s_terms = expand_elements(ops, hamiltonian)
    seen = set()
    for grid in (h_terms, s_terms):
        for row in grid:
            for entry in row:
                seen.update(p for p, c in entry.items() if c != 0)
    return sorted(p for p in seen if not p.is_identity())


def matrices_from_correlators(ops: OperatorSet, hamiltonian: QubitOperator, values) -> tuple[np.ndarray, np.ndarray]:
    """Assemble H and S from measured correlators ``{PauliString: <P>}``."""
    h_terms, s_terms = expand_elements(ops, hamiltonian)

    def value(p: PauliString) -> float:
        return 1.0 if p.is_identity() else values[p]

    d = len(ops)
    h = np.zeros((d, d), dtype=complex)
    s = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            h[i, j] = sum(c * value(p) for p, c in h_terms[i][j].items())
            s[i, j] = sum(c * value(p) for p, c in s_terms[i][j].items())
    return _hermitize(h), _hermitize(s)


def build_matrices(problem: QseProblem) -> tuple[np.ndarray, np.ndarray]:
    """Subspace Hamiltonian and overlap for ``problem``.

    Exact mode evaluates the traces directly. Sampled mode estimates each
    distinct Pauli string once and reuses it for every entry it appears in.
    """
    if problem.exact:
        rho = problem.state.mat
        hm = to_matrix(problem.hamiltonian)
        mats = [p.matrix() for p in problem.ops]
        d = len(mats)
        h = np.empty((d, d), dtype=complex)
        s = np.empty((d, d), dtype=complex)
        for i, a in enumerate(mats):
            ad = a.conj().T
            for j, b in enumerate(mats):
                brho = b @ rho
                h[i, j] = np.trace(ad @ hm @ brho)
                s[i, j] = np.trace(ad @ brho)
        return _hermitize(h), _hermitize(s)

    shots, rng = problem.mode.shots, problem.mode.rng
    values = {
        p: sample_correlator(problem.state, p, shots, rng)
        for p in required_strings(problem.ops, problem.hamiltonian)
    }
    return matrices_from_correlators(problem.ops, problem.hamiltonian, values)


def vectorized_elements(problem: QseProblem) -> tuple[np.ndarray, np.ndarray]:
    """H and S via the row-major vectorized form <<O_i| H (x) rho^T |O_j>>.

    Independent of :func:`build_matrices`; kept as a cross-check.
    """
    if not problem.exact:
        raise ValueError("vectorized_elements is exact-mode only")
    rho_t = problem.state.mat.T
    hm = to_matrix(problem.hamiltonian)
    dim = hm.shape[0]
    super_h = np.kron(hm, rho_t)
    super_s = np.kron(np.eye(dim), rho_t)
    vecs = np.array([p.matrix().reshape(-1) for p in problem.ops]).T
    return vecs.conj().T @ super_h @ vecs, vecs.conj().T @ super_s @ vecs


def psd_projection(s: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero."""
    w, v = eigh(s)
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def solve(problem: QseProblem) -> QseSolution:
    """Build H and S and solve the pencil.

    Sampled overlaps are projected onto the PSD cone first; shot noise pushes
    the null directions of a near-pure state slightly negative.
    """
    h, s = build_matrices(problem)
    if not problem.exact:
        s = _hermitize(psd_projection(s))
    res = gen_eigh(h, s, problem.cutoff)
    return QseSolution(res.eigenvalues, res.rank, res.s_spectrum, h, s, problem.ops.labels)


def classify_spurious(solution, exact_eigenvalues, match_tol: float = EXACT_MATCH_TOL) -> SpuriousReport:
    """Match QSE eigenvalues to exact ones; anything unmatched is spurious.

    Each QSE value goes to its nearest exact value if that lies within
    ``match_tol``. Several QSE values landing on the same exact value are
    reported once, with a multiplicity.
    """
    if match_tol <= 0:
        raise ValueError("match_tol must be positive")
    values = getattr(solution, "eigenvalues", solution)
    values = np.asarray(values, dtype=float)
    exact = np.asarray(exact_eigenvalues, dtype=float)
    groups: dict[int, list[float]] = {}
    spurious: list[float] = []
    for e in values:
        if exact.size:
            k = int(np.argmin(np.abs(exact - e)))
            if abs(exact[k] - e) <= match_tol:
                groups.setdefault(k, []).append(float(e))
                continue
        spurious.append(float(e))
    matched = [(float(np.mean(groups[k])), float(exact[k]), len(groups[k])) for k in sorted(groups)]
    return SpuriousReport(matched, spurious, match_tol)


def sampled_match_tol(hamiltonian: QubitOperator, shots: int) -> float:
    """Ten shot-noise standard errors of a term-wise energy estimate."""
    norm = np.sqrt(sum(abs(c) ** 2 for p, c in hamiltonian if not p.is_identity()))
    return 10.0 * norm / np.sqrt(shots)
