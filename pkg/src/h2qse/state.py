"""Density-matrix simulation of the two-qubit preparation circuit.

The circuit is: perfect |00> initialization, a single-qubit rotation on each
qubit, then a bSWAP entangler acting inside span{|00>, |11>}. Kraus channels
can be inserted after any of the three gates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .linalg import eigh, is_hermitian
from .pauli import PauliString, QubitOperator, pauli_basis, to_matrix

LOCATIONS = ("after_gate_1", "after_gate_2", "after_entangler", "end_of_prep")


class StateError(ValueError):
    """Invalid or numerically corrupt quantum state."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n: int
    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        if m.shape != (2**self.n, 2**self.n):
            raise StateError(f"expected {2**self.n}x{2**self.n} matrix, got {m.shape}")
        if not is_hermitian(m, 1e-10):
            raise StateError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > 1e-10:
            raise StateError(f"density matrix trace is {np.trace(m).real:.12g}, not 1")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_vector(cls, psi: np.ndarray) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        n = int(round(np.log2(psi.size)))
        return cls(n, np.outer(psi, psi.conj()))

    @classmethod
    def basis_state(cls, bits: str) -> DensityMatrix:
        psi = np.zeros(2 ** len(bits), dtype=complex)
        psi[int(bits, 2)] = 1.0
        return cls.from_vector(psi)

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityMatrix:
        return cls(n, np.eye(2**n, dtype=complex) / 2**n)

    def eigenvalues(self) -> np.ndarray:
        return eigh(self.mat).eigenvalues

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def is_psd(self, tol: float = 1e-8) -> bool:
        return bool(self.eigenvalues().min() >= -tol)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "real": self.mat.real.tolist(),
            "imag": self.mat.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> DensityMatrix:
        mat = np.asarray(d["real"], dtype=float) + 1j * np.asarray(d["imag"], dtype=float)
        return cls(int(d["n"]), mat)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> DensityMatrix:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: tuple[np.ndarray, ...]
    label: str = "channel"

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops):
            raise ValueError("Kraus operators must be square and of equal size")
        total = sum(k.conj().T @ k for k in ops)
        err = np.abs(total - np.eye(d)).max()
        if err > 1e-12:
            raise ValueError(f"Kraus completeness violated by {err:.3e} for {self.label}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]


def _embed(k: np.ndarray, qubit: int, n: int) -> np.ndarray:
    if not 1 <= qubit <= n:
        raise ValueError(f"qubit index must be in 1..{n}, got {qubit}")
    out = np.ones((1, 1), dtype=complex)
    for q in range(1, n + 1):
        out = np.kron(out, k if q == qubit else np.eye(2))
    return out


def _single_qubit_channel(ops: Sequence[np.ndarray], label: str, qubit: int, n: int) -> KrausChannel:
    return KrausChannel(tuple(_embed(np.asarray(k, dtype=complex), qubit, n) for k in ops), label)


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def amplitude_damping(gamma: float, qubit: int = 1, n: int = 2) -> KrausChannel:
    """Decay |1> -> |0> with probability ``gamma``."""
    _check_prob("gamma", gamma)
    k0 = [[1, 0], [0, np.sqrt(1 - gamma)]]
    k1 = [[0, np.sqrt(gamma)], [0, 0]]
    return _single_qubit_channel([k0, k1], f"amplitude_damping({gamma:g})@q{qubit}", qubit, n)


def dephasing(lam: float, qubit: int = 1, n: int = 2) -> KrausChannel:
    """Phase damping: off-diagonal elements shrink by ``sqrt(1 - lam)``."""
    _check_prob("lambda", lam)
    k0 = [[1, 0], [0, np.sqrt(1 - lam)]]
    k1 = [[0, 0], [0, np.sqrt(lam)]]
    return _single_qubit_channel([k0, k1], f"dephasing({lam:g})@q{qubit}", qubit, n)


def pauli_x(p: float, qubit: int = 1, n: int = 2) -> KrausChannel:
    """rho -> (1 - p) rho + p X rho X on ``qubit``."""
    _check_prob("p", p)
    return _single_qubit_channel(
        [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * PauliString("X").matrix()],
        f"pauli_x({p:g})@q{qubit}",
        qubit,
        n,
    )


def pauli_y(p: float, qubit: int = 1, n: int = 2) -> KrausChannel:
    """rho -> (1 - p) rho + p Y rho Y on ``qubit``."""
    _check_prob("p", p)
    return _single_qubit_channel(
        [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * PauliString("Y").matrix()],
        f"pauli_y({p:g})@q{qubit}",
        qubit,
        n,
    )


def depolarizing(p: float, qubit: int = 1, n: int = 2) -> KrausChannel:
    """rho -> (1 - p) rho + p I/2 on ``qubit``."""
    _check_prob("p", p)
    ops = [np.sqrt(1 - 3 * p / 4) * np.eye(2)]
    ops += [np.sqrt(p / 4) * PauliString(c).matrix() for c in "XYZ"]
    return _single_qubit_channel(ops, f"depolarizing({p:g})@q{qubit}", qubit, n)


CHANNELS = {
    "amplitude_damping": amplitude_damping,
    "dephasing": dephasing,
    "pauli_x": pauli_x,
    "pauli_y": pauli_y,
    "depolarizing": depolarizing,
}


@dataclass(frozen=True)
class NoiseModel:
    """Ordered (location, channel) insertions; empty means noiseless."""

    entries: tuple[tuple[str, KrausChannel], ...] = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple(self.entries)
        for loc, ch in entries:
            if loc not in LOCATIONS:
                raise ValueError(f"unknown noise location {loc!r}; expected one of {LOCATIONS}")
            if not isinstance(ch, KrausChannel):
                raise TypeError(f"expected a KrausChannel at {loc}, got {type(ch).__name__}")
        object.__setattr__(self, "entries", entries)

    def at(self, location: str) -> list[KrausChannel]:
        return [ch for loc, ch in self.entries if loc == location]

    def __bool__(self) -> bool:
        return bool(self.entries)

    @classmethod
    def parse(cls, text: str | None, n: int = 2) -> NoiseModel:
        """Parse ``"pauli_x:0.1@end_of_prep; amplitude_damping:0.05:2"``.

        Each entry is ``name:param[:qubit][@location]``; the location defaults
        to ``end_of_prep`` and the qubit to 1. ``none`` or empty is noiseless.
        """
        if text is None or text.strip().lower() in ("", "none"):
            return cls()
        entries = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            body, _, loc = chunk.partition("@")
            loc = loc.strip() or "end_of_prep"
            parts = [p.strip() for p in body.split(":")]
            if len(parts) not in (2, 3) or parts[0] not in CHANNELS:
                raise ValueError(f"cannot parse noise entry {chunk!r}")
            qubit = int(parts[2]) if len(parts) == 3 else 1
            entries.append((loc, CHANNELS[parts[0]](float(parts[1]), qubit, n)))
        return cls(tuple(entries))


def single_qubit_rotation(amplitude: float, phase: float, qubit: int, n: int = 2) -> np.ndarray:
    """exp(-i amplitude/2 (cos(phase) X + sin(phase) Y)) on ``qubit`` (1-based)."""
    c, s = np.cos(amplitude / 2), np.sin(amplitude / 2)
    u = np.array(
        [[c, -1j * s * np.exp(-1j * phase)], [-1j * s * np.exp(1j * phase), c]],
        dtype=complex,
    )
    return _embed(u, qubit, n)


def bswap(length: float, phase: float) -> np.ndarray:
    """Two-qubit rotation inside span{|00>, |11>}; |01> and |10> are untouched."""
    c, s = np.cos(length / 2), np.sin(length / 2)
    u = np.eye(4, dtype=complex)
    u[0, 0] = c
    u[0, 3] = -1j * np.exp(-1j * phase) * s
    u[3, 0] = -1j * np.exp(1j * phase) * s
    u[3, 3] = c
    return u


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    return DensityMatrix(rho.n, u @ rho.mat @ u.conj().T)


def apply_channel(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    if ch.dim != rho.mat.shape[0]:
        raise ValueError(f"channel acts on dimension {ch.dim}, state has {rho.mat.shape[0]}")
    out = sum(k @ rho.mat @ k.conj().T for k in ch.kraus_ops)
    return DensityMatrix(rho.n, out)


def prepare_state(params, noise: NoiseModel | None = None, coherent_offset: float = 0.0) -> DensityMatrix:
    """Run the preparation circuit for six angles ``params`` on |00><00|.

    ``params`` is anything exposing ``.theta`` or a length-6 sequence of
    radians. ``coherent_offset`` is added to the entangler phase to model a
    miscalibrated bSWAP.
    """
    theta = np.asarray(getattr(params, "theta", params), dtype=float)
    if theta.shape != (6,):
        raise ValueError(f"expected 6 circuit parameters, got shape {theta.shape}")
    noise = noise or NoiseModel()
    rho = DensityMatrix.basis_state("00")

    steps = (
        (single_qubit_rotation(theta[0], theta[1], 1), ("after_gate_1",)),
        (single_qubit_rotation(theta[2], theta[3], 2), ("after_gate_2",)),
        (bswap(theta[4], theta[5] + coherent_offset), ("after_entangler", "end_of_prep")),
    )
    for u, locations in steps:
        rho = apply_unitary(rho, u)
        for loc in locations:
            for ch in noise.at(loc):
                rho = apply_channel(rho, ch)
    return rho


def expectation(rho: DensityMatrix, op: QubitOperator | PauliString | np.ndarray) -> float:
    """Tr[op rho] for a Hermitian ``op``."""
    if isinstance(op, PauliString):
        m = op.matrix()
    elif isinstance(op, QubitOperator):
        if not op.hermitian():
            raise ValueError("expectation needs a Hermitian operator")
        m = to_matrix(op)
    else:
        m = np.asarray(op, dtype=complex)
        if not is_hermitian(m):
            raise ValueError("expectation needs a Hermitian operator")
    val = np.trace(m @ rho.mat)
    if abs(val.imag) > 1e-9:
        raise StateError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def sample_correlator(rho: DensityMatrix, p: PauliString, shots: int, rng: np.random.Generator) -> float:
    """Shot-noise estimate of <p> from ``shots`` single-shot +-1 outcomes."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    mean = expectation(rho, p)
    if abs(mean) > 1.0 + 1e-9:
        raise StateError(f"<{p}> = {mean} lies outside [-1, 1]")
    prob = min(max((1.0 + mean) / 2.0, 0.0), 1.0)
    hits = rng.binomial(shots, prob)
    return 2.0 * hits / shots - 1.0


def correlators(rho: DensityMatrix) -> dict[PauliString, float]:
    """Exact expectation of every non-identity Pauli string."""
    basis = pauli_basis(rho.n, rho.n)
    return {p: expectation(rho, p) for p in basis if not p.is_identity()}


def tomographic_reconstruct(values: Mapping[PauliString | str, float], n: int = 2) -> DensityMatrix:
    """Linear-inversion estimate rho = (I + sum_P <P> P) / 2**n.

    Positivity is not enforced, so noisy inputs can give small negative
    eigenvalues.
    """
    vals = {(k if isinstance(k, PauliString) else PauliString(k)): float(v) for k, v in values.items()}
    dim = 2**n
    mat = np.eye(dim, dtype=complex)
    for p in pauli_basis(n, n):
        if p.is_identity():
            continue
        if p not in vals:
            raise KeyError(f"missing correlator for {p}")
        v = vals[p]
        if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
            raise ValueError(f"correlator {p} = {v} outside [-1, 1]")
        mat += v * p.matrix()
    return DensityMatrix(n, mat / dim)
