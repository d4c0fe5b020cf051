"""Pauli strings, qubit operators and QSE operator sets.

Qubit 1 is the leftmost (most significant) tensor factor, so ``"ZI"`` is
sigma_z on qubit 1 and the computational basis is ordered |00>, |01>, |10>, |11>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping

import numpy as np

LABELS = "IXYZ"
MAX_QUBITS = 6

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products: (a, b) -> (phase, label) with a @ b = phase * label
_PRODUCT = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"),
    ("Z", "Y"): (-1j, "X"),
    ("X", "Z"): (-1j, "Y"),
}


class DimensionError(ValueError):
    """Raised when an operator exceeds the dense-matrix qubit cap."""


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis, stored as compact text like ``"ZX"``."""

    ops: str

    def __post_init__(self):
        ops = self.ops.upper()
        if not ops:
            raise ValueError("a Pauli string needs at least one qubit")
        bad = set(ops) - set(LABELS)
        if bad:
            raise ValueError(f"invalid Pauli labels {sorted(bad)} in {self.ops!r}")
        object.__setattr__(self, "ops", ops)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls("I" * n)

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def weight(self) -> int:
        return sum(1 for c in self.ops if c != "I")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.ops) if c != "I")

    def is_identity(self) -> bool:
        return self.weight == 0

    def matrix(self) -> np.ndarray:
        if self.n > MAX_QUBITS:
            raise DimensionError(f"{self.n} qubits exceeds the cap of {MAX_QUBITS}")
        out = np.ones((1, 1), dtype=complex)
        for c in self.ops:
            out = np.kron(out, _SINGLE[c])
        return out

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return QubitOperator.from_string(self) * QubitOperator.from_string(other)
        if isinstance(other, QubitOperator):
            return QubitOperator.from_string(self) * other
        if isinstance(other, (int, float, complex)):
            return QubitOperator({self: complex(other)}, self.n)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return QubitOperator({self: complex(other)}, self.n)
        return NotImplemented

    def __str__(self) -> str:
        return self.ops


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, product)`` with ``a @ b == phase * product``."""
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    phase = 1 + 0j
    out = []
    for x, y in zip(a.ops, b.ops):
        if x == "I":
            out.append(y)
        elif y == "I":
            out.append(x)
        elif x == y:
            out.append("I")
        else:
            ph, lab = _PRODUCT[(x, y)]
            phase *= ph
            out.append(lab)
    return phase, PauliString("".join(out))


class QubitOperator:
    """Complex linear combination of Pauli strings on ``n`` qubits.

    Terms are canonical: exact-zero coefficients are dropped and each string
    appears once. Instances are treated as immutable.
    """

    __slots__ = ("_terms", "n")

    def __init__(self, terms: Mapping[PauliString | str, complex] | None = None, n: int | None = None):
        acc: dict[PauliString, complex] = {}
        for key, coef in (terms or {}).items():
            p = key if isinstance(key, PauliString) else PauliString(key)
            if n is None:
                n = p.n
            elif p.n != n:
                raise DimensionError(f"term {p} does not act on {n} qubits")
            acc[p] = acc.get(p, 0j) + complex(coef)
        if n is None:
            raise ValueError("qubit count required for an empty operator")
        self.n = n
        self._terms = {p: c for p, c in sorted(acc.items()) if c != 0}

    @classmethod
    def from_string(cls, p: PauliString | str, coef: complex = 1.0) -> QubitOperator:
        p = p if isinstance(p, PauliString) else PauliString(p)
        return cls({p: coef}, p.n)

    @property
    def terms(self) -> dict[PauliString, complex]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coefficient(self, p: PauliString | str) -> complex:
        p = p if isinstance(p, PauliString) else PauliString(p)
        return self._terms.get(p, 0j)

    def hermitian(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def adjoint(self) -> QubitOperator:
        return QubitOperator({p: c.conjugate() for p, c in self._terms.items()}, self.n)

    def to_matrix(self, max_qubits: int = MAX_QUBITS) -> np.ndarray:
        return to_matrix(self, max_qubits)

    def _coerce(self, other) -> QubitOperator | None:
        if isinstance(other, QubitOperator):
            if other.n != self.n:
                raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, PauliString):
            return QubitOperator.from_string(other)._coerce_check(self.n)
        if isinstance(other, (int, float, complex)):
            return QubitOperator({PauliString.identity(self.n): other}, self.n)
        return None

    def _coerce_check(self, n: int) -> QubitOperator:
        if self.n != n:
            raise ValueError(f"qubit count mismatch: {n} vs {self.n}")
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        acc = dict(self._terms)
        for p, c in o._terms.items():
            acc[p] = acc.get(p, 0j) + c
        return QubitOperator(acc, self.n)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return QubitOperator({p: c * other for p, c in self._terms.items()}, self.n)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        acc: dict[PauliString, complex] = {}
        for pa, ca in self._terms.items():
            for pb, cb in o._terms.items():
                phase, prod = multiply(pa, pb)
                acc[prod] = acc.get(prod, 0j) + phase * ca * cb
        return QubitOperator(acc, self.n)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, tuple(self._terms.items())))

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*{p}" for p, c in self._terms.items()) or "0"
        return f"QubitOperator[{self.n}]({body})"


def to_matrix(op: QubitOperator, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``op``."""
    if op.n > max_qubits:
        raise DimensionError(f"{op.n} qubits exceeds the cap of {max_qubits}")
    dim = 2**op.n
    out = np.zeros((dim, dim), dtype=complex)
    for p, c in op:
        out += c * p.matrix()
    return out


@dataclass(frozen=True)
class OperatorSet:
    strings: tuple[PauliString, ...]
    label: str = "custom"
    order: int | None = None

    def __post_init__(self):
        strings = tuple(s if isinstance(s, PauliString) else PauliString(s) for s in self.strings)
        if not strings:
            raise ValueError("operator set is empty")
        if len(set(strings)) != len(strings):
            raise ValueError(f"operator set {self.label!r} has duplicate strings")
        if len({s.n for s in strings}) != 1:
            raise ValueError("operator set mixes qubit counts")
        order = max(s.weight for s in strings) if self.order is None else self.order
        if any(s.weight > order for s in strings):
            raise ValueError(f"operator set {self.label!r} has strings above order {order}")
        object.__setattr__(self, "strings", strings)
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return self.strings[0].n

    def __len__(self) -> int:
        return len(self.strings)

    def __iter__(self):
        return iter(self.strings)

    @property
    def labels(self) -> list[str]:
        return [s.ops for s in self.strings]

    @classmethod
    def parse(cls, text: str, label: str = "custom") -> OperatorSet:
        """Parse a comma-separated list such as ``"II,ZZ"``."""
        parts = [t.strip() for t in text.split(",") if t.strip()]
        return cls(tuple(PauliString(t) for t in parts), label)


def pauli_basis(n: int, k: int) -> OperatorSet:
    """All Pauli strings on ``n`` qubits with weight at most ``k``.

    Ordered by weight, then by the support positions, then by the labels on
    the support.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    out = []
    for w in range(k + 1):
        for support in itertools.combinations(range(n), w):
            for labels in itertools.product("XYZ", repeat=w):
                ops = ["I"] * n
                for pos, lab in zip(support, labels):
                    ops[pos] = lab
                out.append(PauliString("".join(ops)))
    expected = sum(comb(n, j) * 3**j for j in range(k + 1))
    assert len(out) == expected
    return OperatorSet(tuple(out), label=f"p{k}", order=k)


def _fixed(label: str, text: str) -> OperatorSet:
    return OperatorSet.parse(text, label)


_NAMED = {
    "si_nine": lambda: _fixed("si_nine", "II,XI,YI,IX,IZ,XX,XZ,YX,YZ"),
    "si_six": lambda: _fixed("si_six", "II,XI,ZI,IZ,XZ,ZZ"),
    "zz_pair": lambda: _fixed("zz_pair", "II,ZZ"),
    "single_x": lambda: _fixed("single_x", "II,XI,IX"),
    "single_y": lambda: _fixed("single_y", "II,YI,IY"),
    "single_z": lambda: _fixed("single_z", "II,ZI,IZ"),
}


def named_set(label: str) -> OperatorSet:
    """Look up a registered two-qubit operator set by name.

    ``linear_response`` is the identity plus every single-qubit Pauli,
    ``lr_xx`` adds sigma_x sigma_x to it, and ``full_p2`` is the complete
    16-string basis.
    """
    if label in _NAMED:
        return _NAMED[label]()
    if label == "linear_response":
        return OperatorSet(pauli_basis(2, 1).strings, "linear_response", 1)
    if label == "lr_xx":
        return OperatorSet(pauli_basis(2, 1).strings + (PauliString("XX"),), "lr_xx", 2)
    if label == "full_p2":
        return OperatorSet(pauli_basis(2, 2).strings, "full_p2", 2)
    raise KeyError(f"unknown operator set {label!r}; known: {', '.join(registered_sets())}")


def registered_sets() -> list[str]:
    return sorted([*_NAMED, "linear_response", "lr_xx", "full_p2"])


def resolve_sets(labels: str | Iterable[str]) -> list[OperatorSet]:
    """Resolve labels like ``"linear_response,zz_pair"``; an entry written as
    ``name=II|ZZ`` defines an ad-hoc set inline."""
    items = [s.strip() for s in labels.split(",")] if isinstance(labels, str) else list(labels)
    out = []
    for item in items:
        if not item:
            continue
        if "=" in item:
            name, body = item.split("=", 1)
            out.append(OperatorSet.parse(body.replace("|", ","), name.strip()))
        else:
            out.append(named_set(item))
    return out
