"""Two-qubit H2 Hamiltonian in the STO-3G basis.

H(R) = g0 II + g1 ZI + g2 IZ + g3 ZZ + g4 YY + g5 XX, with coefficients
tabulated at 45 bond lengths (Angstrom, Hartree). The YY coefficient is zero
by symmetry throughout the shipped table.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from os import PathLike

import numpy as np

from .linalg import eigh
from .pauli import PauliString, QubitOperator, to_matrix

CHEMICAL_ACCURACY = 1.6e-3
COLUMNS = ("R", "g0", "g1", "g2", "g3", "g4", "g5")
TERMS = ("II", "ZI", "IZ", "ZZ", "YY", "XX")
R_TOL = 1e-9


class TableError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientRow:
    R: float
    g0: float
    g1: float
    g2: float
    g3: float
    g4: float
    g5: float

    @property
    def coefficients(self) -> tuple[float, ...]:
        return (self.g0, self.g1, self.g2, self.g3, self.g4, self.g5)


@dataclass(frozen=True)
class MoleculeTable:
    rows: tuple[CoefficientRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise TableError("table has no rows")
        for a, b in zip(rows, rows[1:]):
            if not b.R > a.R:
                raise TableError(f"R values must be strictly increasing ({a.R} then {b.R})")
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def distances(self) -> list[float]:
        return [r.R for r in self.rows]

    def row(self, R: float) -> CoefficientRow:
        for r in self.rows:
            if abs(r.R - R) <= R_TOL:
                return r
        raise KeyError(f"R = {R} is not in the table")

    def select(self, distances) -> MoleculeTable:
        return MoleculeTable(tuple(self.row(R) for R in sorted(distances)))


def _parse(text: str, origin: str) -> MoleculeTable:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise TableError(f"{origin}: empty table")
    reader = csv.reader(io.StringIO("\n".join(lines)))
    header = [h.strip() for h in next(reader)]
    if tuple(header) != COLUMNS:
        raise TableError(f"{origin}: expected header {','.join(COLUMNS)}, got {','.join(header)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(COLUMNS):
            raise TableError(f"{origin}:{lineno}: expected {len(COLUMNS)} fields, got {len(rec)}")
        try:
            vals = [float(v) for v in rec]
        except ValueError as exc:
            raise TableError(f"{origin}:{lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise TableError(f"{origin}:{lineno}: non-finite value")
        rows.append(CoefficientRow(*vals))
    if not rows:
        raise TableError(f"{origin}: no data rows")
    return MoleculeTable(tuple(rows))


def embedded_table_text() -> str:
    return resources.files("h2qse").joinpath("data/h2_sto3g.csv").read_text(encoding="utf-8")


def load_table(source: str | PathLike | None = None) -> MoleculeTable:
    """Load a coefficient table; ``None`` or ``"embedded"`` gives the shipped one."""
    if source is None or str(source) == "embedded":
        return _parse(embedded_table_text(), "embedded")
    with open(source, encoding="utf-8") as fh:
        return _parse(fh.read(), str(source))


def hamiltonian_from_row(row: CoefficientRow) -> QubitOperator:
    return QubitOperator({PauliString(t): g for t, g in zip(TERMS, row.coefficients)}, 2)


def hamiltonian_at(table: MoleculeTable, R: float) -> QubitOperator:
    return hamiltonian_from_row(table.row(R))


def exact_spectrum(table: MoleculeTable, R: float) -> np.ndarray:
    return eigh(to_matrix(hamiltonian_at(table, R))).eigenvalues


def exact_eigenstates(table: MoleculeTable, R: float):
    return eigh(to_matrix(hamiltonian_at(table, R)))


def chemical_accuracy() -> float:
    return CHEMICAL_ACCURACY
