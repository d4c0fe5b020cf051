import numpy as np
import pytest

from h2qse.hamiltonian import load_table


@pytest.fixture(scope="session")
def table():
    return load_table()


def block_spectrum(g):
    """Closed-form eigenvalues of the two 2x2 blocks of the H2 qubit Hamiltonian.

    Even block spans |00>,|11>; odd block spans |01>,|10>.
    """
    g0, g1, g2, g3, g4, g5 = g
    even = np.hypot(g1 + g2, g5 - g4)
    odd = np.hypot(g1 - g2, g5 + g4)
    return np.sort([g0 + g3 - even, g0 + g3 + even, g0 - g3 - odd, g0 - g3 + odd])


def random_density(rng, d=4, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class Criterion:
    """Record one acceptance criterion; any exception inside the block marks it failed."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def check(self, ok: bool, text: str) -> bool:
        self.details.append(f"{text} [{'ok' if ok else 'FAIL'}]")
        return ok

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        detail = "; ".join(self.details)
        if exc is not None and not isinstance(exc, AssertionError):
            detail = f"{detail}; {exc_type.__name__}: {exc}".lstrip("; ")
        ACCEPTANCE[self.number] = (exc is None, f"{self.title}: {detail}")
        return False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {text}")
