"""Dense Hermitian eigensolvers for the small matrices that show up here (d <= 16)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8
OFF_TOL = 1e-13
MAX_SWEEPS = 100


class LinalgError(ArithmeticError):
    pass


class NotHermitianError(LinalgError, ValueError):
    pass


class ConvergenceError(LinalgError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors


@dataclass(frozen=True)
class GeneralizedEigenResult:
    eigenvalues: np.ndarray
    rank: int
    s_spectrum: np.ndarray
    eigenvectors: np.ndarray


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(np.linalg.norm(a), 1.0)
    return bool(np.linalg.norm(a - a.conj().T) <= tol * scale)


def is_psd(a: np.ndarray, tol: float = PSD_TOL) -> bool:
    w = eigh(a).eigenvalues
    scale = max(abs(w).max(initial=0.0), 1.0)
    return bool(w.min(initial=0.0) >= -tol * scale)


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def eigh(a: np.ndarray, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||a||_F``. Eigenvalues come back ascending with matching columns.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    d = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(d, dtype=complex)
    norm = np.linalg.norm(a)
    threshold = tol * norm

    sweeps = 0
    while _off_norm(a) > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0 or r < 1e-300:
                    continue
                # rotate the phase out of a[p, q], then a real symmetric Jacobi rotation
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ u
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def gen_eigh(h: np.ndarray, s: np.ndarray, cutoff: float = 1e-8) -> GeneralizedEigenResult:
    """Solve ``h c = e s c`` by canonical orthogonalization.

    Directions of ``s`` with eigenvalue at or below ``cutoff * max(eig(s))``
    are dropped; the rest are scaled by inverse square roots and ``h`` is
    diagonalized in that basis. Small negative overlap eigenvalues (above
    ``-1e-8 * max``) are treated as zero.
    """
    if not 0.0 < cutoff < 1.0:
        raise ValueError(f"cutoff must lie in (0, 1), got {cutoff}")
    h = np.asarray(h, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if h.shape != s.shape:
        raise ValueError(f"shape mismatch: h {h.shape}, s {s.shape}")
    if not is_hermitian(h):
        raise NotHermitianError("h is not Hermitian")
    if not is_hermitian(s, PSD_TOL):
        raise NotHermitianError("s is not Hermitian")

    sw, su = eigh(0.5 * (s + s.conj().T))
    smax = sw.max()
    if smax <= 0.0:
        raise LinalgError("overlap matrix has no positive eigenvalue")
    if sw.min() < -PSD_TOL * smax:
        raise LinalgError(f"overlap matrix is not positive semidefinite (min eigenvalue {sw.min():.3e})")
    sw = np.where(sw < 0.0, 0.0, sw)

    keep = sw > cutoff * smax
    rank = int(keep.sum())
    if rank == 0:
        raise LinalgError("no overlap direction survives the cutoff")
    x = su[:, keep] / np.sqrt(sw[keep])
    hp = x.conj().T @ h @ x
    e, c = eigh(0.5 * (hp + hp.conj().T))
    return GeneralizedEigenResult(e, rank, sw, x @ c)
