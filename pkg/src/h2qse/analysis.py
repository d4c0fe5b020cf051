"""Post-processing of swarm energies: smoothed histograms, peaks, error tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .hamiltonian import CHEMICAL_ACCURACY, MoleculeTable, exact_spectrum

BIN_WIDTH = 1.5e-3
SIGMA = 7.5e-3
KERNEL_HALF_WIDTH = 4.0


@dataclass
class EnergyHistogram:
    bin_width: float
    bin_centers: np.ndarray
    counts: np.ndarray
    smoothed: np.ndarray
    sigma: float


@dataclass(frozen=True)
class ErrorRow:
    R: float
    level: int
    estimate: float
    exact: float
    error: float
    within: bool


@dataclass
class ErrorTable:
    rows: list[ErrorRow]

    def summary(self) -> dict[float, tuple[int, int]]:
        """Per R: (levels within chemical accuracy, levels reported)."""
        out: dict[float, list[int]] = {}
        for r in self.rows:
            acc = out.setdefault(r.R, [0, 0])
            acc[0] += int(r.within)
            acc[1] += 1
        return {R: (a, b) for R, (a, b) in out.items()}

    def level_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for r in self.rows:
            out[r.level] = out.get(r.level, 0) + int(r.within)
        return out


def gaussian_kernel(bin_width: float, sigma: float) -> np.ndarray:
    half = int(math.floor(KERNEL_HALF_WIDTH * sigma / bin_width))
    x = np.arange(-half, half + 1) * bin_width
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def histogram_energies(energies: Sequence[float], bin_width: float = BIN_WIDTH, sigma: float = SIGMA) -> EnergyHistogram:
    """Bin energies and convolve with a Gaussian truncated at 4 sigma.

    The bin range covers [min - 3 sigma, max + 3 sigma] and is padded by the
    kernel half-width so smoothing never pushes mass off the grid.
    """
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise ValueError("no energies to histogram")
    if not np.all(np.isfinite(e)):
        raise ValueError("energies must be finite")
    if bin_width <= 0 or sigma <= 0:
        raise ValueError("bin width and sigma must be positive")
    kernel = gaussian_kernel(bin_width, sigma)
    pad = (kernel.size // 2) * bin_width
    lo = e.min() - 3 * sigma - pad
    hi = e.max() + 3 * sigma + pad
    n_bins = int(math.ceil((hi - lo) / bin_width)) + 1
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(e, bins=edges)
    smoothed = np.convolve(counts.astype(float), kernel, mode="same")
    centers = 0.5 * (edges[:-1] + edges[1:])
    return EnergyHistogram(bin_width, centers, counts, smoothed, sigma)


def find_peaks(hist: EnergyHistogram, prominence_fraction: float = 0.05) -> list[tuple[float, float]]:
    """Local maxima of the smoothed curve, refined by a parabola through the
    peak bin and its neighbours. Returns ``(energy, height)`` ascending."""
    y = np.asarray(hist.smoothed, dtype=float)
    top = y.max(initial=0.0)
    if top <= 0:
        return []
    idx, _ = _scipy_find_peaks(y, prominence=prominence_fraction * top)
    out = []
    for i in idx:
        x0, h = float(hist.bin_centers[i]), float(y[i])
        if 0 < i < y.size - 1:
            a, b, c = y[i - 1], y[i], y[i + 1]
            denom = a - 2 * b + c
            if denom != 0:
                delta = 0.5 * (a - c) / denom
                x0 += delta * hist.bin_width
                h = float(b - 0.25 * (a - c) * delta)
        out.append((x0, h))
    return sorted(out)


def error_report(estimates: Mapping[tuple[float, int], float], table: MoleculeTable) -> ErrorTable:
    """Compare ``{(R, level): energy}`` estimates with exact eigenvalues.

    ``level`` is 0 for the ground state and counts up through the spectrum.
    """
    rows = []
    cache: dict[float, np.ndarray] = {}
    for (R, level), est in sorted(estimates.items()):
        row = table.row(R)
        if row.R not in cache:
            cache[row.R] = exact_spectrum(table, row.R)
        spectrum = cache[row.R]
        if not 0 <= level < spectrum.size:
            raise ValueError(f"level {level} out of range at R={R}")
        exact = float(spectrum[level])
        err = abs(float(est) - exact)
        rows.append(ErrorRow(row.R, int(level), float(est), exact, err, err < CHEMICAL_ACCURACY))
    return ErrorTable(rows)
