"""CSV and JSON writers. Every file carries the package version and a config
digest: CSV as a leading ``#`` comment, JSON under a top-level ``meta`` key."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .analysis import EnergyHistogram, ErrorTable
from .vqe import IterationRecord, VqeResult


def fmt(x: float) -> str:
    """Nine significant digits, the precision used for every numeric output."""
    return f"{float(x):.9g}"


def header_line(digest: str) -> str:
    return f"# h2qse {__version__} config={digest}"


def write_csv(path: Path, digest: str, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header_line(digest) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_json(path: Path, digest: str, command: str, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"meta": {"version": __version__, "config_digest": digest, "command": command}, **payload}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return path


def trajectory_rows(trajectory: Sequence[IterationRecord]):
    for rec in trajectory:
        pos = np.asarray(rec.positions)
        yield [
            rec.iteration,
            rec.median_energy,
            rec.std_energy,
            rec.best_energy,
            *[float(v) for v in np.median(pos, axis=0)],
            *[float(v) for v in np.std(pos, axis=0)],
        ]


def trajectory_columns(dim: int = 6) -> list[str]:
    return (
        ["iteration", "median_energy", "std_energy", "best_energy"]
        + [f"theta{k}_median" for k in range(1, dim + 1)]
        + [f"theta{k}_std" for k in range(1, dim + 1)]
    )


def vqe_to_dict(result: VqeResult, exact: float | None = None) -> dict:
    out = {
        "best_energy": result.best_energy,
        "best_theta": list(result.best_params.theta),
        "best_normalized": [float(v) for v in result.best_params.normalized()],
        "n_evaluations": result.n_evaluations,
        "iterations": len(result.trajectory),
    }
    if exact is not None:
        out["exact_energy"] = exact
        out["error"] = result.best_energy - exact
    out["trajectory"] = [
        {
            "iteration": r.iteration,
            "median_energy": r.median_energy,
            "std_energy": r.std_energy,
            "best_energy": r.best_energy,
            "positions": np.asarray(r.positions).tolist(),
            "energies": np.asarray(r.energies).tolist(),
        }
        for r in result.trajectory
    ]
    out["final_energies"] = np.asarray(result.final_energies).tolist()
    out["final_states"] = [s.to_dict() for s in result.final_states]
    return out


def histogram_rows(hist: EnergyHistogram, R: float | None = None):
    for c, n, s in zip(hist.bin_centers, hist.counts, hist.smoothed):
        yield ([R] if R is not None else []) + [float(c), int(n), float(s)]


def error_rows(table: ErrorTable):
    for r in table.rows:
        yield [r.R, r.level, r.estimate, r.exact, r.error, int(r.within)]


ERROR_COLUMNS = ["R", "level", "estimate", "exact", "abs_error", "within_chemical_accuracy"]
