"""Command-line entry point: ``h2qse <command> [options]``.

Commands write CSV/JSON files into ``--out``; identical configs and seeds
give byte-identical files. Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import error_report, find_peaks, histogram_energies
from .export import (
    ERROR_COLUMNS,
    error_rows,
    histogram_rows,
    trajectory_columns,
    trajectory_rows,
    vqe_to_dict,
    write_csv,
    write_json,
)
from .hamiltonian import MoleculeTable, TableError, exact_eigenstates, exact_spectrum, hamiltonian_at, load_table
from .linalg import LinalgError
from .pauli import OperatorSet, resolve_sets
from .qse import DEFAULT_CUTOFF, EXACT_MATCH_TOL, QseProblem, Sampled, classify_spurious, sampled_match_tol, solve
from .state import DensityMatrix, NoiseModel, StateError, apply_channel, pauli_x, pauli_y
from .vqe import SwarmConfig, derive_seed, dissociation_sweep, run_vqe, state_energy, stream

log = logging.getLogger("h2qse")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    table: str = "embedded"
    r: str | None = None
    particles: int = 20
    iterations: int = 12
    warm_iterations: int = 6
    warm_fraction: float = 0.05
    inertia: float = 0.5
    cognitive: float = 0.5
    social: float = 0.5
    max_velocity: float = 0.5
    noise: str = "none"
    shots: str = "exact"
    ops: str = "linear_response"
    cutoff: float | None = None
    seed: int | None = None
    out: str = "."
    coherent_offset: float = 0.0
    source: str = "exact_ground"
    match_tol: float | None = None
    input: str | None = None

    def digest(self) -> str:
        """Hash of every setting except the output directory."""
        items = sorted((k, v) for k, v in asdict(self).items() if k != "out")
        text = "\n".join(f"{k}={v}" for k, v in items)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def shot_count(self) -> int | None:
        if str(self.shots).strip().lower() == "exact":
            return None
        try:
            n = int(self.shots)
        except ValueError:
            raise ConfigError(f"shots must be 'exact' or a positive integer, got {self.shots!r}") from None
        if n < 1:
            raise ConfigError("shots must be positive")
        return n

    @property
    def effective_cutoff(self) -> float:
        """Explicit cutoff, else 1e-8 when exact and one shot standard error when sampled."""
        if self.cutoff is not None:
            if not 0.0 < self.cutoff < 1.0:
                raise ConfigError(f"cutoff must lie in (0, 1), got {self.cutoff}")
            return self.cutoff
        shots = self.shot_count
        return DEFAULT_CUTOFF if shots is None else min(0.5, 1.0 / np.sqrt(shots))

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required (--seed or 'seed' in the config file)")
        return self.seed

    def swarm(self) -> SwarmConfig:
        try:
            return SwarmConfig(
                n_particles=self.particles,
                n_iterations=self.iterations,
                inertia=self.inertia,
                cognitive=self.cognitive,
                social=self.social,
                max_velocity=self.max_velocity,
                seed=self.require_seed(),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def noise_model(self) -> NoiseModel:
        try:
            return NoiseModel.parse(self.noise)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad noise model: {exc}") from None

    def operator_sets(self) -> list[OperatorSet]:
        try:
            sets = resolve_sets(self.ops)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if not sets:
            raise ConfigError("no operator sets given")
        return sets

    def load(self) -> MoleculeTable:
        try:
            return load_table(self.table)
        except FileNotFoundError as exc:
            raise ConfigError(f"table not found: {exc.filename}") from None
        except TableError as exc:
            raise ConfigError(str(exc)) from None

    def distances(self, table: MoleculeTable, default: str = "all") -> list[float]:
        sel = default if self.r is None else self.r
        if sel.strip().lower() == "all":
            return table.distances
        try:
            values = [float(t) for t in sel.split(",") if t.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse R selection {sel!r}") from None
        if not values:
            raise ConfigError("empty R selection")
        try:
            return [table.row(R).R for R in values]
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None


def _convert(name: str, value: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    t = str(types[name])
    v = value.strip()
    if "None" in t and v.lower() == "none":
        return None
    try:
        if t.startswith("int"):
            return int(v)
        if t.startswith("float"):
            return float(v)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {value!r}") from None
    return v


def read_config(path: str | Path) -> dict:
    """Flat ``key = value`` text; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        k = k.strip().replace("-", "_")
        out[k] = _convert(k, v)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = replace(cfg, **read_config(args.config))
    overrides = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = _convert(f.name, str(val))
    return replace(cfg, **overrides)


def _rows_index(table: MoleculeTable, R: float) -> int:
    return table.distances.index(table.row(R).R)


def cmd_exact(cfg: RunConfig) -> list[Path]:
    table = cfg.load()
    rows = []
    for R in cfg.distances(table):
        rows.append([R, *[float(e) for e in exact_spectrum(table, R)]])
    path = write_csv(Path(cfg.out) / "spectrum.csv", cfg.digest(), ["R", "E0", "E1", "E2", "E3"], rows)
    print(f"wrote {len(rows)} rows to {path}")
    return [path]


def cmd_vqe(cfg: RunConfig) -> list[Path]:
    table = cfg.load()
    dist = cfg.distances(table, default="1.55")
    if len(dist) != 1:
        raise ConfigError("vqe runs at a single R; use sweep for several")
    R = dist[0]
    h = hamiltonian_at(table, R)
    result = run_vqe(h, cfg.swarm(), cfg.noise_model(), cfg.shot_count, cfg.coherent_offset)
    exact = float(exact_spectrum(table, R)[0])
    digest = cfg.digest()
    payload = {"R": R, **vqe_to_dict(result, exact)}
    out = Path(cfg.out)
    paths = [
        write_json(out / "vqe.json", digest, "vqe", payload),
        write_csv(out / "trajectory.csv", digest, trajectory_columns(), trajectory_rows(result.trajectory)),
    ]
    print(
        f"R={R:g}  best={result.best_energy:.9g}  exact={exact:.9g}  "
        f"error={result.best_energy - exact:.3e}  evaluations={result.n_evaluations}"
    )
    return paths


def cmd_sweep(cfg: RunConfig) -> list[Path]:
    table = cfg.load()
    points = dissociation_sweep(
        table,
        cfg.swarm(),
        cfg.noise_model(),
        cfg.shot_count,
        warm_iterations=cfg.warm_iterations,
        warm_fraction=cfg.warm_fraction,
        coherent_offset=cfg.coherent_offset,
        order=cfg.distances(table),
    )
    digest = cfg.digest()
    rows, docs, estimates = [], [], {}
    for p in points:
        exact = float(exact_spectrum(table, p.R)[0])
        rows.append([p.R, p.result.best_energy, exact, p.result.best_energy - exact, len(p.result.trajectory)])
        docs.append({"R": p.R, "warm_started": p.warm_started, **vqe_to_dict(p.result, exact)})
        estimates[(p.R, 0)] = p.result.best_energy
    report = error_report(estimates, table)
    out = Path(cfg.out)
    paths = [
        write_csv(out / "sweep.csv", digest, ["R", "best_energy", "exact_energy", "error", "iterations"], rows),
        write_json(out / "sweep.json", digest, "sweep", {"points": docs}),
        write_csv(out / "errors.csv", digest, ERROR_COLUMNS, error_rows(report)),
    ]
    within = sum(r.within for r in report.rows)
    print(f"swept {len(points)} distances; {within}/{len(points)} ground energies within chemical accuracy")
    return paths


def _load_states(path: str) -> dict[float, list[DensityMatrix]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read states from {path}: {exc}") from None
    points = doc.get("points") or ([doc] if "final_states" in doc else None)
    if not points:
        raise ConfigError(f"{path} holds no final states")
    return {float(p["R"]): [DensityMatrix.from_dict(s) for s in p["final_states"]] for p in points}


def _noisy_ground(table: MoleculeTable, R: float, noise: NoiseModel) -> DensityMatrix:
    vec = exact_eigenstates(table, R).eigenvectors[:, 0]
    rho = DensityMatrix.from_vector(vec)
    for _, ch in noise.entries:
        rho = apply_channel(rho, ch)
    return rho


def cmd_qse(cfg: RunConfig) -> list[Path]:
    table = cfg.load()
    sets = cfg.operator_sets()
    noise = cfg.noise_model()
    shots = cfg.shot_count
    seed = cfg.require_seed() if shots is not None else 0
    from_file = cfg.source != "exact_ground"
    states = _load_states(cfg.source) if from_file else None
    distances = sorted(states) if from_file and cfg.r is None else cfg.distances(table)

    docs, rows = [], []
    for R in distances:
        idx = _rows_index(table, R)
        h = hamiltonian_at(table, R)
        spectrum = exact_spectrum(table, R)
        if from_file:
            if R not in states:
                raise ConfigError(f"no states for R={R} in {cfg.source}")
            rhos = states[R]
        else:
            rhos = [_noisy_ground(table, R, noise)]
        raw = [state_energy(rho, h) for rho in rhos]
        tol = cfg.match_tol or (sampled_match_tol(h, shots) if shots else EXACT_MATCH_TOL)
        entry = {"R": R, "exact_spectrum": spectrum.tolist(), "raw_energies": raw, "sets": {}}
        grounds = []
        for k, ops in enumerate(sets):
            per_state = []
            for j, rho in enumerate(rhos):
                mode = Sampled(shots, stream(seed, idx, k, j)) if shots else None
                sol = solve(QseProblem(rho, h, ops, mode, cfg.effective_cutoff))
                rep = classify_spurious(sol, spectrum, tol)
                per_state.append({**sol.to_dict(), "spurious_report": rep.to_dict()})
            ground = float(np.median([s["eigenvalues"][0] for s in per_state]))
            grounds.append(ground)
            entry["sets"][ops.label] = {"ground_estimate": ground, "states": per_state}
        docs.append(entry)
        rows.append([R, float(spectrum[0]), float(np.median(raw)), *grounds])
        log.info("R=%g raw %.6f qse %s", R, np.median(raw), grounds)

    digest = cfg.digest()
    out = Path(cfg.out)
    columns = ["R", "exact_ground", "raw_energy", *[s.label for s in sets]]
    paths = [
        write_json(out / "qse.json", digest, "qse", {"operator_sets": {s.label: s.labels for s in sets}, "points": docs}),
        write_csv(out / "qse_compare.csv", digest, columns, rows),
    ]
    for row in rows:
        errs = "  ".join(f"{s.label}={abs(g - row[1]):.3e}" for s, g in zip(sets, row[3:]))
        print(f"R={row[0]:g}  raw_error={abs(row[2] - row[1]):.3e}  {errs}")
    return paths


def spurious_demo_cases() -> list[dict]:
    """The fixed two-qubit example H = Z1 + Z2 + X1 X2 under a p = 1/2 channel.

    Besides the X1 channel, the same sets are run against a Y1 channel (an
    X1 flip composed with a Z1 phase flip) for comparison.
    """
    from .pauli import QubitOperator, named_set
    from .linalg import eigh

    h = QubitOperator({"ZI": 1.0, "IZ": 1.0, "XX": 1.0})
    w, v = eigh(h.to_matrix())
    ground = DensityMatrix.from_vector(v[:, 0])
    mixed_x = apply_channel(ground, pauli_x(0.5, qubit=1))
    mixed_y = apply_channel(ground, pauli_y(0.5, qubit=1))
    cases = []
    for state_label, rho in (("pauli_x_q1", mixed_x), ("pauli_y_q1", mixed_y)):
        for label in ("si_nine", "si_six", "zz_pair", "full_p2"):
            cases.append((state_label, rho, named_set(label)))
    cases.append(("maximally_mixed", DensityMatrix.maximally_mixed(2), named_set("full_p2")))
    out = []
    for state_label, rho, ops in cases:
        sol = solve(QseProblem(rho, h, ops))
        rep = classify_spurious(sol, w)
        out.append(
            {
                "state": state_label,
                "ops": ops.label,
                "rank": sol.rank,
                "eigenvalues": [float(e) for e in sol.eigenvalues],
                "n_spurious": rep.n_spurious,
                "spurious_report": rep.to_dict(),
            }
        )
    return out


def cmd_spurious_demo(cfg: RunConfig) -> list[Path]:
    cases = spurious_demo_cases()
    for c in cases:
        eig = " ".join(f"{e:+.6f}" for e in c["eigenvalues"])
        print(f"{c['state']:<16} {c['ops']:<8} rank={c['rank']:<2} spurious={c['n_spurious']}  [{eig}]")
    path = write_json(Path(cfg.out) / "spurious_demo.json", cfg.digest(), "spurious-demo", {"cases": cases})
    return [path]


def _read_energies(path: Path) -> list[float]:
    vals = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        first = line.split(",")[0].strip()
        try:
            vals.append(float(first))
        except ValueError:
            continue  # header line
    return vals


def cmd_hist(cfg: RunConfig) -> list[Path]:
    if not cfg.input:
        raise ConfigError("hist needs --input (a sweep/vqe JSON or a file of energies)")
    src = Path(cfg.input)
    if not src.exists():
        raise ConfigError(f"input not found: {src}")
    digest = cfg.digest()
    out = Path(cfg.out)

    if src.suffix.lower() != ".json":
        energies = _read_energies(src)
        hist = histogram_energies(energies)
        peaks = find_peaks(hist)
        paths = [
            write_csv(out / "hist.csv", digest, ["energy", "count", "smoothed"], histogram_rows(hist)),
            write_csv(out / "peaks.csv", digest, ["energy", "height"], peaks),
        ]
        print(f"{len(energies)} energies, {len(peaks)} peaks")
        return paths

    # swarm states: QSE on every particle, then histogram per distance
    table = cfg.load()
    ops = cfg.operator_sets()[0]
    shots = cfg.shot_count
    seed = cfg.require_seed() if shots is not None else 0
    states = _load_states(str(src))
    hist_rows, peak_rows, estimates = [], [], {}
    for R in sorted(states):
        idx = _rows_index(table, R)
        h = hamiltonian_at(table, R)
        spectrum = exact_spectrum(table, R)
        energies = []
        for j, rho in enumerate(states[R]):
            mode = Sampled(shots, stream(seed, idx, 0, j)) if shots else None
            energies.extend(solve(QseProblem(rho, h, ops, mode, cfg.effective_cutoff)).eigenvalues.tolist())
        hist = histogram_energies(energies)
        peaks = find_peaks(hist)
        hist_rows.extend(histogram_rows(hist, R))
        best: dict[int, tuple[float, float]] = {}
        for e, height in peaks:
            peak_rows.append([R, e, height])
            level = int(np.argmin(np.abs(spectrum - e)))
            dist = abs(spectrum[level] - e)
            if level not in best or dist < best[level][0]:
                best[level] = (dist, e)
        for level, (_, e) in best.items():
            estimates[(R, level)] = e
    report = error_report(estimates, table)
    paths = [
        write_csv(out / "hist.csv", digest, ["R", "energy", "count", "smoothed"], hist_rows),
        write_csv(out / "peaks.csv", digest, ["R", "energy", "height"], peak_rows),
        write_csv(out / "errors.csv", digest, ERROR_COLUMNS, error_rows(report)),
    ]
    for R, (ok, total) in report.summary().items():
        print(f"R={R:g}  {ok}/{total} levels within chemical accuracy")
    return paths


COMMANDS = {
    "exact": cmd_exact,
    "vqe": cmd_vqe,
    "sweep": cmd_sweep,
    "qse": cmd_qse,
    "spurious-demo": cmd_spurious_demo,
    "hist": cmd_hist,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--table", help="coefficient table path or 'embedded'")
    common.add_argument("--shots", help="'exact' or shots per correlator")
    common.add_argument("--ops", help="operator set label(s), comma separated")
    common.add_argument("--r", "-R", dest="r", help="'all' or comma-separated bond lengths")
    common.add_argument("--noise", help="e.g. 'pauli_x:0.1@end_of_prep;dephasing:0.02:2'")
    common.add_argument("--cutoff", type=float, help="relative overlap cutoff (default 1e-8 exact, 1/sqrt(shots) sampled)")
    common.add_argument("--particles", type=int)
    common.add_argument("--iterations", type=int)
    common.add_argument("--warm-iterations", dest="warm_iterations", type=int)
    common.add_argument("--coherent-offset", dest="coherent_offset", type=float, help="entangler phase offset (rad)")
    common.add_argument("--source", help="'exact_ground' or a sweep/vqe JSON with final states")
    common.add_argument("--match-tol", dest="match_tol", type=float)
    common.add_argument("--input", help="hist input: sweep/vqe JSON or energies file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="h2qse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"h2qse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("exact", parents=[common], help="exact spectrum per bond length")
    sub.add_parser("vqe", parents=[common], help="single-distance VQE run")
    sub.add_parser("sweep", parents=[common], help="warm-started VQE across bond lengths")
    sub.add_parser("qse", parents=[common], help="subspace expansion on exact or swarm states")
    sub.add_parser("spurious-demo", parents=[common], help="two-qubit spurious-state example")
    sub.add_parser("hist", parents=[common], help="histogram and peak-find QSE energies")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = build_config(args)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LinalgError, StateError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
