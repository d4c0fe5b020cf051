"""Variational ground-state search driven by particle-swarm optimization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .hamiltonian import MoleculeTable, hamiltonian_from_row
from .pauli import QubitOperator
from .state import DensityMatrix, NoiseModel, expectation, prepare_state, sample_correlator

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
N_PARAMS = 6

# substreams of the per-(seed, iteration, particle) RNG key
_STREAM_INIT = 0
_STREAM_UPDATE = 1
_STREAM_OBJECTIVE = 2


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, *key) tuple."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([int(seed), *map(int, key)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class AnsatzParams:
    """The six circuit angles in radians, wrapped to [0, 2*pi).

    Order: qubit-1 amplitude, qubit-1 phase, qubit-2 amplitude, qubit-2
    phase, entangler length, entangler phase.
    """

    theta: tuple[float, ...]

    def __post_init__(self):
        t = np.mod(np.asarray(self.theta, dtype=float), TWO_PI)
        if t.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} angles, got {t.shape}")
        object.__setattr__(self, "theta", tuple(float(v) for v in t))

    @classmethod
    def from_normalized(cls, x: Sequence[float]) -> AnsatzParams:
        return cls(tuple(TWO_PI * np.asarray(x, dtype=float)))

    def normalized(self) -> np.ndarray:
        return np.asarray(self.theta) / TWO_PI


@dataclass(frozen=True)
class SwarmConfig:
    n_particles: int = 20
    n_iterations: int = 12
    inertia: float = 0.5
    cognitive: float = 0.5
    social: float = 0.5
    lower: tuple[float, ...] = (0.0,) * N_PARAMS
    upper: tuple[float, ...] = (1.0,) * N_PARAMS
    seed: int = 0
    max_velocity: float = 0.5

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")
        if self.n_iterations < 1:
            raise ValueError("need at least 1 iteration")
        if min(self.inertia, self.cognitive, self.social) < 0:
            raise ValueError("swarm weights must be non-negative")
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != hi.shape or np.any(lo < 0) or np.any(hi > 1) or np.any(lo >= hi):
            raise ValueError("bounds must satisfy 0 <= lower < upper <= 1 per dimension")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    @property
    def dim(self) -> int:
        return len(self.lower)


@dataclass
class IterationRecord:
    iteration: int
    median_energy: float
    std_energy: float
    best_energy: float
    positions: np.ndarray
    energies: np.ndarray


@dataclass
class SwarmResult:
    best_position: np.ndarray
    best_value: float
    trajectory: list[IterationRecord]
    final_positions: np.ndarray
    final_values: np.ndarray
    n_evaluations: int


@dataclass
class VqeResult:
    best_params: AnsatzParams
    best_energy: float
    trajectory: list[IterationRecord]
    final_states: list[DensityMatrix]
    final_energies: np.ndarray
    n_evaluations: int
    config: SwarmConfig = field(repr=False, default=None)


Objective = Callable[[np.ndarray, np.random.Generator], float]


def pso_minimize(
    objective: Objective,
    config: SwarmConfig,
    init_lower: Sequence[float] | None = None,
    init_upper: Sequence[float] | None = None,
    anchor: Sequence[float] | None = None,
) -> SwarmResult:
    """Minimize ``objective(x, rng)`` over the box ``[lower, upper]``.

    The first iteration evaluates the initial swarm, so the total number of
    objective calls is ``n_particles * n_iterations``. Particles start
    uniformly in ``[init_lower, init_upper]`` (the full box by default) with
    velocities drawn from +-1/4 of the initial box width. ``anchor``, if
    given, replaces the first particle's starting position.
    """
    lo = np.asarray(config.lower, float)
    hi = np.asarray(config.upper, float)
    ilo = lo if init_lower is None else np.clip(np.asarray(init_lower, float), lo, hi)
    ihi = hi if init_upper is None else np.clip(np.asarray(init_upper, float), lo, hi)
    if np.any(ilo > ihi):
        raise ValueError("initialization box is empty")
    vmax = config.max_velocity * (hi - lo)
    n, dim = config.n_particles, config.dim

    x = np.empty((n, dim))
    v = np.empty((n, dim))
    for i in range(n):
        g = stream(config.seed, 0, i, _STREAM_INIT)
        x[i] = ilo + g.random(dim) * (ihi - ilo)
        v[i] = np.clip((g.random(dim) - 0.5) * 0.5 * (ihi - ilo), -vmax, vmax)
    if anchor is not None:
        x[0] = np.clip(np.asarray(anchor, float), lo, hi)

    n_eval = 0

    def evaluate(it: int) -> np.ndarray:
        nonlocal n_eval
        out = np.empty(n)
        for i in range(n):
            try:
                out[i] = float(objective(x[i].copy(), stream(config.seed, it, i, _STREAM_OBJECTIVE)))
            except Exception as exc:
                raise RuntimeError(f"objective failed at iteration {it}, particle {i}, x={x[i].tolist()}") from exc
            n_eval += 1
        return out

    f = evaluate(0)
    pbest_x, pbest_f = x.copy(), f.copy()
    gi = int(np.argmin(pbest_f))
    gbest_x, gbest_f = pbest_x[gi].copy(), float(pbest_f[gi])
    trajectory = [IterationRecord(1, float(np.median(f)), float(np.std(f)), gbest_f, x.copy(), f.copy())]

    for it in range(1, config.n_iterations):
        for i in range(n):
            g = stream(config.seed, it, i, _STREAM_UPDATE)
            rp, rg = g.random(dim), g.random(dim)
            v[i] = (
                config.inertia * v[i]
                + config.cognitive * rp * (pbest_x[i] - x[i])
                + config.social * rg * (gbest_x - x[i])
            )
        v = np.clip(v, -vmax, vmax)
        x = np.clip(x + v, lo, hi)
        f = evaluate(it)

        better = f < pbest_f
        pbest_x[better] = x[better]
        pbest_f[better] = f[better]
        gi = int(np.argmin(pbest_f))
        if pbest_f[gi] < gbest_f:
            gbest_x, gbest_f = pbest_x[gi].copy(), float(pbest_f[gi])
        trajectory.append(IterationRecord(it + 1, float(np.median(f)), float(np.std(f)), gbest_f, x.copy(), f.copy()))
        log.debug("iteration %d: median %.6f best %.6f", it + 1, np.median(f), gbest_f)

    return SwarmResult(gbest_x, gbest_f, trajectory, x.copy(), f.copy(), n_eval)


def energy(
    params,
    hamiltonian: QubitOperator,
    noise: NoiseModel | None = None,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
    coherent_offset: float = 0.0,
) -> float:
    """Energy of the prepared state: exact when ``shots`` is None, else sampled
    term by term with ``shots`` single-shot outcomes per Pauli correlator."""
    rho = prepare_state(params, noise, coherent_offset)
    return state_energy(rho, hamiltonian, shots, rng)


def state_energy(
    rho: DensityMatrix,
    hamiltonian: QubitOperator,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    if not hamiltonian.hermitian():
        raise ValueError("Hamiltonian must have real coefficients")
    if shots is None:
        return expectation(rho, hamiltonian)
    if rng is None:
        raise ValueError("sampled evaluation needs an explicit rng")
    total = 0.0
    for p, c in hamiltonian:
        total += c.real if p.is_identity() else c.real * sample_correlator(rho, p, shots, rng)
    return total


def run_vqe(
    hamiltonian: QubitOperator,
    config: SwarmConfig,
    noise: NoiseModel | None = None,
    shots: int | None = None,
    coherent_offset: float = 0.0,
    init_lower: Sequence[float] | None = None,
    init_upper: Sequence[float] | None = None,
    anchor: Sequence[float] | None = None,
) -> VqeResult:
    """Minimize the circuit energy over the normalized parameter box."""

    def objective(x, rng):
        return energy(AnsatzParams.from_normalized(x), hamiltonian, noise, shots, rng, coherent_offset)

    res = pso_minimize(objective, config, init_lower, init_upper, anchor)
    states = [prepare_state(AnsatzParams.from_normalized(p), noise, coherent_offset) for p in res.final_positions]
    return VqeResult(
        best_params=AnsatzParams.from_normalized(res.best_position),
        best_energy=res.best_value,
        trajectory=res.trajectory,
        final_states=states,
        final_energies=res.final_values,
        n_evaluations=res.n_evaluations,
        config=config,
    )


@dataclass
class SweepPoint:
    R: float
    row_index: int
    result: VqeResult
    warm_started: bool


def dissociation_sweep(
    table: MoleculeTable,
    config: SwarmConfig,
    noise: NoiseModel | None = None,
    shots: int | None = None,
    warm_iterations: int = 6,
    warm_fraction: float = 0.05,
    coherent_offset: float = 0.0,
    order: Sequence[float] | None = None,
) -> list[SweepPoint]:
    """Run VQE at each bond length, warm-starting from the previous optimum.

    The first distance uses the full box and ``config.n_iterations``; later
    ones start within +-``warm_fraction`` (normalized units) of the previous
    best, with one particle placed exactly on it, and run ``warm_iterations``. Each distance seeds its swarm from
    ``(config.seed, row index)``, so the visiting order only moves the warm
    start.
    """
    distances = list(table.distances if order is None else order)
    if not distances:
        raise ValueError("nothing to sweep")
    index = {round(R, 9): i for i, R in enumerate(table.distances)}
    out: list[SweepPoint] = []
    prev: np.ndarray | None = None
    for R in distances:
        row = table.row(R)
        idx = index[round(row.R, 9)]
        h = hamiltonian_from_row(row)
        if prev is None:
            cfg = replace(config, seed=derive_seed(config.seed, idx))
            res = run_vqe(h, cfg, noise, shots, coherent_offset)
        else:
            cfg = replace(config, seed=derive_seed(config.seed, idx), n_iterations=warm_iterations)
            res = run_vqe(h, cfg, noise, shots, coherent_offset, prev - warm_fraction, prev + warm_fraction, prev)
        out.append(SweepPoint(row.R, idx, res, prev is not None))
        prev = res.best_params.normalized()
        log.info("R=%.2f best energy %.6f", row.R, res.best_energy)
    return out
