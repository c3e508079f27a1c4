"""Thermal sampling, batch trajectory execution, and reaction statistics.

Sampling follows a two-stage protocol: Boltzmann velocities at the bath
temperature (optionally re-aimed so the projectile particle moves toward
its target), then optional resampling of additional members around a base
velocity set at a small relative temperature. Centre-of-mass momentum is
removed after every stage.

Randomness comes from numpy's counter-based Philox generator keyed by the
spec seed, so batches are reproducible across platforms and independent of
execution order or parallelism. Helper `make_specs` derives per-trajectory
seeds as base_seed XOR trajectory index.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .cavity import CavityMode, FullState, PhotonState, zero_field_init
from .dynamics import IntegrationError, ReactionEvent, Trajectory, propagate
from .model import ModelSystem, dipole
from .units import KB_HARTREE_PER_K

#: identifier recorded in manifests so runs can be reproduced elsewhere
RNG_ALGORITHM = "numpy.random.Philox (counter-based; stream key = seed XOR trajectory index)"


@dataclass(frozen=True)
class SamplingSpec:
    """How to draw one trajectory's initial velocities."""

    temperature_K: float
    seed: int
    aim: Optional[Tuple[int, int]] = None  # (projectile, target) particle indices
    resample: Optional[Tuple[int, float]] = None  # (base spec index, T_rel Kelvin)

    def __post_init__(self):
        if self.temperature_K < 0:
            raise ValueError("temperature must be non-negative")
        if self.resample is not None and self.resample[1] < 0:
            raise ValueError("relative temperature must be non-negative")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed & 0xFFFFFFFFFFFFFFFF)))


def _remove_com(system: ModelSystem, v: np.ndarray) -> np.ndarray:
    m = system.masses
    vv = v.reshape(-1, 3)
    vcom = (m[:, None] * vv).sum(axis=0) / m.sum()
    vv = vv - vcom
    # the elementwise subtraction leaves an O(eps * sum|m v|) residual; dump
    # an exactly-summed correction on the heaviest particle so the total
    # momentum is zero to below 1e-14 even for heavy beads
    k = int(np.argmax(m))
    for c in range(3):
        residual = math.fsum(float(mi) * float(vi) for mi, vi in zip(m, vv[:, c]))
        vv[k, c] -= residual / m[k]
    return vv.reshape(-1)


def _boltzmann_draw(system: ModelSystem, temperature_K: float, rng) -> np.ndarray:
    sigma = np.sqrt(KB_HARTREE_PER_K * temperature_K / system.masses)
    return (sigma[:, None] * rng.standard_normal((system.n_particles, 3))).reshape(-1)


def aim_reflect(velocity: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Mirror the velocity component along `direction` if it points away.

    Speed is preserved exactly; only the sign of the projection flips, and
    only when it is negative.
    """
    comp = float(velocity @ direction)
    if comp < 0:
        return velocity - 2.0 * comp * direction
    return velocity.copy()


def sample_velocities(
    system: ModelSystem, spec: SamplingSpec, positions: Optional[np.ndarray] = None
) -> np.ndarray:
    """Boltzmann velocities, aimed projectile, COM momentum removed.

    Each Cartesian component is drawn from a zero-mean normal with
    stddev sqrt(kB T / M_i). The aim step conditionally reflects the
    projectile's velocity component along the projectile->target line so it
    is non-negative toward the target; speeds are preserved exactly.
    """
    rng = _rng(spec.seed)
    v = _boltzmann_draw(system, spec.temperature_K, rng)
    if spec.aim is not None:
        if positions is None:
            positions = system.reference_positions
        if positions is None:
            raise ValueError("aiming requires positions")
        proj, target = spec.aim
        pts = np.asarray(positions, dtype=float).reshape(-1, 3)
        u = pts[target] - pts[proj]
        norm = np.linalg.norm(u)
        if norm < 1e-12:
            raise ValueError("projectile and target coincide")
        u /= norm
        v[3 * proj : 3 * proj + 3] = aim_reflect(v[3 * proj : 3 * proj + 3], u)
    return _remove_com(system, v)


def resample_around(
    system: ModelSystem, base_velocities: np.ndarray, spec: SamplingSpec, count: int
) -> List[np.ndarray]:
    """`count` velocity sets spread around `base_velocities` at T_rel.

    Each member is base + a fresh Boltzmann draw at the relative
    temperature, with the COM momentum removed again. Deterministic per
    spec seed; member k uses the stream keyed by seed XOR k.
    """
    if spec.resample is None:
        raise ValueError("spec has no resample block")
    if count < 1:
        raise ValueError("count must be >= 1")
    base = np.asarray(base_velocities, dtype=float)
    t_rel = spec.resample[1]
    out = []
    for k in range(count):
        rng = _rng(spec.seed ^ k)
        v = base + _boltzmann_draw(system, t_rel, rng)
        out.append(_remove_com(system, v))
    return out


def make_specs(
    base_seed: int,
    count: int,
    temperature_K: float,
    aim: Optional[Tuple[int, int]] = None,
    resample_T_K: Optional[float] = None,
) -> List[SamplingSpec]:
    """Per-trajectory specs with seeds base_seed XOR index.

    With `resample_T_K` set, spec 0 is the base draw at the bath
    temperature and every later spec resamples around it at the relative
    temperature (the two-stage protocol).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    specs = [SamplingSpec(temperature_K, base_seed ^ 0, aim=aim)]
    for k in range(1, count):
        resample = (0, resample_T_K) if resample_T_K is not None else None
        specs.append(SamplingSpec(temperature_K, base_seed ^ k, aim=aim, resample=resample))
    return specs


def resolve_velocities(
    system: ModelSystem, specs: Sequence[SamplingSpec], positions: Optional[np.ndarray] = None
) -> List[np.ndarray]:
    """Initial velocities for every spec, honouring resample references."""
    velocities: List[Optional[np.ndarray]] = [None] * len(specs)
    for k, spec in enumerate(specs):
        if spec.resample is None:
            velocities[k] = sample_velocities(system, spec, positions)
    for k, spec in enumerate(specs):
        if spec.resample is not None:
            base_idx = spec.resample[0]
            base = velocities[base_idx]
            if base is None:
                raise ValueError(f"spec {k} resamples around unresolved spec {base_idx}")
            velocities[k] = resample_around(system, base, spec, 1)[0]
    return velocities  # type: ignore[return-value]


@dataclass
class TrajectoryRecord:
    """Per-trajectory outcome inside an ensemble."""

    index: int
    seed: int
    event: Optional[ReactionEvent]
    mean_bond_bohr: Optional[float]
    dissociated: bool = False
    error: Optional[str] = None


@dataclass
class EnsembleResult:
    """Batch outcomes plus the reactive-bond series needed for window statistics."""

    records: List[TrajectoryRecord]
    times_fs: np.ndarray
    bond_series: np.ndarray  # (n_ok, frames) reactive bond length, bohr
    series_index: List[int]  # record index per bond_series row
    threshold_bohr: float
    reaction_fraction: float
    mean_bond_bohr: float
    stderr_bond_bohr: float
    trajectories: Optional[List[Trajectory]] = None

    @property
    def n_trajectories(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class Aggregates:
    """Windowed ensemble statistics."""

    window_fs: Tuple[float, float]
    n: int
    reaction_fraction: float
    mean_bond_bohr: float
    stderr_bond_bohr: float
    per_trajectory_bohr: Tuple[float, ...]


def _run_single(args):
    (system, mode, positions, velocities, dt, n_steps, stride, threshold) = args
    rb = system.reactive_bond
    if mode is not None:
        mu = dipole(system, positions)
        photon = zero_field_init(mode, mu)
    else:
        photon = PhotonState(0.0, 0.0)
    state = FullState(positions.copy(), velocities, photon, 0.0)
    monitor = (rb.i, rb.j, threshold)
    traj, event = propagate(system, mode, state, dt, n_steps, stride, monitor)
    series = traj.bond_series(rb.i, rb.j)
    return traj, event, series


def _run_single_safe(args):
    # integration failures are data, not batch-fatal
    try:
        return _run_single(args)
    except IntegrationError as exc:
        return exc


def run_ensemble(
    system: ModelSystem,
    mode: Optional[CavityMode],
    specs: Sequence[SamplingSpec],
    *,
    positions: np.ndarray,
    dt: float,
    n_steps: int,
    stride: int = 4,
    threshold: Optional[float] = None,
    window_fs: Optional[Tuple[float, float]] = None,
    n_workers: int = 1,
    keep_trajectories: bool = False,
) -> EnsembleResult:
    """One propagation per spec; aggregates over the analysis window.

    The photon starts in the zero-field condition for the launch dipole.
    Results are identical for serial and parallel execution (work items are
    independent and gathered by index). Per-trajectory integration errors
    are recorded on the ensemble instead of aborting the batch.
    """
    if len(specs) == 0:
        raise ValueError("at least one sampling spec is required")
    positions = np.asarray(positions, dtype=float)
    if threshold is None:
        threshold = system.reactive_bond.r_ts
    velocities = resolve_velocities(system, specs, positions)
    jobs = [
        (system, mode, positions, velocities[k], dt, n_steps, stride, threshold)
        for k in range(len(specs))
    ]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_run_single_safe, jobs))
    else:
        outcomes = [_run_single_safe(job) for job in jobs]

    records: List[TrajectoryRecord] = []
    series_rows = []
    series_index = []
    trajectories: List[Trajectory] = []
    times_fs = None
    for k, (spec, outcome) in enumerate(zip(specs, outcomes)):
        if isinstance(outcome, IntegrationError):
            records.append(TrajectoryRecord(k, spec.seed, None, None, error=str(outcome)))
            continue
        traj, event, series = outcome
        if times_fs is None:
            times_fs = traj.times_fs
        records.append(
            TrajectoryRecord(
                k, spec.seed, event, float(series.mean()), dissociated=traj.dissociated
            )
        )
        series_rows.append(series)
        series_index.append(k)
        if keep_trajectories:
            trajectories.append(traj)

    if times_fs is None:
        raise IntegrationError("every trajectory in the batch failed")
    bond_series = np.vstack(series_rows)
    if window_fs is None:
        window_fs = (float(times_fs[0]), float(times_fs[-1]))
    result = EnsembleResult(
        records=records,
        times_fs=times_fs,
        bond_series=bond_series,
        series_index=series_index,
        threshold_bohr=threshold,
        reaction_fraction=0.0,
        mean_bond_bohr=0.0,
        stderr_bond_bohr=float("nan"),
        trajectories=trajectories if keep_trajectories else None,
    )
    agg = reaction_statistics(result, window_fs)
    result.reaction_fraction = agg.reaction_fraction
    result.mean_bond_bohr = agg.mean_bond_bohr
    result.stderr_bond_bohr = agg.stderr_bond_bohr
    return result


def reaction_statistics(result: EnsembleResult, window_fs: Tuple[float, float]) -> Aggregates:
    """Window statistics: per-trajectory time-averaged bond length, their
    mean and standard error, and the fraction of first crossings inside the
    window."""
    t0, t1 = float(window_fs[0]), float(window_fs[1])
    times = result.times_fs
    if not t0 < t1:
        raise ValueError("window must have positive extent")
    if t0 < times[0] - 1e-9 or t1 > times[-1] + 1e-9:
        raise ValueError(
            f"window [{t0}, {t1}] fs outside trajectory span [{times[0]}, {times[-1]}] fs"
        )
    mask = (times >= t0 - 1e-9) & (times <= t1 + 1e-9)
    if mask.sum() < 1:
        raise ValueError("window contains no frames")
    per_traj = result.bond_series[:, mask].mean(axis=1)
    n = per_traj.size
    mean = float(per_traj.mean())
    stderr = float(per_traj.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    crossings = 0
    ok_records = [result.records[k] for k in result.series_index]
    for rec in ok_records:
        ev = rec.event
        if ev is not None and ev.occurred and t0 <= ev.crossing_time_fs <= t1:
            crossings += 1
    return Aggregates(
        window_fs=(t0, t1),
        n=n,
        reaction_fraction=crossings / n,
        mean_bond_bohr=mean,
        stderr_bond_bohr=stderr,
        per_trajectory_bohr=tuple(float(x) for x in per_traj),
    )
