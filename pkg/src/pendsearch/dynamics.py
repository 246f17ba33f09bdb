"""Time evolution of arrowhead systems with per-group energy accounting.

Two independent paths, each validating the other: ``modal_solve`` is the
exact eigendecomposition solution (the correctness oracle, dense, small
N only) and ``leapfrog_evolve`` is the O(N)-per-step symplectic engine
used for production runs. Energy is attributed to pendulum j including
its spring term (m_j/N) v_j^2/2 + (k_j/N)(x_j - X)^2/2, so the support,
deviant and collective groups sum exactly to the total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._kernels import leapfrog_kernel
from .ensemble import GROUP_DEVIANT, ArrowSystem
from .errors import EigenFailure, UnstableTimestep, ValidationError

# dt rule: 100 steps per shortest modal period keeps the phase error of
# the symplectic map below the envelope-detection tolerance; 50 is the
# hard floor accepted by the integrator.
STEPS_PER_PERIOD = 100
MIN_STEPS_PER_PERIOD = 50


@dataclass(frozen=True)
class State:
    """Displacements and velocities at one instant; index 0 = support."""

    time: float
    displacements: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "displacements",
                           np.asarray(self.displacements, dtype=float))
        object.__setattr__(self, "velocities",
                           np.asarray(self.velocities, dtype=float))
        if self.displacements.shape != self.velocities.shape:
            raise ValidationError(
                ["displacements and velocities must have equal length"])


def push_support(system: ArrowSystem, speed: float) -> State:
    """Everything at rest at equilibrium, support kicked to the given speed."""
    v = np.zeros(system.ndof)
    v[0] = speed
    return State(0.0, np.zeros(system.ndof), v)


def kick_pendulum(system: ArrowSystem, pendulum: int, speed: float) -> State:
    """At-rest state with one hanging pendulum kicked (0-based index)."""
    if not 0 <= pendulum < system.ndof - 1:
        raise ValidationError([f"pendulum index {pendulum} out of range"])
    v = np.zeros(system.ndof)
    v[pendulum + 1] = speed
    return State(0.0, np.zeros(system.ndof), v)


class GroupEnergies(NamedTuple):
    support: float
    deviant: float
    collective: float
    total: float


def per_coordinate_energies(system: ArrowSystem, state: State) -> np.ndarray:
    """Energy of each coordinate, spring terms attributed to the pendulums."""
    x, v = state.displacements, state.velocities
    e = np.empty(system.ndof)
    e[0] = 0.5 * system.masses[0] * v[0] ** 2 \
        + 0.5 * system.hub_stiffness * x[0] ** 2
    rel = x[1:] - x[0]
    e[1:] = 0.5 * system.masses[1:] * v[1:] ** 2 \
        - 0.5 * system.stiff_spoke * rel ** 2
    return e


def energy_accounting(system: ArrowSystem, state: State) -> GroupEnergies:
    """Support / deviant-group / normal-group energies and their sum."""
    e = per_coordinate_energies(system, state)
    dev = e[1:][system.groups[1:] == GROUP_DEVIANT].sum()
    return GroupEnergies(float(e[0]), float(dev),
                         float(e[1:].sum() - dev), float(e.sum()))


@dataclass(frozen=True)
class EnergyTrace:
    """Sampled per-group energies along a run."""

    times: np.ndarray
    support_energy: np.ndarray
    deviant_energy: np.ndarray
    collective_energy: np.ndarray
    total: np.ndarray

    def __post_init__(self):
        for name in ("times", "support_energy", "deviant_energy",
                     "collective_energy", "total"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))

    def relative_drift(self) -> float:
        """Secular energy drift over the run, from a least-squares slope.

        The symplectic map has a bounded O((omega*dt)^2) energy wobble
        around a conserved mean; the fitted linear trend isolates the
        secular part, which is what must vanish.
        """
        e0 = self.total[0]
        if e0 == 0 or self.times.shape[0] < 2:
            return 0.0
        t = self.times - self.times.mean()
        denom = (t * t).sum()
        if denom == 0:
            return 0.0
        slope = (t * (self.total - self.total.mean())).sum() / denom
        return abs(slope) * (self.times[-1] - self.times[0]) / abs(e0)

    def max_wobble(self) -> float:
        """Largest pointwise |E(t) - E(0)| / E(0)."""
        e0 = self.total[0]
        if e0 == 0:
            return 0.0
        return float(np.abs(self.total - e0).max() / abs(e0))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,E_support,E_deviant,E_collective,E_total\n")
            for row in zip(self.times, self.support_energy,
                           self.deviant_energy, self.collective_energy,
                           self.total):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class Trajectory:
    """States sampled on a time grid (dense arrays, rows = times)."""

    times: np.ndarray
    displacements: np.ndarray
    velocities: np.ndarray

    def state(self, i: int) -> State:
        return State(float(self.times[i]), self.displacements[i],
                     self.velocities[i])

    def energy_trace(self, system: ArrowSystem) -> EnergyTrace:
        x, v = self.displacements, self.velocities
        rel = x[:, 1:] - x[:, :1]
        e = 0.5 * system.masses[1:] * v[:, 1:] ** 2 \
            - 0.5 * system.stiff_spoke * rel ** 2
        sup = 0.5 * system.masses[0] * v[:, 0] ** 2 \
            + 0.5 * system.hub_stiffness * x[:, 0] ** 2
        dev_mask = system.groups[1:] == GROUP_DEVIANT
        dev = e[:, dev_mask].sum(axis=1)
        col = e.sum(axis=1) - dev
        return EnergyTrace(self.times, sup, dev, col, sup + dev + col)


def modal_solve(system: ArrowSystem, initial: State,
                times: np.ndarray) -> Trajectory:
    """Exact evolution by eigendecomposition, no accumulation error.

    Solves M xdd = -K x through the symmetric M^{-1/2} K M^{-1/2};
    evaluation at arbitrary (sorted) times.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise ValidationError(["times must be a 1-D ascending vector"])
    if initial.displacements.shape[0] != system.ndof:
        raise ValidationError(["state does not match system DOF count"])
    try:
        w2, vecs = np.linalg.eigh(system.dense_dynamic())
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigendecomposition failed: {exc}") from exc

    w2 = np.where(w2 > 0.0, w2, 0.0)
    omega = np.sqrt(w2)
    root_m = np.sqrt(system.masses)
    a = vecs.T @ (root_m * initial.displacements)
    b = vecs.T @ (root_m * initial.velocities)

    phase = np.outer(omega, times)
    cos_p, sin_p = np.cos(phase), np.sin(phase)
    # sin(wt)/w with the w -> 0 limit t
    zero = omega == 0.0
    stretch = np.empty_like(phase)
    stretch[~zero] = sin_p[~zero] / omega[~zero, None]
    stretch[zero] = times
    q = vecs @ (a[:, None] * cos_p + b[:, None] * stretch)
    qd = vecs @ (b[:, None] * cos_p - (a * omega)[:, None] * sin_p)
    return Trajectory(times, (q / root_m[:, None]).T, (qd / root_m[:, None]).T)


def frequency_bound(system: ArrowSystem) -> float:
    """Upper bound on the largest natural frequency (rad/s)."""
    return math.sqrt(system.frequency_sq_bound())


def mandated_timestep(system: ArrowSystem) -> float:
    """dt = T_min/100 with T_min from the rigorous frequency bound."""
    return 2.0 * math.pi / frequency_bound(system) / STEPS_PER_PERIOD


@dataclass(frozen=True)
class LeapfrogRun:
    """Outputs of one leapfrog evolution."""

    trace: EnergyTrace
    final_state: State
    probe_times: np.ndarray | None = None
    probe_displacements: np.ndarray | None = None
    states: Trajectory | None = field(default=None, repr=False)


def leapfrog_evolve(system: ArrowSystem, initial: State, dt: float,
                    steps: int, *, record_stride: int | None = None,
                    probe_pendulum: int | None = None,
                    probe_stride: int | None = None,
                    record_states: bool = False,
                    backend: str | None = None) -> LeapfrogRun:
    """Velocity-Verlet evolution exploiting the arrow structure, O(N)/step.

    Group energies are recorded every ``record_stride`` steps (default:
    8 samples per deviant cycle when the system knows its ensemble) and
    the probe pendulum's displacement every ``probe_stride`` steps
    (default: 32 per cycle). Deterministic: fixed operation order,
    bit-reproducible for identical inputs within one backend lane.
    """
    if steps < 1:
        raise ValidationError([f"steps must be >= 1, got {steps}"])
    if initial.displacements.shape[0] != system.ndof:
        raise ValidationError(["state does not match system DOF count"])
    max_dt = 2.0 * math.pi / frequency_bound(system) / MIN_STEPS_PER_PERIOD
    if dt > max_dt * (1.0 + 1e-12):
        raise UnstableTimestep(
            f"dt = {dt:.3g} exceeds the T_min/{MIN_STEPS_PER_PERIOD} bound "
            f"{max_dt:.3g}")

    if record_stride is None or probe_stride is None:
        if system.meta is not None:
            t_dev = 2.0 * math.pi / math.sqrt(system.meta.omega_sq)
        else:
            t_dev = 2.0 * math.pi / frequency_bound(system)
        if record_stride is None:
            record_stride = max(1, math.ceil(t_dev / (8.0 * dt)))
        if probe_stride is None:
            probe_stride = max(1, math.ceil(t_dev / (32.0 * dt)))

    probe_idx = -1
    if probe_pendulum is not None:
        if not 0 <= probe_pendulum < system.ndof - 1:
            raise ValidationError(
                [f"probe pendulum {probe_pendulum} out of range"])
        probe_idx = probe_pendulum + 1

    x = initial.displacements.copy()
    v = initial.velocities.copy()
    e_sup, e_dev, e_col, probe, xs, vs = leapfrog_kernel(
        system.masses.astype(float), system.hub_stiffness,
        -system.stiff_spoke.astype(float), system.groups.astype(np.int64),
        x, v, dt, steps, record_stride, probe_idx, probe_stride,
        record_states, backend=backend)

    t0 = initial.time
    rec_times = t0 + dt * record_stride * np.arange(e_sup.shape[0])
    trace = EnergyTrace(rec_times, e_sup, e_dev, e_col, e_sup + e_dev + e_col)
    final = State(t0 + dt * steps, x, v)
    run_states = None
    if record_states:
        run_states = Trajectory(rec_times, xs, vs)
    if probe_idx >= 0:
        probe_times = t0 + dt * probe_stride * np.arange(probe.shape[0])
        return LeapfrogRun(trace, final, probe_times, probe, run_states)
    return LeapfrogRun(trace, final, None, None, run_states)
