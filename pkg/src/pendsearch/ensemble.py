"""Construction of the star-coupled pendulum ensemble.

N pendulums hang from a single support pendulum. In the small-angle
limit the system is linear with an arrowhead stiffness matrix: the
support couples to every pendulum, pendulums do not couple to each
other. Per-pendulum masses are stored as mass_scale/N so the total
hanging mass stays O(1) as N grows; all collective frequencies then
converge for large N.

Frequency-squared conventions used throughout (units rad^2/s^2):

    omega_bar^2 = k/m      collective mode of the normal pendulums
    omega^2     = k1/m1    deviant-pendulum mode
    omega_c^2   = (K + k + tau*k1/N) / M   support (coupling) mode
    lambda      = k/sqrt(M*m)              support <-> collective coupling
    weak        = k1*sqrt(tau) / sqrt(N*M*m1)   support <-> deviant coupling

with k = m*g/l per pendulum and K = (M + m/N)*g/L for the support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

DEFAULT_GRAVITY = 9.81

# Dense matrices are only for oracle-scale cross checks; the arrow
# (spoke) form is the canonical O(N) representation.
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class PendulumSpec:
    """Mass scale (kg) and length (m) of one pendulum family.

    The physical mass of each pendulum is mass_scale/N.
    """

    mass_scale: float
    length: float

    def __post_init__(self):
        bad = []
        if not self.mass_scale > 0:
            bad.append(f"mass_scale must be > 0, got {self.mass_scale}")
        if not self.length > 0:
            bad.append(f"length must be > 0, got {self.length}")
        if bad:
            raise ValidationError(bad)


def stiffness(spec: PendulumSpec, gravity: float) -> float:
    """Pendulum stiffness k = mass_scale * g / length."""
    return spec.mass_scale * gravity / spec.length


@dataclass(frozen=True)
class Ensemble:
    """Full physical description of the hanging set plus its support.

    ``deviant_indices`` may be empty (tau = 0, e.g. before a probe is
    shortened). Equal normal/deviant lengths are accepted here and
    rejected later, at resonance-design time, where the degeneracy
    actually matters.
    """

    n: int
    normal: PendulumSpec
    deviant: PendulumSpec
    deviant_indices: frozenset[int] = frozenset()
    support_mass: float = 1.0
    support_length: float = 1.0
    gravity: float = DEFAULT_GRAVITY

    def __post_init__(self):
        object.__setattr__(self, "deviant_indices", frozenset(self.deviant_indices))
        bad = []
        if self.n < 2:
            bad.append(f"n must be >= 2, got {self.n}")
        if any(not (0 <= i < self.n) for i in self.deviant_indices):
            bad.append(f"deviant_indices must lie in [0, {self.n})")
        if not self.support_mass > 0:
            bad.append(f"support_mass must be > 0, got {self.support_mass}")
        if not self.support_length > 0:
            bad.append(f"support_length must be > 0, got {self.support_length}")
        if not self.gravity > 0:
            bad.append(f"gravity must be > 0, got {self.gravity}")
        if bad:
            raise ValidationError(bad)

    # -- derived parameters --------------------------------------------------

    @property
    def tau(self) -> int:
        return len(self.deviant_indices)

    @property
    def k(self) -> float:
        """Normal-pendulum stiffness m*g/l."""
        return stiffness(self.normal, self.gravity)

    @property
    def k1(self) -> float:
        """Deviant-pendulum stiffness m1*g/l1."""
        return stiffness(self.deviant, self.gravity)

    @property
    def support_stiffness(self) -> float:
        """K = (M + m/N) * g / L."""
        return (self.support_mass + self.normal.mass_scale / self.n) \
            * self.gravity / self.support_length

    @property
    def omega_bar_sq(self) -> float:
        return self.gravity / self.normal.length

    @property
    def omega_sq(self) -> float:
        return self.gravity / self.deviant.length

    # -- derived ensembles ---------------------------------------------------

    def with_deviants(self, indices: Iterable[int]) -> "Ensemble":
        """Same hardware, different set of shortened pendulums."""
        return Ensemble(self.n, self.normal, self.deviant, frozenset(indices),
                        self.support_mass, self.support_length, self.gravity)

    def with_support(self, mass: float, length: float) -> "Ensemble":
        """Same hanging set under a re-designed support pendulum."""
        return Ensemble(self.n, self.normal, self.deviant, self.deviant_indices,
                        mass, length, self.gravity)

    def rehang(self, indices: Sequence[int]) -> "Ensemble":
        """Hang only the given pendulums (by original index) from the support.

        Physical per-pendulum masses are preserved: with n' pendulums kept
        out of n, mass scales shrink by n'/n so mass_scale'/n' = mass_scale/n.
        Deviant indices are remapped to positions in the new ordering.
        """
        indices = list(indices)
        if len(set(indices)) != len(indices):
            raise ValidationError(["rehang indices must be unique"])
        if any(not (0 <= i < self.n) for i in indices):
            raise ValidationError([f"rehang indices must lie in [0, {self.n})"])
        scale = len(indices) / self.n
        new_dev = frozenset(pos for pos, i in enumerate(indices)
                            if i in self.deviant_indices)
        return Ensemble(
            len(indices),
            PendulumSpec(self.normal.mass_scale * scale, self.normal.length),
            PendulumSpec(self.deviant.mass_scale * scale, self.deviant.length),
            new_dev, self.support_mass, self.support_length, self.gravity)


def place_deviants(n: int, count: int, seed: int) -> frozenset[int]:
    """Seeded random choice of deviant positions."""
    if not 0 <= count <= n:
        raise ValidationError([f"deviant count must lie in [0, {n}], got {count}"])
    rng = np.random.default_rng(seed)
    return frozenset(int(i) for i in rng.choice(n, size=count, replace=False))


# Group labels used by the energy accounting.
GROUP_SUPPORT, GROUP_DEVIANT, GROUP_NORMAL = 0, 1, 2


@dataclass(frozen=True)
class ArrowSystem:
    """Arrowhead mass/stiffness representation, index 0 = support.

    ``stiff_spoke[j]`` holds the off-diagonal entry coupling the support
    to coordinate j+1; it equals -s_j for a spring s_j between the two.
    ``stiff_diag[0]`` = K + sum(s_j); ``stiff_diag[j+1]`` = s_j.
    """

    masses: np.ndarray
    stiff_diag: np.ndarray
    stiff_spoke: np.ndarray
    groups: np.ndarray            # per-coordinate GROUP_* label
    meta: Ensemble | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("masses", "stiff_diag", "stiff_spoke", "groups"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if np.any(self.masses <= 0):
            raise ValidationError(["all masses must be positive"])
        if self.stiff_spoke.shape[0] != self.masses.shape[0] - 1:
            raise ValidationError(["need one spoke per non-support coordinate"])

    @property
    def ndof(self) -> int:
        return self.masses.shape[0]

    @property
    def hub_stiffness(self) -> float:
        """Support's own stiffness K (diagonal minus spoke load)."""
        return float(self.stiff_diag[0] + self.stiff_spoke.sum())

    def dense_stiffness(self) -> np.ndarray:
        if self.ndof > DENSE_LIMIT:
            raise ValidationError(
                [f"dense stiffness capped at {DENSE_LIMIT} DOFs, got {self.ndof}"])
        k = np.diag(self.stiff_diag.astype(float))
        k[0, 1:] = self.stiff_spoke
        k[1:, 0] = self.stiff_spoke
        return k

    def dense_dynamic(self) -> np.ndarray:
        """Symmetric M^{-1/2} K M^{-1/2}, whose eigenvalues are omega^2."""
        inv_sqrt = 1.0 / np.sqrt(self.masses)
        return self.dense_stiffness() * np.outer(inv_sqrt, inv_sqrt)

    def frequency_sq_bound(self) -> float:
        """Rigorous upper bound on the largest squared frequency.

        The dynamic matrix is diagonal plus a rank-2 hub coupling, so
        eigenvalues are bounded by max(diag) + ||coupling column||_2.
        """
        inv_sqrt = 1.0 / np.sqrt(self.masses)
        diag = self.stiff_diag * inv_sqrt**2
        coupling = self.stiff_spoke * inv_sqrt[0] * inv_sqrt[1:]
        return float(diag.max() + np.linalg.norm(coupling))


def build_full(ens: Ensemble) -> ArrowSystem:
    """Exact N+1 degree-of-freedom arrowhead system for an ensemble."""
    n = ens.n
    dev = np.zeros(n, dtype=bool)
    if ens.deviant_indices:
        dev[list(ens.deviant_indices)] = True

    masses = np.empty(n + 1)
    masses[0] = ens.support_mass
    masses[1:] = np.where(dev, ens.deviant.mass_scale, ens.normal.mass_scale) / n

    spring = np.where(dev, ens.k1, ens.k) / n
    diag = np.empty(n + 1)
    diag[0] = ens.support_stiffness + spring.sum()
    diag[1:] = spring

    groups = np.full(n + 1, GROUP_NORMAL, dtype=np.int64)
    groups[0] = GROUP_SUPPORT
    groups[1:][dev] = GROUP_DEVIANT
    return ArrowSystem(masses, diag, -spring, groups, meta=ens)


def collective_system(ens: Ensemble) -> ArrowSystem:
    """Three-mode system (support, normal collective, deviant collective).

    This is the large-N reduction of the full Lagrangian with the 1/N
    mass correction on the collective coordinate dropped; evolving it
    with the regular integrators realizes the reduced model, and its
    coordinate 2 moves exactly like each deviant pendulum does in the
    lock-step regime.
    """
    tau = ens.tau
    if tau == 0:
        raise ValidationError(["collective reduction needs tau >= 1"])
    masses = np.array([ens.support_mass, ens.normal.mass_scale,
                       tau * ens.deviant.mass_scale / ens.n])
    spring = np.array([ens.k, tau * ens.k1 / ens.n])
    diag = np.array([ens.support_stiffness + spring.sum(), spring[0], spring[1]])
    groups = np.array([GROUP_SUPPORT, GROUP_NORMAL, GROUP_DEVIANT], dtype=np.int64)
    return ArrowSystem(masses, diag, -spring, groups, meta=ens)


@dataclass(frozen=True)
class ReducedModel:
    """Frequency-squared entries of the 3x3 reduced dynamic matrix.

    Assembled matrix (all entries rad^2/s^2):

        [ omega_c_sq   -lam          -weak_coupling ]
        [ -lam          omega_bar_sq  0             ]
        [ -weak_coupling 0            omega_sq      ]
    """

    omega_c_sq: float
    omega_bar_sq: float
    omega_sq: float
    lam: float
    weak_coupling: float
    n: int
    tau: int

    def __post_init__(self):
        bad = [f"{name} must be > 0"
               for name in ("omega_c_sq", "omega_bar_sq", "omega_sq", "lam")
               if not getattr(self, name) > 0]
        if not self.weak_coupling > 0:
            bad.append("weak_coupling must be > 0")
        if bad:
            raise ValidationError(bad)

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.omega_c_sq, -self.lam, -self.weak_coupling],
            [-self.lam, self.omega_bar_sq, 0.0],
            [-self.weak_coupling, 0.0, self.omega_sq],
        ])


def build_reduced(ens: Ensemble) -> ReducedModel:
    """Reduced 3-mode model; the weak coupling carries the sqrt(tau) factor."""
    tau = ens.tau
    if tau == 0:
        raise ValidationError(
            ["reduced model undefined for tau = 0 (no deviant coordinate)"])
    if tau > ens.n / 2:
        raise ValidationError([f"reduced model needs tau <= n/2, got tau={tau}"])
    m, m1 = ens.normal.mass_scale, ens.deviant.mass_scale
    big_m = ens.support_mass
    k, k1 = ens.k, ens.k1
    return ReducedModel(
        omega_c_sq=(ens.support_stiffness + k + tau * k1 / ens.n) / big_m,
        omega_bar_sq=k / m,
        omega_sq=k1 / m1,
        lam=k / np.sqrt(big_m * m),
        weak_coupling=k1 * np.sqrt(tau) / np.sqrt(ens.n * big_m * m1),
        n=ens.n,
        tau=tau,
    )
