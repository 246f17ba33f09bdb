"""Mode analysis and inverse resonance design for the reduced model.

The support and the normal-collective coordinate form a strongly
coupled 2x2 block; diagonalizing it leaves each mixed mode weakly
coupled (entries of order 1/sqrt(N)) to the deviant coordinate. The
design problem runs backwards: choose the support stiffness K so that
one mixed-mode frequency lands exactly on the deviant frequency, which
turns the pair into a resonant two-level system with a beat period of
O(sqrt(N/tau)) deviant cycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble, ReducedModel, build_reduced
from .errors import (DegenerateDeviation, InfeasibleDesign, OffResonance,
                     PhysicsError, ValidationError)

UPPER, LOWER = "upper", "lower"

# Matched-eigenvalue residual accepted from the closed-form solve, as a
# fraction of omega^2. Anything above this means the algebra went wrong.
DESIGN_TOLERANCE = 1e-9


def block_modes(model: ReducedModel) -> tuple[float, float]:
    """Eigenvalues (omega1_sq >= omega2_sq) of the strongly coupled block.

    omega_{1,2}^2 = [wc^2 + wbar^2 +- sqrt((wc^2 - wbar^2)^2 + 4 lam^2)] / 2
    """
    s = model.omega_c_sq + model.omega_bar_sq
    d = model.omega_c_sq - model.omega_bar_sq
    root = np.hypot(d, 2.0 * model.lam)
    return 0.5 * (s + root), 0.5 * (s - root)


@dataclass(frozen=True)
class RotatedModel:
    """Reduced model in the basis that diagonalizes the (1,2) block.

    alpha and beta are the order-1 couplings of the two mixed modes to
    the deviant coordinate; the actual matrix entries are -alpha/sqrt(N)
    and -beta/sqrt(N). ``rotation`` holds the 2x2 orthogonal change of
    basis (columns = mixed modes, descending frequency, gauge-fixed so
    both couplings are >= 0).
    """

    omega1_sq: float
    omega2_sq: float
    alpha: float
    beta: float
    omega_sq: float
    n: int
    tau: int
    rotation: np.ndarray = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.omega1_sq < self.omega2_sq:
            raise ValidationError(["omega1_sq must be >= omega2_sq"])

    def reassemble(self) -> np.ndarray:
        """Undo the block rotation; reproduces the reduced matrix."""
        w = np.sqrt(self.n)
        tilde = np.array([
            [self.omega1_sq, 0.0, -self.alpha / w],
            [0.0, self.omega2_sq, -self.beta / w],
            [-self.alpha / w, -self.beta / w, self.omega_sq],
        ])
        g = np.eye(3)
        g[:2, :2] = self.rotation
        return g @ tilde @ g.T


def rotate(model: ReducedModel) -> RotatedModel:
    """Diagonalize the (1,2) block and rotate the weak coupling with it.

    The coupling column has norm weak_coupling, carried entirely by the
    support coordinate; an orthogonal rotation preserves it, so
    alpha^2 + beta^2 = N * weak_coupling^2 identically.
    """
    block = np.array([[model.omega_c_sq, -model.lam],
                      [-model.lam, model.omega_bar_sq]])
    vals, vecs = np.linalg.eigh(block)
    vals, vecs = vals[::-1], vecs[:, ::-1]          # descending
    vecs = vecs * np.where(vecs[0] < 0, -1.0, 1.0)  # couplings >= 0
    root_n = np.sqrt(model.n)
    return RotatedModel(
        omega1_sq=float(vals[0]),
        omega2_sq=float(vals[1]),
        alpha=float(root_n * model.weak_coupling * vecs[0, 0]),
        beta=float(root_n * model.weak_coupling * vecs[0, 1]),
        omega_sq=model.omega_sq,
        n=model.n,
        tau=model.tau,
        rotation=vecs,
    )


def solve_support_stiffness(omega_sq: float, omega_bar_sq: float, lam: float,
                            support_mass: float, spring_load: float,
                            gap_min: float = 0.0) -> tuple[float, float]:
    """Solve the resonance condition for (omega_c^2, K).

    The matched block eigenvalue equals omega^2 exactly when
    (omega^2 - omega_c^2)(omega^2 - omega_bar^2) = lam^2, hence
    omega_c^2 = omega^2 - lam^2/(omega^2 - omega_bar^2) and
    K = M*omega_c^2 - spring_load, with spring_load = k + tau*k1/N.
    """
    gap = omega_sq - omega_bar_sq
    if abs(gap) <= gap_min or gap == 0.0:
        raise DegenerateDeviation(
            f"deviant gap |omega^2 - omega_bar^2| = {abs(gap):.3g} is within "
            f"gap_min = {gap_min:.3g}; resonance condition unsatisfiable")
    omega_c_sq = omega_sq - lam * lam / gap
    return omega_c_sq, support_mass * omega_c_sq - spring_load


@dataclass(frozen=True)
class ResonanceDesign:
    """Support parameters that put one mixed mode on the deviant frequency."""

    support_mass: float
    support_stiffness: float
    branch: str
    detuning: float
    meta: Ensemble = field(compare=False, default=None)

    @property
    def support_length(self) -> float:
        """L recovered from K = (M + m/N) g / L."""
        ens = self.meta
        return (self.support_mass + ens.normal.mass_scale / ens.n) \
            * ens.gravity / self.support_stiffness

    def apply(self) -> Ensemble:
        """The ensemble re-hung from the designed support."""
        return self.meta.with_support(self.support_mass, self.support_length)


def design_support(ens: Ensemble, support_mass: float | None = None,
                   branch: str = "auto",
                   gap_min: float | None = None) -> ResonanceDesign:
    """Choose the support stiffness that satisfies the resonance condition.

    The support mass is a free knob fixed by the caller (defaults to the
    ensemble's current one); the stiffness, equivalently the length, is
    solved. A shorter deviant sits above the collective band so only the
    upper mixed mode can match it (and vice versa); requesting the other
    branch raises InfeasibleDesign.

    gap_min defaults to 10x the weak coupling: below that the two-level
    picture collapses and no support tuning produces a resonant beat.
    """
    if ens.tau < 1:
        raise ValidationError(["resonance design needs tau >= 1"])
    big_m = ens.support_mass if support_mass is None else support_mass
    if not big_m > 0:
        raise ValidationError([f"support mass must be > 0, got {big_m}"])

    k, k1 = ens.k, ens.k1
    omega_sq, omega_bar_sq = ens.omega_sq, ens.omega_bar_sq
    lam = k / np.sqrt(big_m * ens.normal.mass_scale)
    weak = k1 * np.sqrt(ens.tau / (ens.n * big_m * ens.deviant.mass_scale))
    if gap_min is None:
        gap_min = 10.0 * weak

    load = k + ens.tau * k1 / ens.n
    _, stiff = solve_support_stiffness(
        omega_sq, omega_bar_sq, lam, big_m, load, gap_min=gap_min)
    if stiff <= 0:
        raise InfeasibleDesign(
            f"solved support stiffness K = {stiff:.3g} <= 0; increase the "
            "support mass or the length deviation")

    feasible = UPPER if omega_sq > omega_bar_sq else LOWER
    if branch not in ("auto", feasible):
        raise InfeasibleDesign(
            f"only the {feasible} branch can match this deviant "
            f"(omega^2 {'>' if feasible == UPPER else '<'} omega_bar^2)")

    design = ResonanceDesign(big_m, stiff, feasible, 0.0, meta=ens)
    w1, w2 = block_modes(build_reduced(design.apply()))
    matched = w1 if feasible == UPPER else w2
    detuning = abs(matched - omega_sq)
    if detuning > DESIGN_TOLERANCE * omega_sq:
        raise PhysicsError(
            f"designed mode misses omega^2 by {detuning:.3g} (> "
            f"{DESIGN_TOLERANCE:.0e} relative); inputs are ill-conditioned")
    return ResonanceDesign(big_m, stiff, feasible, detuning, meta=ens)


def matched_branch(rot: RotatedModel) -> str:
    """Which mixed mode lies closer to the deviant frequency."""
    return UPPER if abs(rot.omega1_sq - rot.omega_sq) \
        <= abs(rot.omega2_sq - rot.omega_sq) else LOWER


def predict_transfer_cycles(rot: RotatedModel, n: int, tau: int) -> float:
    """Two-level estimate of the first full energy transfer, in deviant cycles.

    With matched coupling c = beta_matched*sqrt(tau/n), the avoided
    crossing splits the frequencies by c/omega; a full transfer takes
    pi/(c/omega), i.e. omega^2*sqrt(n/tau)/(2*beta_matched) cycles.
    beta_matched is the single-deviant-normalized coupling, so pass a
    rotation built from a tau=1 reduction; multiplicity enters via tau.
    """
    if matched_branch(rot) == UPPER:
        beta_m, detuning = rot.alpha, abs(rot.omega1_sq - rot.omega_sq)
    else:
        beta_m, detuning = rot.beta, abs(rot.omega2_sq - rot.omega_sq)
    coupling = beta_m * np.sqrt(tau / n)
    if coupling <= 0 or detuning > 0.5 * coupling:
        raise OffResonance(
            f"matched mode detuned by {detuning:.3g} against coupling "
            f"{coupling:.3g}; transfer-time estimate invalid")
    return float(rot.omega_sq * np.sqrt(n / tau) / (2.0 * beta_m))
