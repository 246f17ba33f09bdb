"""Exception hierarchy for pendsearch.

Three families, matching the CLI exit codes: input/validation problems
(exit 2), physics or protocol failures (exit 3), and inconclusive
observations (exit 4).
"""


class PendsearchError(Exception):
    """Base class for all package errors."""


# --- validation (exit 2) ---------------------------------------------------

class ValidationError(PendsearchError):
    """One or more invariants violated; ``violations`` lists all of them."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(PendsearchError):
    """Scenario file could not be parsed; message carries diagnostics."""


# --- physics / protocol (exit 3) -------------------------------------------

class PhysicsError(PendsearchError):
    """Base class for physics and protocol failures."""


class DegenerateDeviation(PhysicsError):
    """Deviant frequency too close to the collective one: no support
    tuning can satisfy the resonance condition."""


class InfeasibleDesign(PhysicsError):
    """Resonance equation solvable only with non-positive support stiffness."""


class OffResonance(PhysicsError):
    """Transfer-time estimate requested for a model whose matched mode is
    detuned by more than the weak coupling."""


class UnstableTimestep(PhysicsError):
    """Requested leapfrog step exceeds the stability/accuracy bound."""


class EigenFailure(PhysicsError):
    """Eigendecomposition of the system matrix did not converge."""


class Inconsistent(PhysicsError):
    """Identification verdicts imply that no subset holds a deviant."""


class SameIndex(PhysicsError):
    """Energy routing requested with source == destination."""


class DegenerateFit(PhysicsError):
    """Power-law fit requested on data with no spread in the abscissa."""


# --- inconclusive observation (exit 4) --------------------------------------

class ObservationError(PendsearchError):
    """Base class for inconclusive finite-precision observations."""


class NoBeatDetected(ObservationError):
    """Amplitude envelope varies by less than two resolution quanta."""


class InsufficientSpan(ObservationError):
    """Observation budget too short to cover 1.5 envelope periods."""
