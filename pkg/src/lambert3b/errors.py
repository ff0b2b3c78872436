"""Exception and warning types raised across the package."""


class Lambert3BError(Exception):
    """Base class for all package errors."""


class DomainError(Lambert3BError, ValueError):
    """Argument outside the real domain of the requested Lambert W branch."""


class ConvergenceError(Lambert3BError, ArithmeticError):
    """Iteration did not reach its tolerance within the iteration cap."""


class SolvabilityError(Lambert3BError, ValueError):
    """Scenario violates a precondition of the closed-form method (e.g. B <= 0)."""


class ScenarioError(Lambert3BError, ValueError):
    """Scenario or integrator configuration is malformed."""


class ApproximationBreakdown(Lambert3BError, ArithmeticError):
    """A closed-form expression produced a nonphysical value (e.g. a radius <= 0)."""


class SingularityError(Lambert3BError, ArithmeticError):
    """A denominator vanished (geometric degeneracy)."""


class DegenerateOrbitError(Lambert3BError, ValueError):
    """Orbit constants are undefined for the given state (e.g. zero angular momentum)."""


class DegenerateError(Lambert3BError, ArithmeticError):
    """The third-body angle equation is indeterminate (f1 = f2 = 0)."""


class CollisionError(Lambert3BError, RuntimeError):
    """Two bodies came closer than the configured minimum separation."""


class StepLimitError(Lambert3BError, RuntimeError):
    """The integrator exceeded its step budget."""


class BranchJumpWarning(UserWarning):
    """Continuity tracking switched the arccos branch of the third-body angle."""


class EmptyWindowWarning(UserWarning):
    """No comparison sample lies inside the validity window."""


class SmallMassRatioWarning(UserWarning):
    """The third mass is not negligible compared with the primaries."""
