"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto process status without a lookup table.
"""


class MaflexError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InfeasibleInput(MaflexError):
    """Input violates a geometric or algebraic precondition."""

    exit_code = 2


class Infeasible(InfeasibleInput):
    """Array limits cannot host the requested number of antennas."""


class RankDeficient(InfeasibleInput):
    """Two nulled steering vectors are (nearly) collinear at this APV."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DegenerateDirection(InfeasibleInput):
    """User coincides with the target in angle and curvature."""


class InfeasibleFactorization(InfeasibleInput):
    """More users than prime factors of N in the closed-form construction."""


class NegativeCurvature(InfeasibleInput):
    """A curvature coefficient is negative so its square root is not real."""


class IrrationalInput(InfeasibleInput):
    """A coefficient could not be rationalized within tolerance."""


class EmptyFeasibleSet(InfeasibleInput):
    """No grid point satisfies the minimum spacing for some antenna."""


class NotNulled(InfeasibleInput):
    """Sensitivity model was built on an APV that does not null every user."""


class NotFullGain(InfeasibleInput):
    """Sensitivity model was built on an APV without full gain at every user."""


class TooLarge(InfeasibleInput):
    """Exhaustive enumeration requested beyond its budget."""


class SolverFailure(MaflexError):
    """A convex solve did not reach its optimality tolerance."""

    exit_code = 3
