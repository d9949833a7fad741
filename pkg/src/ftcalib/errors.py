"""Exception hierarchy for the calibration toolkit.

Every estimator failure derives from :class:`CalibrationError` so callers
(the CLI, the Monte-Carlo harness) can catch one type and still report the
specific failure by class name.
"""


class CalibrationError(Exception):
    """Base class for all estimator and numerical failures."""


class PreconditionError(CalibrationError, ValueError):
    """Input violates a documented precondition (too few samples, zero gravity...)."""


class DegenerateInput(CalibrationError):
    """Projection onto SO(3) is not unique for the given matrix."""


class SingularRotation(CalibrationError):
    """Rotation angle too close to pi for the Cayley parameterization."""


class RankDeficient(CalibrationError):
    """A regressor matrix is (numerically) column rank deficient."""

    def __init__(self, message, condition_estimate=float("inf")):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NoTLSSolution(CalibrationError):
    """The total least-squares problem has no finite solution."""


class AmbiguousNullspace(CalibrationError):
    """The numerical nullspace is not one-dimensional."""


class AmbiguousEigenvalue(CalibrationError):
    """No unique eigenvalue is closest to one."""


class NonPositiveMass(CalibrationError):
    """Recovered payload scale is not positive."""


class NonConvergence(CalibrationError):
    """Iterative estimator did not meet its tolerance.

    The last iterate is attached as ``estimate`` so it is never lost.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ParseError(CalibrationError, ValueError):
    """A dataset file could not be parsed."""


class InvalidOrientation(CalibrationError, ValueError):
    """A dataset orientation block is not a rotation matrix."""

    def __init__(self, message, sample_index=None, deviation=None):
        super().__init__(message)
        self.sample_index = sample_index
        self.deviation = deviation
