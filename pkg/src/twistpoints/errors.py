"""Exception hierarchy shared by every module."""


class TwistPointsError(Exception):
    """Base class for all library errors."""


class DimensionError(TwistPointsError, ValueError):
    """Matrix has the wrong shape (odd or mismatched dimension)."""


class ParameterError(TwistPointsError, ValueError):
    """A constructor parameter lies outside its admissible range."""


class ConstraintError(TwistPointsError, ValueError):
    """User supplied blocks violate a symplectic constraint."""


class AmbiguityError(TwistPointsError):
    """An eigenvalue sits too close to a classification boundary.

    The offending value is kept in ``value``.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class DomainError(TwistPointsError, ValueError):
    """Input outside the domain of a function (e.g. log of negative spectrum)."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class UnsupportedError(TwistPointsError, NotImplementedError):
    """Structure or family not supported by this implementation."""


class DegeneracyError(TwistPointsError):
    """A path endpoint has 1 as an eigenvalue."""


class ResolutionError(TwistPointsError):
    """A sampled path is too coarse to follow its winding unambiguously."""


class LoopError(TwistPointsError, ValueError):
    """A path that should be a loop does not return to the identity."""


class AdmissibilityError(TwistPointsError):
    """An iterate k is not admissible for the monodromy at infinity."""


class DivergenceError(TwistPointsError):
    """Numerical trajectory left the configured bounding region."""


class OrbitError(TwistPointsError, ValueError):
    """Trajectory handed to the action functional is not closed."""


class NonresonanceError(TwistPointsError):
    """I - Phi(1, s) is singular for some cap parameter s."""


class ScenarioError(TwistPointsError, ValueError):
    """Malformed or inconsistent scenario description."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
