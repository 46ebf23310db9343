"""Exception hierarchy shared by all modules."""


class NlMaxwellError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(NlMaxwellError, ValueError):
    """Array sizes, location types or run layouts do not fit together."""


class ParameterError(NlMaxwellError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ConfigurationError(NlMaxwellError, ValueError):
    """Solver configuration or initial data violates a precondition.

    ``errors`` lists every problem found when more than one was collected.
    """

    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = list(errors) if errors else [message]


class SolverError(NlMaxwellError, RuntimeError):
    """Base class for failures raised while integrating."""


class DegeneracyError(SolverError):
    """The product graph sigma(s)*s cannot be inverted.

    This is the regime where sigma vanishes on an interval: with the
    displacement current dropped the electric field is not determined by the
    magnetic field and uniqueness is lost.
    """


class ConvergenceError(SolverError):
    """A scalar root finder hit its iteration cap."""


class StiffnessError(SolverError):
    """The adaptive time step collapsed below the underflow guard."""


class UnsupportedShapeError(NlMaxwellError, ValueError):
    """The requested operation does not support this conductivity shape."""
