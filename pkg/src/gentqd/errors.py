"""Exception hierarchy shared by the simulator and the command line."""


class GentqdError(Exception):
    """Base class for all package errors."""


class StructuralError(GentqdError, ValueError):
    """Operands with incompatible shapes or malformed inputs."""


class NumericalIntegrityError(GentqdError, ArithmeticError):
    """A computed quantity left its physically admissible range."""


class IntegratorError(NumericalIntegrityError):
    """Time stepping produced an unphysical state (e.g. negative populations)."""


class DivergenceError(NumericalIntegrityError):
    """The mixing angle reached pi/2, where the Rabi frequency diverges."""


class DegeneracyError(NumericalIntegrityError):
    """Two instantaneous eigenvalues are closer than the tracking threshold."""


class TrackingError(NumericalIntegrityError):
    """Adjacent eigenframes could not be matched unambiguously."""


class BracketError(NumericalIntegrityError):
    """A root bracket does not contain a sign change."""


class ConfigError(GentqdError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
