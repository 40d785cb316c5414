"""Exception hierarchy shared by all modules."""


class SignoriniError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SignoriniError, ValueError):
    """A numeric parameter is outside its family's validity range."""

    def __init__(self, message, name=None):
        super().__init__(message)
        self.name = name


class CatalogError(SignoriniError, KeyError):
    """Unknown catalog identifier (N-function family or boundary data)."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DomainError(SignoriniError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class EvaluationError(SignoriniError, ArithmeticError):
    """A function evaluation produced an unusable value (e.g. g(t) == 0)."""


class ShapeError(SignoriniError, ValueError):
    """Array sizes do not match the mesh they are attached to."""


class ResolutionError(SignoriniError, ValueError):
    """Requested mesh size is incompatible with the domain."""


class ParityError(SignoriniError, ValueError):
    """Odd reflection requested for a field that does not vanish on the interface."""


class ConstraintError(SignoriniError, ValueError):
    """Boundary data or obstacle violate the admissibility requirements."""


class UnsupportedOrderError(SignoriniError, NotImplementedError):
    """Nodal-set order that piecewise-linear fields cannot represent."""


class InputError(SignoriniError, ValueError):
    """Malformed input to a verifier."""


class ConfigError(SignoriniError, ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
