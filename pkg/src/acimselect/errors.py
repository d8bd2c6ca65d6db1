"""Exception hierarchy shared by all modules."""


class AcimError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AcimError, ValueError):
    """Argument lies outside the domain of a map or function."""


class RangeError(AcimError, ValueError):
    """Requested value lies outside the image of a branch."""


class ValidationError(AcimError, ValueError):
    """An object fails its structural or ordering checks."""


class ParameterError(AcimError, ValueError):
    """A scalar parameter (weight, lambda, bin count, ...) is out of range."""


class StructuralError(AcimError):
    """Internal structure is inconsistent (Markov property, tiling, ...)."""


class NonInvertibleError(AcimError):
    """A distribution function is not strictly increasing where inversion is needed."""


class ConstructionError(AcimError):
    """A selection construction could not be carried out."""


class ConvergenceError(AcimError):
    """An iterative method failed to reach its tolerance."""


class InconsistentInputsError(AcimError):
    """Inputs that must fit together (densities, partitions) do not."""


class UnsupportedError(AcimError):
    """The requested exact route does not apply to the given objects."""


class AmbiguityError(AcimError):
    """The fixed-point space of a transfer operator has dimension above one."""

    def __init__(self, message, basis=()):
        super().__init__(message)
        self.basis = list(basis)


class UnknownExampleError(AcimError, KeyError):
    """Lookup of an unregistered built-in id."""
