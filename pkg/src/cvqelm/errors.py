"""Exception types shared across the package."""


class CVQELMError(Exception):
    """Base class for all package errors."""


class InvalidArgument(CVQELMError, ValueError):
    pass


class DataError(CVQELMError, ValueError):
    """Non-finite or otherwise unusable data."""


class SchemaError(DataError):
    """A required column is missing from an input file."""


class StateError(CVQELMError, ValueError):
    """A Gaussian state fails the physicality check."""


class CutoffInsufficient(CVQELMError, RuntimeError):
    """Fock truncation leaks too much probability into the last level."""

    def __init__(self, tail_mass, cutoff):
        super().__init__(
            f"tail mass {tail_mass:.3e} at cutoff {cutoff} exceeds the oracle bound"
        )
        self.tail_mass = tail_mass
        self.cutoff = cutoff
