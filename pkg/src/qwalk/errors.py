"""Exception and warning types raised by the simulators."""


class QWalkError(Exception):
    """Base class for all package errors."""


class TruncationError(QWalkError):
    """Fock-space truncation is too small for the requested state or evolution."""


class CompilationError(QWalkError):
    """A pulse sequence does not reproduce its target unitary."""


class FitError(QWalkError):
    """Dephasing estimation could not be carried out on the given data."""


class DegenerateOutcome(QWalkError):
    """A measurement outcome has (numerically) zero probability."""


class TruncationWarning(UserWarning):
    """Results may be unreliable because the state reaches the truncation edge."""
