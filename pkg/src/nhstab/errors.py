"""Exception hierarchy shared by all nhstab modules."""


class NHStabError(Exception):
    """Base class for every error raised by nhstab."""


class NonFiniteInput(NHStabError, ValueError):
    pass


class DimensionMismatch(NHStabError, ValueError):
    pass


class InvalidDimension(NHStabError, ValueError):
    pass


class WrongDimension(InvalidDimension):
    """Operation only defined for a specific Hilbert-space dimension."""


class NotHermitian(NHStabError, ValueError):
    pass


class TraceViolation(NHStabError, ValueError):
    pass


class SingularTrace(NHStabError, ArithmeticError):
    pass


class NotPureReference(NHStabError, ValueError):
    pass


class SingularDenominator(NHStabError, ArithmeticError):
    pass


class SingularLyapunov(NHStabError, ArithmeticError):
    """The Lyapunov operator X -> A^T X + X A is not invertible."""


class ConfigError(NHStabError):
    pass
