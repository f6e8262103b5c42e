"""Exception hierarchy shared by every orthosim module."""


class OrthosimError(Exception):
    """Base class for all library errors."""


class LinearDependence(OrthosimError, ValueError):
    pass


class DimensionMismatch(OrthosimError, ValueError):
    pass


class IndexOutOfRange(OrthosimError, IndexError):
    pass


class EmptySubset(OrthosimError, ValueError):
    pass


class InvalidDensityMatrix(OrthosimError, ValueError):
    pass


class WrongDimension(OrthosimError, ValueError):
    pass


class ProbabilityNotNormalized(OrthosimError, ValueError):
    pass


class TooLarge(OrthosimError, ValueError):
    """Raised when a request exceeds the dense-matrix size cap."""


class UnknownParticle(OrthosimError, KeyError):
    pass


class LengthMismatch(OrthosimError, ValueError):
    pass


class ConfigInvalid(OrthosimError, ValueError):
    pass


class OddDecoyCount(OrthosimError, ValueError):
    pass


class UnpairedDecoy(OrthosimError, ValueError):
    pass


class NotInTransit(OrthosimError, RuntimeError):
    """An attack tried to touch a particle that is not in the channel."""


class NonUnitaryProbe(OrthosimError, ValueError):
    pass


class WrongQubitCount(OrthosimError, ValueError):
    pass


class ZeroQubits(OrthosimError, ZeroDivisionError):
    pass


class ZeroDenominator(OrthosimError, ZeroDivisionError):
    pass
