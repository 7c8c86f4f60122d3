"""Exception hierarchy shared by all smlab modules."""


class SMLabError(Exception):
    """Base class for every error raised by smlab."""


class ParameterError(SMLabError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(SMLabError, ValueError):
    """A multiplier was evaluated outside (0, inf)."""


class TailTruncation(SMLabError):
    """Samples do not decay at the ends of the grid."""


class GridCoverage(SMLabError):
    """A window does not fit inside the available grid."""


class PartitionConstruction(SMLabError):
    """A partition of unity could not be built to tolerance."""


class SpectrumError(SMLabError, ValueError):
    """An operator model has spectrum outside (0, inf)."""


class CertificateError(SMLabError):
    """A resolvent sample hit the spectrum."""


class UnsupportedStructure(SMLabError):
    """The requested engine cannot handle this operator structure."""


class SmoothnessError(SMLabError):
    """The multiplier is not smooth enough at a Jordan eigenvalue."""


class PreconditionError(SMLabError):
    """An engine precondition (decay, holomorphy, support) fails."""


class QuadratureError(SMLabError):
    """Estimated quadrature error is above tolerance."""


class ConfigError(SMLabError):
    """Invalid experiment or CLI configuration."""
