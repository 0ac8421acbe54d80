"""Exception hierarchy for the alphaeta toolkit."""


class AlphaEtaError(ValueError):
    """Base class for every error raised by this package."""


class InvalidParameterError(AlphaEtaError):
    pass


class InvalidTapsError(AlphaEtaError):
    pass


class DegenerateSeedError(AlphaEtaError):
    """All-zero LFSR seed; the register would stay at zero forever."""


class InfeasibleSizeError(AlphaEtaError):
    """An exhaustive enumeration would exceed the configured budget."""


class NeedsMoreDataError(AlphaEtaError):
    """Not enough known keystream to pin down the LFSR seed."""


class ConfigError(AlphaEtaError):
    pass
