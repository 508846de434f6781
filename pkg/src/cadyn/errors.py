"""Exception types shared across the package."""


class CadynError(Exception):
    """Base class for all errors raised by cadyn."""


class CapacityError(CadynError):
    """A computation would exceed a configured enumeration or state budget."""


class ConfigError(CadynError, ValueError):
    """Malformed rule, measure, SFT or experiment description."""


class ReducibleError(CadynError, ValueError):
    """An operation that needs an irreducible SFT received a reducible one."""


class ConvergenceError(CadynError):
    """Power iteration did not reach the requested tolerance."""


class ZeroMeasureError(CadynError, ValueError):
    """Conditioning on an event of measure zero."""
