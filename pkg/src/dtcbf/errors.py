"""Exception types shared across the library."""


class DtcbfError(Exception):
    """Base class for all library errors."""


class ParamError(DtcbfError, ValueError):
    """Config file failed to parse or a parameter invariant is violated."""


class ConfigError(DtcbfError, ValueError):
    """A constructed object's hypotheses do not hold for the given parameters."""


class DomainError(DtcbfError, ValueError):
    """An operation was called outside its mathematical domain."""


class HorizonError(DtcbfError, RuntimeError):
    """A rollout failed to settle within its step budget."""


class PreconditionError(DtcbfError, ValueError):
    """A caller obligation (e.g. starting from a safe state) was violated."""


class TheoremViolation(DtcbfError, RuntimeError):
    """A certified maneuver failed its own constraint; indicates a bug, never
    returned as a normal result."""


class ProtocolError(DtcbfError, RuntimeError):
    """Episodic protocol misuse, e.g. stepping a finished environment."""
