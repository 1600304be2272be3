"""Exception types shared across the package."""


class BitquorumError(Exception):
    """Base class for package errors."""


class InputError(BitquorumError, ValueError):
    """Caller supplied an argument outside an operation's contract."""


class FormatError(BitquorumError, ValueError):
    """Serialized or encoded data is structurally invalid."""


class ResourceError(BitquorumError, RuntimeError):
    """An operation would exceed its configured memory or size budget."""


class CorrectnessError(BitquorumError, RuntimeError):
    """An algorithm produced output that disagrees with the reference result."""


class NoCoveringCircuit(BitquorumError, LookupError):
    """No stored circuit can be padded to answer the requested query."""
