"""Exception hierarchy shared across the simulator."""


class KeyGuardError(Exception):
    """Base class for all simulator errors."""


class NoKeyAtPoint(KeyGuardError):
    pass


class UnknownField(KeyGuardError, KeyError):
    pass


class SeqNotFound(KeyGuardError, LookupError):
    pass


class DuplicateHookId(KeyGuardError):
    pass


class ReplaceAlreadySet(KeyGuardError):
    pass


class RegistryBusy(KeyGuardError):
    """Raised when the hook registry is mutated during a dispatch."""


class ChannelMismatch(KeyGuardError):
    pass


class EmptyKey(KeyGuardError, ValueError):
    pass


class KeyTooLong(KeyGuardError, ValueError):
    pass


class NotPrintable(KeyGuardError, ValueError):
    pass


class DesyncDetected(KeyGuardError):
    """The decrypted display character does not match the recorded plaintext."""


class RunMismatch(KeyGuardError):
    pass


class TraceMismatch(KeyGuardError):
    pass


class TraceTooShort(KeyGuardError):
    pass


class ScenarioError(KeyGuardError):
    """Scenario file failed to parse or validate."""
