"""Exception types raised across the package."""


class LossyWLError(Exception):
    """Base class for all package errors."""


class InvalidParameters(LossyWLError, ValueError):
    pass


class GenerationExhausted(LossyWLError, RuntimeError):
    pass


class NodeOutOfRange(LossyWLError, IndexError):
    pass


class ParseError(LossyWLError, ValueError):
    """Malformed graph file. ``line`` and ``field`` locate the problem when known."""

    def __init__(self, message, *, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)


class EmptyDataset(LossyWLError, ValueError):
    pass


class MissingTargets(LossyWLError, ValueError):
    pass


class EnumerationTooLarge(LossyWLError, RuntimeError):
    def __init__(self, channels, cap, states=None):
        self.channels = channels
        self.cap = cap
        self.states = states
        if states is None:
            msg = f"{channels} visible message channels exceed the enumeration cap of {cap}"
        else:
            msg = f"{channels} visible message channels need more than {states} enumeration states"
        super().__init__(msg)


class NotSimulable(LossyWLError, RuntimeError):
    """Raised when Monte Carlo is refused; ``bounds`` carries the analytic fallback."""

    def __init__(self, message, bounds=()):
        self.bounds = bounds if isinstance(bounds, tuple) else tuple(bounds)
        super().__init__(message)


class UnknownChannel(LossyWLError, KeyError):
    def __str__(self):
        return f"no message channel {self.args[0]!r} in the message passing graph"


class UnsupportedArch(LossyWLError, ValueError):
    pass
