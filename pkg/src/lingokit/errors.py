class LingoError(ValueError):
    """Base class for every error raised by lingokit."""


class DomainError(LingoError):
    """A value or parameter lies outside the domain an operation expects."""


class ArgError(LingoError):
    """A constructor or operation received an argument it cannot accept."""


class CompositionError(LingoError):
    """Lingos cannot be composed because their domains do not line up."""


class ConfigError(LingoError):
    """A lingo spec string or scenario file could not be parsed."""


class RoutingError(LingoError):
    """A message was handed to an actor it is not addressed to."""


class ProtocolError(LingoError):
    """The wrapped protocol received a message it cannot accept."""
