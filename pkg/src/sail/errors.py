"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SailError(Exception):
    """Base class for every error raised by this package."""


class MalformedDump(SailError):
    """A UI-hierarchy dump could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnresolvedTarget(SailError):
    """An element reference matched nothing on the screen."""


class SchemaError(SailError):
    """A document does not conform to its schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class PartitionError(SailError):
    """Skill ranges do not partition the steps of a test case."""

    def __init__(self, kind: str, position: int, skill: str | None = None):
        self.kind = kind
        self.position = position
        self.skill = skill
        who = f" in skill {skill!r}" if skill else ""
        super().__init__(f"{kind} at {position}{who}")


class EmptyQuerySet(SailError, ValueError):
    pass


class EmptySuite(SailError, ValueError):
    pass


class NondeterministicApp(SailError):
    """Two transition rules can fire on the same (screen, event)."""

    def __init__(self, first: int, second: int, screen: str):
        self.rules = (first, second)
        self.screen = screen
        super().__init__(f"transitions #{first} and #{second} overlap on screen {screen!r}")


class OracleMismatch(SailError):
    """An oracle references variables or screens the target app lacks."""


class ConfigError(SailError):
    pass


# Reasoner failures. These count as infrastructure errors for the planners.

class ReasonerError(SailError):
    pass


class BackendUnavailable(ReasonerError):
    pass


class UnparseableReply(ReasonerError):
    def __init__(self, raw: str, kind: str = ""):
        self.raw = raw
        self.kind = kind
        super().__init__(f"cannot parse {kind or 'reply'}: {raw!r}")


class FixtureExhausted(ReasonerError):
    pass


class ReplayMismatch(ReasonerError):
    """The replayed transcript disagrees with the request being made."""


class ProviderUnavailable(SailError):
    """The visual description provider failed."""
