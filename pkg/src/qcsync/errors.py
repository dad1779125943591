"""Exception hierarchy shared by every qcsync module."""

from __future__ import annotations

from dataclasses import dataclass


class SyncError(Exception):
    """Base class for all qcsync errors."""


class RefractionOutOfRange(SyncError, ValueError):
    """Refraction index outside the open interval (1, 3/2)."""


class NonPositiveTime(SyncError, ValueError):
    pass


class DelayExceedsBudget(SyncError, ValueError):
    """Serial delays consume the whole time budget, leaving no cable."""


class InvalidGeometry(SyncError, ValueError):
    """Negative length, non-positive delay or similar malformed input."""


class NotSynchronized(SyncError):
    """Quantum and classical transit times of a link differ."""

    def __init__(self, node_id, t_quantum: int, t_classical: int):
        self.node_id = node_id
        self.t_quantum = t_quantum
        self.t_classical = t_classical
        super().__init__(
            f"link {node_id!r} is not synchronized: "
            f"quantum transit {t_quantum} ps != classical transit {t_classical} ps"
        )


class LengthUnderflow(SyncError):
    """A planned cable would have zero or negative length."""


class Infeasible(SyncError):
    """No delay selection can satisfy the requested lead."""


class PoolTooLarge(SyncError, ValueError):
    pass


class CapacityExceeded(SyncError):
    """Delay-selection instance is too large for every exact strategy."""


class UnknownNode(SyncError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


@dataclass(frozen=True)
class Location:
    """1-based position inside a scenario document."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Issue:
    pointer: str
    location: Location
    message: str

    def __str__(self) -> str:
        where = self.pointer or "/"
        return f"{self.location} ({where}): {self.message}"


class ScenarioError(SyncError):
    """Base class for scenario loading failures. Always carries locations."""

    issues: tuple[Issue, ...]

    def __str__(self) -> str:
        return "\n".join(str(issue) for issue in self.issues)


class ParseError(ScenarioError):
    """The document is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        self.issues = (Issue("", Location(line, column), message),)
        super().__init__(message)

    @property
    def location(self) -> Location:
        return self.issues[0].location


class ValidationError(ScenarioError):
    """The document is JSON but violates the scenario schema or an invariant."""

    def __init__(self, issues):
        self.issues = tuple(issues)
        super().__init__(str(self))
