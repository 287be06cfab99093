"""Exception taxonomy.

Every error carries its identifying fields so two errors raised by different
code paths (engine vs. oracle) can be compared for equality.
"""

from __future__ import annotations

from typing import Any


class MetaMetricsError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, *fields: Any) -> None:
        super().__init__(message)
        self.fields = fields

    @property
    def kind(self) -> str:
        return type(self).__name__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetaMetricsError):
            return NotImplemented
        return type(self) is type(other) and self.fields == other.fields

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.fields))


class DataError(MetaMetricsError):
    """Invalid input data (maps to CLI exit code 3)."""


class EmptyInput(DataError):
    def __init__(self) -> None:
        super().__init__("EmptyInput: no revision records")


class DuplicateRevision(DataError):
    def __init__(self, artifact: str, revision: int, line: int | None = None) -> None:
        where = f" (line {line})" if line is not None else ""
        super().__init__(
            f"DuplicateRevision: artifact {artifact!r} has revision {revision} more than once{where}",
            artifact,
            revision,
        )
        self.artifact = artifact
        self.revision = revision
        self.line = line


class GapInHistory(DataError):
    def __init__(self, artifact: str, missing: int) -> None:
        super().__init__(
            f"GapInHistory: artifact {artifact!r} is missing revision {missing}",
            artifact,
            missing,
        )
        self.artifact = artifact
        self.missing = missing


class ParseError(DataError):
    def __init__(self, line: int, cause: str) -> None:
        super().__init__(f"ParseError: line {line}: {cause}", line)
        self.line = line
        self.cause = cause


class SchemaViolation(DataError):
    def __init__(self, line: int, field: str, detail: str = "") -> None:
        msg = f"SchemaViolation: line {line}: field {field!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg, line, field)
        self.line = line
        self.field = field


class ValidationErrors(DataError):
    """Several data errors collected in one pass."""

    def __init__(self, errors: list[DataError]) -> None:
        super().__init__(
            f"{len(errors)} validation error(s)", *(e.kind for e in errors)
        )
        self.errors = errors


class InvalidConfig(DataError):
    def __init__(self, field: str, detail: str = "") -> None:
        msg = f"InvalidConfig: field {field!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg, field)
        self.field = field


class PolicyError(DataError):
    def __init__(self, detail: str) -> None:
        super().__init__(f"PolicyError: {detail}", detail)


class EmptyPolicy(PolicyError):
    def __init__(self, detail: str = "policy defines no gates") -> None:
        super().__init__(detail)


class UsageError(MetaMetricsError):
    """Caller passed arguments outside an operation's domain (CLI exit code 2)."""


class OutOfRange(UsageError):
    def __init__(self, n: int, total: int) -> None:
        super().__init__(
            f"OutOfRange: revision {n} outside 1..{total} (history has N = {total})",
            n,
            total,
        )
        self.n = n
        self.total = total


class InvalidGateOrder(UsageError):
    def __init__(self, n1: int, n2: int) -> None:
        super().__init__(f"InvalidGateOrder: gates ({n1}, {n2}) out of order", n1, n2)
        self.n1 = n1
        self.n2 = n2


class NoArtifacts(UsageError):
    def __init__(self) -> None:
        super().__init__("NoArtifacts: nothing to render")


class NoSelectors(UsageError):
    def __init__(self) -> None:
        super().__init__("NoSelectors: at least one metric selector is required")


class UnknownSelector(UsageError):
    def __init__(self, selector: str) -> None:
        super().__init__(f"UnknownSelector: {selector!r}", selector)
        self.selector = selector


class UndefinedMetric(MetaMetricsError):
    """A metric whose formula has no value for the given history (a partial function)."""


class UndefinedMTBTF(UndefinedMetric):
    def __init__(self, n: int) -> None:
        super().__init__(f"UndefinedMTBTF: no fail->pass transition within 1..{n}", n)
        self.n = n


class NoSuccessfulRevisions(UndefinedMetric):
    def __init__(self, n: int) -> None:
        super().__init__(f"NoSuccessfulRevisions: no passing revision within 1..{n}", n)
        self.n = n


class MissingIndicator(UndefinedMetric):
    def __init__(self, indicator: str, revisions: list[int]) -> None:
        shown = ", ".join(map(str, revisions[:10]))
        if len(revisions) > 10:
            shown += f", ... ({len(revisions)} total)"
        super().__init__(
            f"MissingIndicator: {indicator} absent at revision(s) {shown}",
            indicator,
            tuple(revisions),
        )
        self.indicator = indicator
        self.revisions = list(revisions)


class MissingSituation(UndefinedMetric):
    def __init__(self, situation: str, revisions: list[int]) -> None:
        shown = ", ".join(map(str, revisions[:10]))
        if len(revisions) > 10:
            shown += f", ... ({len(revisions)} total)"
        super().__init__(
            f"MissingSituation: situation {situation!r} absent at revision(s) {shown}",
            situation,
            tuple(revisions),
        )
        self.situation = situation
        self.revisions = list(revisions)
