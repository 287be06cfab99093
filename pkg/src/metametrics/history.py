"""Revision-history domain types.

Histories are linear, 1-based and dense: an artifact with N revisions has
exactly the records 1, 2, ..., N. Real VCS revision ids are remapped at
ingestion time.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType

from metametrics.errors import (
    DuplicateRevision,
    EmptyInput,
    GapInHistory,
    OutOfRange,
)

# Indicators that can be normalized by sloc in Q4.
SLOC_NORMALIZED = ("misra_warnings", "mccabe", "uncovered")


class TestOutcome(str, Enum):
    PASS = "pass"
    FAIL = "fail"

    __test__ = False  # keep pytest from collecting this as a test class

    @property
    def res(self) -> int:
        return 1 if self is TestOutcome.PASS else 0

    @classmethod
    def from_res(cls, res: int) -> TestOutcome:
        return cls.PASS if res else cls.FAIL


def _check_artifact_id(artifact: object) -> None:
    if not isinstance(artifact, str) or not artifact.strip():
        raise ValueError(f"artifact id must be non-empty text, got {artifact!r}")


def _check_count(name: str, value: int | None, minimum: int) -> None:
    if value is None:
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")


def _check_seconds(name: str, value: float) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite number >= 0, got {value}")


@dataclass(frozen=True)
class IndicatorSample:
    """Indicator measurements for one revision; every field is optional."""

    sloc: int | None = None
    misra_warnings: int | None = None
    mccabe: int | None = None
    uncovered: int | None = None
    duration: float | None = None
    acting: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_count("sloc", self.sloc, 1)
        _check_count("misra_warnings", self.misra_warnings, 0)
        _check_count("mccabe", self.mccabe, 1)
        _check_count("uncovered", self.uncovered, 0)
        if self.duration is not None:
            _check_seconds("duration", self.duration)
        for situation, t in self.acting.items():
            if not isinstance(situation, str) or not situation:
                raise ValueError(f"situation id must be non-empty text, got {situation!r}")
            _check_seconds(f"acting[{situation}]", t)
        object.__setattr__(self, "acting", MappingProxyType(dict(self.acting)))

    def get(self, indicator: str) -> int | float | None:
        """Look up a scalar indicator by name."""
        if indicator not in ("sloc", "duration") + SLOC_NORMALIZED:
            raise KeyError(indicator)
        return getattr(self, indicator)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndicatorSample):
            return NotImplemented
        return (
            self.sloc == other.sloc
            and self.misra_warnings == other.misra_warnings
            and self.mccabe == other.mccabe
            and self.uncovered == other.uncovered
            and self.duration == other.duration
            and dict(self.acting) == dict(other.acting)
        )

    __hash__ = None  # type: ignore[assignment]


EMPTY_INDICATORS = IndicatorSample()


@dataclass(frozen=True)
class RevisionRecord:
    artifact: str
    revision: int
    outcome: TestOutcome
    indicators: IndicatorSample = EMPTY_INDICATORS

    def __post_init__(self) -> None:
        _check_artifact_id(self.artifact)
        _check_count("revision", self.revision, 1)
        if not isinstance(self.outcome, TestOutcome):
            object.__setattr__(self, "outcome", TestOutcome(self.outcome))

    @property
    def res(self) -> int:
        return self.outcome.res

    @property
    def passed(self) -> bool:
        return self.outcome is TestOutcome.PASS


@dataclass(frozen=True, eq=False)
class ArtifactHistory:
    """Dense, ordered revision sequence 1..N of a single artifact."""

    artifact: str
    records: tuple[RevisionRecord, ...]

    def __post_init__(self) -> None:
        _check_artifact_id(self.artifact)
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        if not records:
            raise EmptyInput()
        for k, rec in enumerate(records):
            if rec.artifact != self.artifact:
                raise ValueError(
                    f"record for {rec.artifact!r} placed in history of {self.artifact!r}"
                )
            if rec.revision != k + 1:
                if rec.revision <= k:
                    raise DuplicateRevision(self.artifact, rec.revision)
                raise GapInHistory(self.artifact, k + 1)

    @property
    def n(self) -> int:
        return len(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, revision: int) -> RevisionRecord:
        """Record at 1-based revision index."""
        if not 1 <= revision <= self.n:
            raise OutOfRange(revision, self.n)
        return self.records[revision - 1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArtifactHistory):
            return NotImplemented
        return self.artifact == other.artifact and self.records == other.records

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def outcomes(self) -> tuple[int, ...]:
        """The res sequence, res[k] for revision k + 1."""
        return tuple(rec.res for rec in self.records)

    def prefix(self, n: int) -> ArtifactHistory:
        return prefix(self, n)


def prefix(h: ArtifactHistory, n: int) -> ArtifactHistory:
    """Sub-history of revisions 1..n."""
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= h.n:
        raise OutOfRange(n, h.n)
    if n == h.n:
        return h
    return ArtifactHistory(h.artifact, h.records[:n])


class HistorySet(Mapping[str, ArtifactHistory]):
    """Immutable map artifact id -> history, iterated in lexicographic order."""

    __slots__ = ("_histories",)

    def __init__(self, histories: Iterable[ArtifactHistory] | Mapping[str, ArtifactHistory] = ()) -> None:
        if isinstance(histories, Mapping):
            items = list(histories.items())
            for key, h in items:
                if key != h.artifact:
                    raise ValueError(f"key {key!r} does not match history artifact {h.artifact!r}")
            values = [h for _, h in items]
        else:
            values = list(histories)
        table: dict[str, ArtifactHistory] = {}
        for h in sorted(values, key=lambda h: h.artifact):
            if h.artifact in table:
                raise ValueError(f"artifact {h.artifact!r} appears twice")
            table[h.artifact] = h
        self._histories = table

    def __getitem__(self, artifact: str) -> ArtifactHistory:
        return self._histories[artifact]

    def __iter__(self) -> Iterator[str]:
        return iter(self._histories)

    def __len__(self) -> int:
        return len(self._histories)

    def __repr__(self) -> str:
        inner = ", ".join(f"{a!r}: N={h.n}" for a, h in self._histories.items())
        return f"HistorySet({{{inner}}})"

    def records(self) -> Iterator[RevisionRecord]:
        for h in self._histories.values():
            yield from h.records


def build_history(records: Iterable[RevisionRecord]) -> HistorySet:
    """Group unordered records per artifact and validate density.

    Raises EmptyInput, DuplicateRevision or GapInHistory (lowest missing
    revision first).
    """
    grouped: dict[str, dict[int, RevisionRecord]] = {}
    for rec in records:
        per_artifact = grouped.setdefault(rec.artifact, {})
        if rec.revision in per_artifact:
            raise DuplicateRevision(rec.artifact, rec.revision)
        per_artifact[rec.revision] = rec
    if not grouped:
        raise EmptyInput()

    histories = []
    for artifact in sorted(grouped):
        by_rev = grouped[artifact]
        n = max(by_rev)
        for i in range(1, n + 1):
            if i not in by_rev:
                raise GapInHistory(artifact, i)
        histories.append(ArtifactHistory(artifact, tuple(by_rev[i] for i in range(1, n + 1))))
    return HistorySet(histories)


def history_from_outcomes(
    artifact: str,
    outcomes: Iterable[int | bool | TestOutcome],
    indicators: Iterable[IndicatorSample] | None = None,
) -> ArtifactHistory:
    """Convenience constructor from a res sequence such as ``[0, 1, 1]``."""
    outs = [o if isinstance(o, TestOutcome) else TestOutcome.from_res(int(o)) for o in outcomes]
    inds = list(indicators) if indicators is not None else [EMPTY_INDICATORS] * len(outs)
    if len(inds) != len(outs):
        raise ValueError("outcomes and indicators differ in length")
    return ArtifactHistory(
        artifact,
        tuple(RevisionRecord(artifact, i + 1, o, ind) for i, (o, ind) in enumerate(zip(outs, inds))),
    )
