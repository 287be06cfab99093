"""JSON Lines history files.

One object per line::

    {"artifact": "CCS", "revision": 1, "result": "pass", "sloc": 1200,
     "misra_warnings": 3, "mccabe": 14, "uncovered": 40,
     "duration_s": 12.5, "acting_s": {"cutin": 2.31}}

``artifact``, ``revision`` and ``result`` are required. Blank lines are
skipped. The canonical writer emits keys in the order above, artifacts in
lexicographic order and revisions ascending, so output is byte-stable.
"""

from __future__ import annotations

import io
import json
import math
from collections.abc import Callable, Iterable, Sequence
from typing import IO, Any

from metametrics.errors import (
    DataError,
    DuplicateRevision,
    EmptyInput,
    GapInHistory,
    ParseError,
    SchemaViolation,
    ValidationErrors,
)
from metametrics.history import (
    ArtifactHistory,
    HistorySet,
    IndicatorSample,
    RevisionRecord,
    TestOutcome,
)

REQUIRED_KEYS = ("artifact", "revision", "result")
OPTIONAL_KEYS = ("sloc", "misra_warnings", "mccabe", "uncovered", "duration_s", "acting_s")
KEY_ORDER = REQUIRED_KEYS + OPTIONAL_KEYS

# key -> minimum allowed integer value
_COUNT_KEYS = {"sloc": 1, "misra_warnings": 0, "mccabe": 1, "uncovered": 0}


def _reject_constant(name: str) -> Any:
    raise ValueError(f"non-finite number {name} is not valid JSON")


def _unique_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    obj: dict[str, Any] = {}
    for key, value in pairs:
        if key in obj:
            raise ValueError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_seconds(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v >= 0


def parse_line(text: str, lineno: int, *, lenient: bool = False) -> RevisionRecord:
    """Parse and validate a single non-empty line."""
    try:
        obj = json.loads(text, object_pairs_hook=_unique_keys, parse_constant=_reject_constant)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ParseError(lineno, str(exc)) from None
    if not isinstance(obj, dict):
        raise ParseError(lineno, f"expected a JSON object, got {type(obj).__name__}")

    if not lenient:
        for key in obj:
            if key not in KEY_ORDER:
                raise SchemaViolation(lineno, key, "unknown key")
    for key in REQUIRED_KEYS:
        if key not in obj:
            raise SchemaViolation(lineno, key, "required key missing")

    artifact = obj["artifact"]
    if not isinstance(artifact, str) or not artifact.strip():
        raise SchemaViolation(lineno, "artifact", "must be non-empty text")
    revision = obj["revision"]
    if not _is_int(revision) or revision < 1:
        raise SchemaViolation(lineno, "revision", "must be an integer >= 1")
    result = obj["result"]
    if result not in ("pass", "fail"):
        raise SchemaViolation(lineno, "result", 'must be "pass" or "fail"')

    values: dict[str, Any] = {}
    for key, minimum in _COUNT_KEYS.items():
        if key in obj:
            v = obj[key]
            if not _is_int(v) or v < minimum:
                raise SchemaViolation(lineno, key, f"must be an integer >= {minimum}")
            values[key] = v
    if "duration_s" in obj:
        v = obj["duration_s"]
        if not _is_seconds(v):
            raise SchemaViolation(lineno, "duration_s", "must be a number >= 0")
        values["duration"] = float(v)
    acting: dict[str, float] = {}
    if "acting_s" in obj:
        v = obj["acting_s"]
        if not isinstance(v, dict):
            raise SchemaViolation(lineno, "acting_s", "must be an object")
        for situation, t in v.items():
            if not situation:
                raise SchemaViolation(lineno, "acting_s", "situation ids must be non-empty")
            if not _is_seconds(t):
                raise SchemaViolation(lineno, "acting_s", f"time for {situation!r} must be a number >= 0")
            acting[situation] = float(t)

    return RevisionRecord(artifact, revision, TestOutcome(result), IndicatorSample(acting=acting, **values))


def _assemble(
    entries: list[tuple[int, RevisionRecord]], *, renumber: bool, errors: list[DataError] | None
) -> HistorySet:
    def fail(exc: DataError) -> None:
        if errors is None:
            raise exc
        errors.append(exc)

    grouped: dict[str, dict[int, tuple[int, RevisionRecord]]] = {}
    for lineno, rec in entries:
        per = grouped.setdefault(rec.artifact, {})
        if rec.revision in per:
            fail(DuplicateRevision(rec.artifact, rec.revision, line=lineno))
            continue
        per[rec.revision] = (lineno, rec)

    histories = []
    for artifact in sorted(grouped):
        per = grouped[artifact]
        ordered = [per[r][1] for r in sorted(per)]
        if renumber:
            ordered = [
                RevisionRecord(artifact, k, rec.outcome, rec.indicators)
                for k, rec in enumerate(ordered, start=1)
            ]
        else:
            gap = next((k for k, rec in enumerate(ordered, start=1) if rec.revision != k), None)
            if gap is not None:
                fail(GapInHistory(artifact, gap))
                continue
        histories.append(ArtifactHistory(artifact, tuple(ordered)))
    return HistorySet(histories)


def _read_entries(
    stream: IO[str] | Iterable[str], *, lenient: bool, errors: list[DataError] | None
) -> list[tuple[int, RevisionRecord]]:
    entries: list[tuple[int, RevisionRecord]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if line.endswith("\r"):
            line = line[:-1]
        if lineno == 1 and line.startswith("\ufeff"):
            exc: DataError = ParseError(1, "byte order mark is not allowed")
            if errors is None:
                raise exc
            errors.append(exc)
            line = line[1:]
        if not line.strip():
            continue
        try:
            entries.append((lineno, parse_line(line, lineno, lenient=lenient)))
        except DataError as exc:
            if errors is None:
                raise
            errors.append(exc)
    return entries


def _finish(
    entries: list[tuple[int, RevisionRecord]], *, renumber: bool, errors: list[DataError] | None
) -> HistorySet:
    if not entries and not errors:
        raise EmptyInput()
    hs = _assemble(entries, renumber=renumber, errors=errors)
    if errors:
        raise ValidationErrors(errors)
    if not hs:
        raise EmptyInput()
    return hs


def load_history_set(
    stream: IO[str] | Iterable[str],
    *,
    lenient: bool = False,
    renumber: bool = False,
    collect_errors: bool = False,
) -> HistorySet:
    """Read a history file into a validated HistorySet.

    Strict by default: the first invalid line aborts. With ``collect_errors``
    every problem is gathered and raised together as ``ValidationErrors``.
    ``renumber`` maps each artifact's (sorted, unique) revision numbers onto
    1..N instead of rejecting gaps.
    """
    errors: list[DataError] | None = [] if collect_errors else None
    entries = _read_entries(stream, lenient=lenient, errors=errors)
    return _finish(entries, renumber=renumber, errors=errors)


def _decode(path: str) -> str:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(data.count(b"\n", 0, exc.start) + 1, "invalid UTF-8") from None


def load_history_file(path: str, **kwargs: Any) -> HistorySet:
    return load_history_set(io.StringIO(_decode(path), newline=""), **kwargs)


def load_history_files(
    paths: Sequence[str],
    *,
    lenient: bool = False,
    renumber: bool = False,
    map_fn: Callable[..., Iterable[Any]] = map,
) -> HistorySet:
    """Parse several files (possibly in parallel via ``map_fn``) and merge them.

    Each file only has to be well formed on its own. Density and duplicate
    checks run once on the merged records, so an artifact's revisions may be
    spread across files. Duplicate line numbers refer to the file they came from.
    """
    def read(path: str) -> list[tuple[int, RevisionRecord]]:
        text = _decode(path)
        return _read_entries(io.StringIO(text, newline=""), lenient=lenient, errors=None)

    entries = [entry for chunk in map_fn(read, paths) for entry in chunk]
    return _finish(entries, renumber=renumber, errors=None)


def record_to_dict(rec: RevisionRecord) -> dict[str, Any]:
    ind = rec.indicators
    out: dict[str, Any] = {
        "artifact": rec.artifact,
        "revision": rec.revision,
        "result": rec.outcome.value,
    }
    for key in ("sloc", "misra_warnings", "mccabe", "uncovered"):
        value = getattr(ind, key)
        if value is not None:
            out[key] = value
    if ind.duration is not None:
        out["duration_s"] = ind.duration
    if ind.acting:
        out["acting_s"] = {s: ind.acting[s] for s in sorted(ind.acting)}
    return out


def format_record(rec: RevisionRecord) -> str:
    return json.dumps(record_to_dict(rec), ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def write_history_set(hs: HistorySet | Iterable[ArtifactHistory], sink: IO[str]) -> None:
    histories = hs.values() if isinstance(hs, HistorySet) else sorted(hs, key=lambda h: h.artifact)
    for h in histories:
        for rec in h.records:
            sink.write(format_record(rec))
            sink.write("\n")


def dumps_history_set(hs: HistorySet | Iterable[ArtifactHistory]) -> str:
    buf = io.StringIO()
    write_history_set(hs, buf)
    return buf.getvalue()

