"""Quality-gate evaluation, cross-artifact heatmaps and report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
import operator
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from metametrics.errors import (
    EmptyPolicy,
    NoArtifacts,
    NoSelectors,
    PolicyError,
    UnknownSelector,
)
from metametrics.history import SLOC_NORMALIZED, ArtifactHistory, HistorySet
from metametrics.metrics import (
    GateFigures,
    MetricsReport,
    MetricValue,
    PairMetrics,
    compute_report,
)

SCHEMA = "metametrics/1"

COMPARATORS: dict[str, Callable[[float, float], bool]] = {
    ">=": operator.ge,
    ">": operator.gt,
    "<=": operator.le,
    "<": operator.lt,
}
SEVERITIES = ("warn", "fail")
UNDEFINED_POLICIES = ("warn", "fail", "ignore")

# selectors readable from a single gate's base figures
BASE_SELECTORS = (
    "r_succeeded",
    "r_failed",
    "r_plus",
    "r_minus",
    "last_failed",
    "neg_age",
    "r_failures",
    "mtbtf",
)


def parse_selector(selector: str) -> tuple[str, str]:
    """Split ``q4:mccabe`` into ``("q4", "mccabe")``; validates the selector."""
    name, sep, arg = selector.partition(":")
    if name in ("q1", "q2", "q3", "q5") and not sep:
        return name, ""
    if name == "q4" and arg in SLOC_NORMALIZED:
        return name, arg
    if name == "q6" and arg:
        return name, arg
    if name in BASE_SELECTORS and not sep:
        return name, ""
    raise UnknownSelector(selector)


def is_pair_selector(selector: str) -> bool:
    return parse_selector(selector)[0] in ("q1", "q2", "q4", "q5", "q6")


# -- gate policies ---------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    name: str
    revision: int


@dataclass(frozen=True)
class GateRule:
    metric: str
    cmp: str
    threshold: float
    severity: str = "fail"

    def __post_init__(self) -> None:
        try:
            name, _ = parse_selector(self.metric)
        except UnknownSelector:
            raise PolicyError(f"unknown metric selector {self.metric!r}") from None
        if name in BASE_SELECTORS:
            raise PolicyError(f"rules must reference q-metrics, got {self.metric!r}")
        if self.cmp not in COMPARATORS:
            raise PolicyError(f"comparator must be one of {sorted(COMPARATORS)}, got {self.cmp!r}")
        if isinstance(self.threshold, bool) or not isinstance(self.threshold, (int, float)) \
                or not math.isfinite(self.threshold):
            raise PolicyError(f"threshold must be a finite number, got {self.threshold!r}")
        if self.severity not in SEVERITIES:
            raise PolicyError(f"severity must be one of {SEVERITIES}, got {self.severity!r}")

    def holds(self, value: float) -> bool:
        return COMPARATORS[self.cmp](value, self.threshold)

    def describe(self) -> str:
        return f"{self.metric} {self.cmp} {self.threshold:g} ({self.severity})"

    def to_dict(self) -> dict[str, Any]:
        return {"metric": self.metric, "cmp": self.cmp, "threshold": self.threshold, "severity": self.severity}


@dataclass(frozen=True)
class GatePolicy:
    gates: tuple[Gate, ...]
    rules: tuple[GateRule, ...]
    undefined: str = "warn"

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.gates:
            raise EmptyPolicy()
        if not self.rules:
            raise EmptyPolicy("policy defines no rules")
        revs = [g.revision for g in self.gates]
        for r in revs:
            if isinstance(r, bool) or not isinstance(r, int) or r < 1:
                raise PolicyError(f"gate revisions must be integers >= 1, got {r!r}")
        if any(a >= b for a, b in zip(revs, revs[1:])):
            raise PolicyError(f"gate revisions must be strictly increasing, got {revs}")
        if self.undefined not in UNDEFINED_POLICIES:
            raise PolicyError(f"undefined must be one of {UNDEFINED_POLICIES}, got {self.undefined!r}")

    @property
    def revisions(self) -> list[int]:
        return [g.revision for g in self.gates]

    def gate_pairs(self) -> list[tuple[Gate, Gate]]:
        """Consecutive gate pairs; a single gate is paired with itself."""
        if len(self.gates) == 1:
            return [(self.gates[0], self.gates[0])]
        return list(zip(self.gates, self.gates[1:]))

    def indicators(self) -> list[str]:
        return sorted({parse_selector(r.metric)[1] for r in self.rules if r.metric.startswith("q4:")})

    def situations(self) -> list[str]:
        return sorted({parse_selector(r.metric)[1] for r in self.rules if r.metric.startswith("q6:")})

    def to_dict(self) -> dict[str, Any]:
        return {
            "gates": [{"name": g.name, "revision": g.revision} for g in self.gates],
            "rules": [r.to_dict() for r in self.rules],
            "undefined": self.undefined,
        }

    @classmethod
    def from_dict(cls, data: Any) -> GatePolicy:
        if not isinstance(data, dict):
            raise PolicyError("policy must be a JSON object")
        unknown = sorted(set(data) - {"gates", "rules", "undefined"})
        if unknown:
            raise PolicyError(f"unknown policy key {unknown[0]!r}")
        gates_raw = data.get("gates") or []
        rules_raw = data.get("rules") or []
        if not isinstance(gates_raw, list) or not isinstance(rules_raw, list):
            raise PolicyError("gates and rules must be lists")
        gates = []
        for k, g in enumerate(gates_raw):
            if not isinstance(g, dict) or "revision" not in g:
                raise PolicyError(f"gate #{k} must be an object with a revision")
            gates.append(Gate(str(g.get("name", f"G{k + 1}")), g["revision"]))
        rules = []
        for k, r in enumerate(rules_raw):
            if not isinstance(r, dict) or not {"metric", "cmp", "threshold"} <= set(r):
                raise PolicyError(f"rule #{k} needs metric, cmp and threshold")
            extra = sorted(set(r) - {"metric", "cmp", "threshold", "severity"})
            if extra:
                raise PolicyError(f"rule #{k} has unknown key {extra[0]!r}")
            rules.append(GateRule(r["metric"], r["cmp"], r["threshold"], r.get("severity", "fail")))
        return cls(tuple(gates), tuple(rules), data.get("undefined", "warn"))

    @classmethod
    def from_json(cls, text: str) -> GatePolicy:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolicyError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class RuleOutcome:
    rule: GateRule
    value: float | None
    # pass | violated | undefined | skipped | out_of_range
    status: str
    detail: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "metric": self.rule.metric,
            "cmp": self.rule.cmp,
            "threshold": self.rule.threshold,
            "severity": self.rule.severity,
            "value": self.value,
            "status": self.status,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class GateVerdict:
    artifact: str
    gate_from: Gate
    gate_to: Gate
    outcomes: tuple[RuleOutcome, ...]
    overall: str  # pass | warn | fail

    def to_dict(self) -> dict[str, Any]:
        return {
            "artifact": self.artifact,
            "from": {"name": self.gate_from.name, "revision": self.gate_from.revision},
            "to": {"name": self.gate_to.name, "revision": self.gate_to.revision},
            "overall": self.overall,
            "rules": [o.to_dict() for o in self.outcomes],
        }


def reports_for_policy(
    hs: HistorySet, policy: GatePolicy, *, strict_eq7: bool = False, map_fn: Callable = map
) -> dict[str, MetricsReport]:
    """Compute each artifact's report at the policy gates it is long enough for."""

    def one(h: ArtifactHistory) -> MetricsReport:
        gates = [g for g in policy.revisions if g <= h.n]
        pairs = [
            (a.revision, b.revision)
            for a, b in policy.gate_pairs()
            if b.revision <= h.n
        ]
        return compute_report(
            h, gates, policy.indicators(), policy.situations(), pairs=pairs, strict_eq7=strict_eq7
        )

    return {r.artifact: r for r in map_fn(one, hs.values())}


def _rule_outcome(rule: GateRule, pair: PairMetrics, undefined: str) -> RuleOutcome:
    try:
        slot = pair.select(rule.metric)
    except KeyError:
        slot = MetricValue(None, None, "NotComputed", f"{rule.metric} not present in report")
    if slot.value is None:
        status = "skipped" if undefined == "ignore" else "undefined"
        return RuleOutcome(rule, None, status, slot.message)
    return RuleOutcome(rule, slot.value, "pass" if rule.holds(slot.value) else "violated")


def _overall(outcomes: Iterable[RuleOutcome], undefined: str) -> str:
    level = 0
    for o in outcomes:
        if o.status == "violated":
            level = max(level, 2 if o.rule.severity == "fail" else 1)
        elif o.status in ("undefined", "out_of_range"):
            level = max(level, 2 if undefined == "fail" else 1 if undefined == "warn" else 0)
    return ("pass", "warn", "fail")[level]


def evaluate_gates(reports: Mapping[str, MetricsReport], policy: GatePolicy) -> list[GateVerdict]:
    """One verdict per artifact and consecutive gate pair, sorted by artifact then gate.

    Artifacts shorter than a gate get an ``out_of_range`` entry for that pair,
    weighted like an undefined metric.
    """
    if not policy.gates or not policy.rules:
        raise EmptyPolicy()
    verdicts = []
    for artifact in sorted(reports):
        report = reports[artifact]
        for a, b in policy.gate_pairs():
            pair = report.pair(a.revision, b.revision)
            if pair is None:
                detail = f"gate {b.name} at revision {b.revision} exceeds N = {report.n}"
                status = "skipped" if policy.undefined == "ignore" else "out_of_range"
                outcomes = tuple(RuleOutcome(r, None, status, detail) for r in policy.rules)
            else:
                outcomes = tuple(_rule_outcome(r, pair, policy.undefined) for r in policy.rules)
            verdicts.append(GateVerdict(artifact, a, b, outcomes, _overall(outcomes, policy.undefined)))
    return verdicts


# -- heatmaps --------------------------------------------------------------------


@dataclass(frozen=True)
class HeatmapCell:
    raw: float | None
    normalized: float | None

    @property
    def defined(self) -> bool:
        return self.raw is not None


@dataclass(frozen=True)
class HeatmapMatrix:
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[HeatmapCell, ...], ...] = field(repr=False)

    def column(self, selector: str) -> list[HeatmapCell]:
        j = self.columns.index(selector)
        return [row[j] for row in self.cells]


def _selector_value(report: MetricsReport, selector: str, gate: int, baseline: int) -> float | None:
    name, _ = parse_selector(selector)
    figures: GateFigures | None = report.at(gate)
    if figures is None:
        return None
    if name in ("mtbtf", "q3"):
        return figures.mtbtf.value
    if name in BASE_SELECTORS:
        return float(getattr(figures, name))
    pair = report.pair(baseline, gate)
    if pair is None:
        return None
    try:
        return pair.select(selector).value
    except KeyError:
        return None


def min_max(values: Sequence[float | None]) -> list[float | None]:
    """Min-max scale the defined entries to [0, 1]; a flat column maps to 0.5."""
    defined = [v for v in values if v is not None]
    if not defined:
        return [None] * len(values)
    lo, hi = min(defined), max(defined)
    if lo == hi:
        return [None if v is None else 0.5 for v in values]
    span = hi - lo
    return [None if v is None else (v - lo) / span for v in values]


def build_heatmap(
    reports: Mapping[str, MetricsReport],
    selectors: Sequence[str],
    gate: int,
    baseline: int | None = None,
) -> HeatmapMatrix:
    """Artifacts x selectors matrix at ``gate``.

    Pair selectors (q1, q2, q4, q5, q6) read the pair ``(baseline, gate)``;
    ``baseline`` defaults to ``gate`` itself.
    """
    if not reports:
        raise NoArtifacts()
    if not selectors:
        raise NoSelectors()
    for s in selectors:
        parse_selector(s)
    rows = tuple(sorted(reports))
    base = gate if baseline is None else baseline
    raw = [[_selector_value(reports[a], s, gate, base) for s in selectors] for a in rows]
    columns = [min_max([row[j] for row in raw]) for j in range(len(selectors))]
    cells = tuple(
        tuple(HeatmapCell(raw[i][j], columns[j][i]) for j in range(len(selectors)))
        for i in range(len(rows))
    )
    return HeatmapMatrix(rows, tuple(selectors), cells)


def _raw_text(v: float | None) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def render_heatmap_csv(matrix: HeatmapMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["artifact", *matrix.columns]
    writer.writerow(header)
    for artifact, row in zip(matrix.rows, matrix.cells):
        writer.writerow([artifact, *("" if c.normalized is None else f"{c.normalized:.6f}" for c in row)])
    buf.write("# raw\n")
    writer.writerow(header)
    for artifact, row in zip(matrix.rows, matrix.cells):
        writer.writerow([artifact, *(_raw_text(c.raw) for c in row)])
    return buf.getvalue()


# -- report rendering --------------------------------------------------------------


def report_document(
    reports: Mapping[str, MetricsReport],
    verdicts: Sequence[GateVerdict] = (),
    *,
    stamp: str | None = None,
) -> dict[str, Any]:
    doc: dict[str, Any] = {"schema": SCHEMA}
    if stamp is not None:
        doc["generated_at"] = stamp
    doc["artifacts"] = [reports[a].to_dict() for a in sorted(reports)]
    doc["verdicts"] = [v.to_dict() for v in verdicts]
    return doc


def parse_report_json(text: str) -> tuple[dict[str, MetricsReport], list[dict[str, Any]]]:
    """Inverse of the JSON renderer: reports plus the raw verdict entries."""
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
    reports = {a["artifact"]: MetricsReport.from_dict(a) for a in doc["artifacts"]}
    return reports, doc["verdicts"]


def _num(v: float | int | None) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}"


_BADGES = {"pass": "✅ PASS", "warn": "⚠️ WARN", "fail": "❌ FAIL"}


def _slot_row(label: str, slot: MetricValue) -> str:
    verdict = slot.verdict.value if slot.verdict is not None else ""
    note = slot.error or ""
    return f"| {label} | {_num(slot.value)} | {verdict} | {note} |"


def _markdown(reports: Mapping[str, MetricsReport], verdicts: Sequence[GateVerdict], stamp: str | None) -> str:
    lines = ["# Meta-metrics report", ""]
    if stamp is not None:
        lines += [f"Generated at {stamp}", ""]
    by_artifact: dict[str, list[GateVerdict]] = {}
    for v in verdicts:
        by_artifact.setdefault(v.artifact, []).append(v)

    for artifact in sorted(reports):
        rep = reports[artifact]
        lines += [f"## {artifact}", "", f"Revisions: {rep.n}" + (" (strict Eq7 deviation sum)" if rep.strict_eq7 else ""), ""]
        if rep.gates:
            lines.append("| Figure | " + " | ".join(f"@{g.n}" for g in rep.gates) + " |")
            lines.append("|---|" + "---|" * len(rep.gates))
            rows = [
                ("R_succeeded", lambda g: g.r_succeeded),
                ("R_failed", lambda g: g.r_failed),
                ("R+", lambda g: g.r_plus),
                ("R-", lambda g: g.r_minus),
                ("failed (last)", lambda g: g.last_failed),
                ("age-", lambda g: g.neg_age),
                ("R_failures", lambda g: g.r_failures),
                ("MTBTF (Q3)", lambda g: g.mtbtf.value),
            ]
            for label, get in rows:
                lines.append(f"| {label} | " + " | ".join(_num(get(g)) for g in rep.gates) + " |")
            lines.append("")
        for pair in rep.pairs:
            lines += [f"### Gates {pair.n1} -> {pair.n2}", "", "| Metric | Value | Verdict | Note |", "|---|---|---|---|"]
            lines.append(_slot_row("Q1", pair.q1))
            lines.append(_slot_row("Q2", pair.q2))
            lines.append(_slot_row("Q3 (MTBTF)", pair.q3))
            for ind in sorted(pair.q4):
                lines.append(_slot_row(f"Q4 {ind}", pair.q4[ind]))
            lines.append(_slot_row("Q5", pair.q5))
            for s in sorted(pair.q6):
                lines.append(_slot_row(f"Q6 {s}", pair.q6[s]))
            lines.append("")
        for v in by_artifact.get(artifact, []):
            lines += [
                f"### Gate check {v.gate_from.name} -> {v.gate_to.name}: {_BADGES[v.overall]}",
                "",
                "| Rule | Value | Status |",
                "|---|---|---|",
            ]
            for o in v.outcomes:
                status = o.status if o.detail is None else f"{o.status}: {o.detail}"
                lines.append(f"| {o.rule.describe()} | {_num(o.value)} | {status} |")
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


def render_report(
    reports: Mapping[str, MetricsReport],
    verdicts: Sequence[GateVerdict] = (),
    fmt: str = "json",
    *,
    stamp: str | None = None,
) -> str:
    if fmt == "json":
        return json.dumps(report_document(reports, verdicts, stamp=stamp), indent=2, allow_nan=False) + "\n"
    if fmt == "markdown":
        return _markdown(reports, verdicts, stamp)
    raise ValueError(f"unknown format {fmt!r}")
