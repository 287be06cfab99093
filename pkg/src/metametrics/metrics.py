"""Meta-metric computation over an artifact's revision history.

All functions evaluate the cumulative prefix 1..n of a history. Counts are
exact integers; ratios and Q values are floats. Undefined results (zero
denominators, missing indicators) raise subclasses of ``UndefinedMetric``
rather than returning NaN or infinity.

Sign conventions (non-negative means "not worse"):

    q1 = R+(n2) - R+(n1)                 success ratio rose
    q2 = age-(n2) - age-(n1)             more revisions since last failure
    q4 = mean(f/sloc, n1) - mean(f/sloc, n2)   normalized indicator fell
    q5 = mean duration(n1) - mean duration(n2)  runs got faster
    q6 = v(n1, s) - v(n2, s)             acting time spread shrank
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from metametrics.errors import (
    InvalidGateOrder,
    MetaMetricsError,
    MissingIndicator,
    MissingSituation,
    NoSuccessfulRevisions,
    OutOfRange,
    UndefinedMTBTF,
)
from metametrics.history import SLOC_NORMALIZED, ArtifactHistory


class Verdict(str, Enum):
    IMPROVED = "Improved"
    NOT_DECREASED = "NotDecreased"
    DECREASED = "Decreased"
    UNDEFINED = "Undefined"


# (verdict when value >= 0, verdict when value < 0); q3 carries no sign rule.
_VERDICT_TABLE: dict[str, tuple[Verdict, Verdict]] = {
    "q1": (Verdict.NOT_DECREASED, Verdict.DECREASED),
    "q2": (Verdict.NOT_DECREASED, Verdict.DECREASED),
    "q4": (Verdict.IMPROVED, Verdict.DECREASED),
    "q5": (Verdict.IMPROVED, Verdict.DECREASED),
    "q6": (Verdict.NOT_DECREASED, Verdict.DECREASED),
}


def verdict_for(metric: str, value: float | None) -> Verdict | None:
    """Map a Q value onto its interpretation. ``None`` for metrics without a sign rule."""
    if value is None:
        return Verdict.UNDEFINED
    rule = _VERDICT_TABLE.get(metric.split(":", 1)[0])
    if rule is None:
        return None
    return rule[0] if value >= 0 else rule[1]


# -- argument checks ---------------------------------------------------------


def _check_n(h: ArtifactHistory, n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or not 1 <= n <= h.n:
        raise OutOfRange(n, h.n)


def _check_pair(h: ArtifactHistory, n1: int, n2: int, strict: bool = False) -> None:
    _check_n(h, n1)
    _check_n(h, n2)
    if n1 > n2 or (strict and n1 == n2):
        raise InvalidGateOrder(n1, n2)


# -- cumulative tables -------------------------------------------------------


@dataclass(frozen=True)
class _Cumulative:
    passes: tuple[int, ...]  # passes[n] = R_succeeded(n), passes[0] = 0
    last_fail: tuple[int, ...]  # last_fail[n] = failed(n)
    failures: tuple[int, ...]  # failures[n] = R_failures(n)


@lru_cache(maxsize=256)
def _cumulative(outcomes: tuple[int, ...]) -> _Cumulative:
    passes = [0]
    last_fail = [0]
    failures = [0]
    for i, res in enumerate(outcomes, start=1):
        passes.append(passes[-1] + res)
        last_fail.append(last_fail[-1] if res else i)
        # fail(i-1) closes when revision i passes after a failing i-1
        closed = 1 if i >= 2 and res == 1 and outcomes[i - 2] == 0 else 0
        failures.append(failures[-1] + closed)
    return _Cumulative(tuple(passes), tuple(last_fail), tuple(failures))


def _table(h: ArtifactHistory) -> _Cumulative:
    return _cumulative(h.outcomes)


# -- success counts and ratios ---------------------------------------


def r_succeeded(h: ArtifactHistory, n: int) -> int:
    """Number of passing revisions in 1..n."""
    _check_n(h, n)
    return _table(h).passes[n]


def r_failed(h: ArtifactHistory, n: int) -> int:
    return n - r_succeeded(h, n)


def success_ratio(h: ArtifactHistory, n: int) -> tuple[float, float]:
    """``(r_plus, r_minus)`` for the prefix 1..n."""
    r_plus = r_succeeded(h, n) / n
    return r_plus, 1.0 - r_plus


def q1(h: ArtifactHistory, n1: int, n2: int) -> float:
    _check_pair(h, n1, n2)
    return success_ratio(h, n2)[0] - success_ratio(h, n1)[0]


# -- last failure and negative age -------------------------------------


def last_failed(h: ArtifactHistory, n: int) -> int:
    """Latest failing revision in 1..n, or 0 if there is none."""
    _check_n(h, n)
    return _table(h).last_fail[n]


def neg_age(h: ArtifactHistory, n: int) -> int:
    """Revisions elapsed since the last failure (n if never failed)."""
    return n - last_failed(h, n)


def q2(h: ArtifactHistory, n1: int, n2: int) -> int:
    """Change in negative age; requires n1 < n2."""
    _check_pair(h, n1, n2, strict=True)
    return neg_age(h, n2) - neg_age(h, n1)


# -- failure episodes and MTBTF ---------------------------------------


def r_failures(h: ArtifactHistory, n: int) -> int:
    """Fail->pass transitions at i in 1..n-1.

    A failure streak still open at revision n is not counted.
    """
    _check_n(h, n)
    return _table(h).failures[n]


def q3_mtbtf(h: ArtifactHistory, n: int) -> float:
    """Mean time between test failures: passes per closed failure episode."""
    episodes = r_failures(h, n)
    if episodes == 0:
        raise UndefinedMTBTF(n)
    return r_succeeded(h, n) / episodes


# -- sloc-normalized indicators -----------------------------------------


def _normalized_series(h: ArtifactHistory, n: int, indicator: str) -> list[float]:
    if indicator not in SLOC_NORMALIZED:
        raise ValueError(f"indicator must be one of {SLOC_NORMALIZED}, got {indicator!r}")
    recs = h.records[:n]
    missing = [r.revision for r in recs if r.indicators.get(indicator) is None]
    if missing:
        raise MissingIndicator(indicator, missing)
    missing = [r.revision for r in recs if r.indicators.sloc is None]
    if missing:
        raise MissingIndicator("sloc", missing)
    return [r.indicators.get(indicator) / r.indicators.sloc for r in recs]  # type: ignore[operator]


def q4(h: ArtifactHistory, n1: int, n2: int, indicator: str) -> float:
    """Mean of indicator/sloc over 1..n1 minus the same mean over 1..n2."""
    _check_pair(h, n1, n2)
    series = _normalized_series(h, n2, indicator)
    running = 0.0
    at_n1 = 0.0
    for k, x in enumerate(series, start=1):
        running += x
        if k == n1:
            at_n1 = running
    return at_n1 / n1 - running / n2


# -- execution time -------------------------------------------------------


def _passing_durations(h: ArtifactHistory, n: int) -> list[float]:
    passing = [r for r in h.records[:n] if r.passed]
    missing = [r.revision for r in passing if r.indicators.duration is None]
    if missing:
        raise MissingIndicator("duration", missing)
    return [r.indicators.duration for r in passing]  # type: ignore[misc]


def mean_duration(h: ArtifactHistory, n: int) -> float:
    _check_n(h, n)
    if r_succeeded(h, n) == 0:
        raise NoSuccessfulRevisions(n)
    durations = _passing_durations(h, n)
    return sum(durations) / len(durations)


def q5(h: ArtifactHistory, n1: int, n2: int) -> float:
    """Mean passing-run duration over 1..n1 minus the same over 1..n2."""
    _check_pair(h, n1, n2)
    if r_succeeded(h, n1) == 0:
        raise NoSuccessfulRevisions(n1)
    durations = _passing_durations(h, n2)
    k1 = r_succeeded(h, n1)
    return sum(durations[:k1]) / k1 - sum(durations) / len(durations)


# -- acting time spread ---------------------------------------------------


def _acting_series(h: ArtifactHistory, n: int, situation: str) -> list[float]:
    passing = [r for r in h.records[:n] if r.passed]
    missing = [r.revision for r in passing if situation not in r.indicators.acting]
    if missing:
        raise MissingSituation(situation, missing)
    return [r.indicators.acting[situation] for r in passing]


def _spread(values: Sequence[float], failures: int, strict: bool) -> tuple[float, float]:
    mean = sum(values) / len(values)
    squares = sum((x - mean) ** 2 for x in values)
    if strict:
        # literal form: every failing revision contributes (0 - mean)^2
        squares += failures * mean * mean
    return mean, math.sqrt(squares / len(values))


def acting_stddev(
    h: ArtifactHistory, n: int, situation: str, *, strict_eq7: bool = False
) -> tuple[float, float]:
    """``(mean, v)`` of the acting time point for ``situation`` over passes in 1..n.

    ``v`` is the population standard deviation over passing revisions. With
    ``strict_eq7`` the squared-deviation sum also runs over failing revisions,
    whose acting time is taken as 0.
    """
    _check_n(h, n)
    if r_succeeded(h, n) == 0:
        raise NoSuccessfulRevisions(n)
    values = _acting_series(h, n, situation)
    return _spread(values, r_failed(h, n), strict_eq7)


def q6(h: ArtifactHistory, n1: int, n2: int, situation: str, *, strict_eq7: bool = False) -> float:
    _check_pair(h, n1, n2)
    if r_succeeded(h, n1) == 0:
        raise NoSuccessfulRevisions(n1)
    values = _acting_series(h, n2, situation)
    k1 = r_succeeded(h, n1)
    _, v1 = _spread(values[:k1], r_failed(h, n1), strict_eq7)
    _, v2 = _spread(values, r_failed(h, n2), strict_eq7)
    return v1 - v2


# -- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class MetricValue:
    """A metric slot: either a value or the error that left it undefined."""

    value: float | None
    verdict: Verdict | None = None
    error: str | None = None  # error class name
    message: str | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None

    @classmethod
    def of(cls, metric: str, value: float) -> MetricValue:
        return cls(value, verdict_for(metric, value))

    @classmethod
    def undefined(cls, exc: MetaMetricsError) -> MetricValue:
        return cls(None, Verdict.UNDEFINED, exc.kind, str(exc))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "verdict": self.verdict.value if self.verdict is not None else None,
            "error": self.error,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MetricValue:
        verdict = data.get("verdict")
        return cls(
            data.get("value"),
            Verdict(verdict) if verdict is not None else None,
            data.get("error"),
            data.get("message"),
        )


def _evaluate(metric: str, fn, *args, **kwargs) -> MetricValue:
    try:
        return MetricValue.of(metric, fn(*args, **kwargs))
    except (MissingIndicator, MissingSituation, NoSuccessfulRevisions, UndefinedMTBTF, InvalidGateOrder) as exc:
        return MetricValue.undefined(exc)


@dataclass(frozen=True)
class GateFigures:
    """Base figures of one artifact at one gate (prefix length ``n``)."""

    n: int
    r_succeeded: int
    r_failed: int
    r_plus: float
    r_minus: float
    last_failed: int
    neg_age: int
    r_failures: int
    mtbtf: MetricValue

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r_succeeded": self.r_succeeded,
            "r_failed": self.r_failed,
            "r_plus": self.r_plus,
            "r_minus": self.r_minus,
            "last_failed": self.last_failed,
            "neg_age": self.neg_age,
            "r_failures": self.r_failures,
            "mtbtf": self.mtbtf.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> GateFigures:
        fields_ = {k: data[k] for k in ("n", "r_succeeded", "r_failed", "r_plus", "r_minus",
                                        "last_failed", "neg_age", "r_failures")}
        return cls(**fields_, mtbtf=MetricValue.from_dict(data["mtbtf"]))


@dataclass(frozen=True)
class PairMetrics:
    """Q-metrics between two gates."""

    n1: int
    n2: int
    q1: MetricValue
    q2: MetricValue
    q3: MetricValue  # MTBTF at n2, repeated here so gate rules can address it per pair
    q4: dict[str, MetricValue] = field(default_factory=dict)
    q5: MetricValue = MetricValue(None, Verdict.UNDEFINED)
    q6: dict[str, MetricValue] = field(default_factory=dict)

    def select(self, selector: str) -> MetricValue:
        """Look up ``q1``, ``q2``, ``q3``, ``q4:<indicator>``, ``q5`` or ``q6:<situation>``."""
        name, _, arg = selector.partition(":")
        if name in ("q1", "q2", "q3", "q5") and not arg:
            return getattr(self, name)
        if name == "q4" and arg:
            return self.q4[arg]
        if name == "q6" and arg:
            return self.q6[arg]
        raise KeyError(selector)

    def to_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "q1": self.q1.to_dict(),
            "q2": self.q2.to_dict(),
            "q3": self.q3.to_dict(),
            "q4": {k: v.to_dict() for k, v in sorted(self.q4.items())},
            "q5": self.q5.to_dict(),
            "q6": {k: v.to_dict() for k, v in sorted(self.q6.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> PairMetrics:
        return cls(
            n1=data["n1"],
            n2=data["n2"],
            q1=MetricValue.from_dict(data["q1"]),
            q2=MetricValue.from_dict(data["q2"]),
            q3=MetricValue.from_dict(data["q3"]),
            q4={k: MetricValue.from_dict(v) for k, v in data["q4"].items()},
            q5=MetricValue.from_dict(data["q5"]),
            q6={k: MetricValue.from_dict(v) for k, v in data["q6"].items()},
        )


@dataclass(frozen=True)
class MetricsReport:
    artifact: str
    n: int  # full history length
    gates: tuple[GateFigures, ...]
    pairs: tuple[PairMetrics, ...]
    strict_eq7: bool = False

    def at(self, gate: int) -> GateFigures | None:
        for g in self.gates:
            if g.n == gate:
                return g
        return None

    def pair(self, n1: int, n2: int) -> PairMetrics | None:
        for p in self.pairs:
            if (p.n1, p.n2) == (n1, n2):
                return p
        return None

    def to_dict(self) -> dict:
        return {
            "artifact": self.artifact,
            "n": self.n,
            "strict_eq7": self.strict_eq7,
            "gates": [g.to_dict() for g in self.gates],
            "pairs": [p.to_dict() for p in self.pairs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> MetricsReport:
        return cls(
            artifact=data["artifact"],
            n=data["n"],
            gates=tuple(GateFigures.from_dict(g) for g in data["gates"]),
            pairs=tuple(PairMetrics.from_dict(p) for p in data["pairs"]),
            strict_eq7=data.get("strict_eq7", False),
        )


def gate_figures(h: ArtifactHistory, n: int) -> GateFigures:
    r_plus, r_minus = success_ratio(h, n)
    return GateFigures(
        n=n,
        r_succeeded=r_succeeded(h, n),
        r_failed=r_failed(h, n),
        r_plus=r_plus,
        r_minus=r_minus,
        last_failed=last_failed(h, n),
        neg_age=neg_age(h, n),
        r_failures=r_failures(h, n),
        mtbtf=_evaluate("q3", q3_mtbtf, h, n),
    )


def pair_metrics(
    h: ArtifactHistory,
    n1: int,
    n2: int,
    indicators: Iterable[str] = (),
    situations: Iterable[str] = (),
    *,
    strict_eq7: bool = False,
) -> PairMetrics:
    _check_pair(h, n1, n2)
    return PairMetrics(
        n1=n1,
        n2=n2,
        q1=_evaluate("q1", q1, h, n1, n2),
        q2=_evaluate("q2", q2, h, n1, n2),
        q3=_evaluate("q3", q3_mtbtf, h, n2),
        q4={ind: _evaluate("q4", q4, h, n1, n2, ind) for ind in indicators},
        q5=_evaluate("q5", q5, h, n1, n2),
        q6={s: _evaluate("q6", q6, h, n1, n2, s, strict_eq7=strict_eq7) for s in situations},
    )


def compute_report(
    h: ArtifactHistory,
    gates: Sequence[int],
    indicators: Iterable[str] = (),
    situations: Iterable[str] = (),
    *,
    pairs: Sequence[tuple[int, int]] | None = None,
    strict_eq7: bool = False,
) -> MetricsReport:
    """Base figures at every gate plus Q-metrics for each consecutive gate pair.

    ``pairs`` overrides the consecutive-pair default. Metrics that are
    undefined for this history are recorded as Undefined slots.
    Raises OutOfRange / InvalidGateOrder for bad gate lists.
    """
    gates = list(gates)
    for g in gates:
        _check_n(h, g)
    for a, b in zip(gates, gates[1:]):
        if a >= b:
            raise InvalidGateOrder(a, b)
    indicators = list(indicators)
    for ind in indicators:
        if ind not in SLOC_NORMALIZED:
            raise ValueError(f"indicator must be one of {SLOC_NORMALIZED}, got {ind!r}")
    situations = list(situations)
    if pairs is None:
        pairs = list(zip(gates, gates[1:]))
    return MetricsReport(
        artifact=h.artifact,
        n=h.n,
        gates=tuple(gate_figures(h, g) for g in gates),
        pairs=tuple(
            pair_metrics(h, a, b, indicators, situations, strict_eq7=strict_eq7) for a, b in pairs
        ),
        strict_eq7=strict_eq7,
    )
