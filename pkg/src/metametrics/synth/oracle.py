"""Brute-force reference implementations of every engine metric.

Each function re-derives its result from the raw records with plain loops,
following the formulas term by term (including the "0 when the revision
failed" convention for duration and acting time). Nothing here calls into
``metametrics.metrics``; the two paths are compared in differential tests.
Errors mirror the engine's taxonomy and precedence:
range -> gate order -> no successes -> missing data.
"""

from __future__ import annotations

import math

from metametrics.errors import (
    InvalidGateOrder,
    MissingIndicator,
    MissingSituation,
    NoSuccessfulRevisions,
    OutOfRange,
    UndefinedMTBTF,
)
from metametrics.history import ArtifactHistory, TestOutcome


def _res(h: ArtifactHistory, i: int) -> int:
    rec = h.records[i - 1]
    assert rec.revision == i
    return 1 if rec.outcome == TestOutcome.PASS else 0


def _range(h: ArtifactHistory, n: int) -> None:
    if not (1 <= n <= len(h.records)):
        raise OutOfRange(n, len(h.records))


def _gates(h: ArtifactHistory, n1: int, n2: int, strict: bool = False) -> None:
    _range(h, n1)
    _range(h, n2)
    if strict:
        if not n1 < n2:
            raise InvalidGateOrder(n1, n2)
    elif not n1 <= n2:
        raise InvalidGateOrder(n1, n2)


def oracle_r_succeeded(h: ArtifactHistory, n: int) -> int:
    _range(h, n)
    total = 0
    for i in range(1, n + 1):
        total += _res(h, i)
    return total


def oracle_r_failed(h: ArtifactHistory, n: int) -> int:
    _range(h, n)
    count = 0
    for i in range(1, n + 1):
        if _res(h, i) == 0:
            count += 1
    return count


def oracle_success_ratio(h: ArtifactHistory, n: int) -> tuple[float, float]:
    plus = oracle_r_succeeded(h, n) / n
    return plus, 1 - plus


def oracle_q1(h: ArtifactHistory, n1: int, n2: int) -> float:
    _gates(h, n1, n2)
    return oracle_success_ratio(h, n2)[0] - oracle_success_ratio(h, n1)[0]


def oracle_last_failed(h: ArtifactHistory, n: int) -> int:
    _range(h, n)
    i = n
    while i >= 1:
        if _res(h, i) == 0:
            return i
        i -= 1
    return 0


def oracle_neg_age(h: ArtifactHistory, n: int) -> int:
    return n - oracle_last_failed(h, n)


def oracle_q2(h: ArtifactHistory, n1: int, n2: int) -> int:
    _gates(h, n1, n2, strict=True)
    return oracle_neg_age(h, n2) - oracle_neg_age(h, n1)


def oracle_r_failures(h: ArtifactHistory, n: int) -> int:
    _range(h, n)
    total = 0
    for i in range(1, n):  # i = 1 .. n-1
        fail = 1 if (_res(h, i) != _res(h, i + 1) and _res(h, i) == 0) else 0
        total += fail
    return total


def oracle_q3_mtbtf(h: ArtifactHistory, n: int) -> float:
    failures = oracle_r_failures(h, n)
    if failures == 0:
        raise UndefinedMTBTF(n)
    return oracle_r_succeeded(h, n) / failures


def oracle_q4(h: ArtifactHistory, n1: int, n2: int, indicator: str) -> float:
    _gates(h, n1, n2)
    bad = []
    for i in range(1, n2 + 1):
        if getattr(h.records[i - 1].indicators, indicator) is None:
            bad.append(i)
    if bad:
        raise MissingIndicator(indicator, bad)
    bad = [i for i in range(1, n2 + 1) if h.records[i - 1].indicators.sloc is None]
    if bad:
        raise MissingIndicator("sloc", bad)

    def period_mean(n: int) -> float:
        s = 0.0
        for i in range(1, n + 1):
            ind = h.records[i - 1].indicators
            s += getattr(ind, indicator) / ind.sloc
        return s / n

    return period_mean(n1) - period_mean(n2)


def _duration(h: ArtifactHistory, i: int) -> float:
    if _res(h, i) == 1:
        return h.records[i - 1].indicators.duration
    return 0.0


def oracle_q5(h: ArtifactHistory, n1: int, n2: int) -> float:
    _gates(h, n1, n2)
    if oracle_r_succeeded(h, n1) == 0:
        raise NoSuccessfulRevisions(n1)
    bad = [i for i in range(1, n2 + 1) if _res(h, i) == 1 and h.records[i - 1].indicators.duration is None]
    if bad:
        raise MissingIndicator("duration", bad)

    def period_mean(n: int) -> float:
        s = 0.0
        for i in range(1, n + 1):
            s += _duration(h, i)
        return s / oracle_r_succeeded(h, n)

    return period_mean(n1) - period_mean(n2)


def _acting(h: ArtifactHistory, i: int, s: str) -> float:
    if _res(h, i) == 1:
        return h.records[i - 1].indicators.acting[s]
    return 0.0


def _check_acting(h: ArtifactHistory, n: int, s: str) -> None:
    bad = [i for i in range(1, n + 1) if _res(h, i) == 1 and s not in h.records[i - 1].indicators.acting]
    if bad:
        raise MissingSituation(s, bad)


def _v(h: ArtifactHistory, n: int, s: str, strict_eq7: bool) -> tuple[float, float]:
    succeeded = oracle_r_succeeded(h, n)
    total = 0.0
    for i in range(1, n + 1):
        total += _acting(h, i, s)
    mean = total / succeeded
    squares = 0.0
    for i in range(1, n + 1):
        if strict_eq7 or _res(h, i) == 1:
            squares += (_acting(h, i, s) - mean) ** 2
    return mean, math.sqrt(squares / succeeded)


def oracle_acting_stddev(
    h: ArtifactHistory, n: int, s: str, *, strict_eq7: bool = False
) -> tuple[float, float]:
    _range(h, n)
    if oracle_r_succeeded(h, n) == 0:
        raise NoSuccessfulRevisions(n)
    _check_acting(h, n, s)
    return _v(h, n, s, strict_eq7)


def oracle_q6(h: ArtifactHistory, n1: int, n2: int, s: str, *, strict_eq7: bool = False) -> float:
    _gates(h, n1, n2)
    if oracle_r_succeeded(h, n1) == 0:
        raise NoSuccessfulRevisions(n1)
    _check_acting(h, n2, s)
    return _v(h, n1, s, strict_eq7)[1] - _v(h, n2, s, strict_eq7)[1]


ORACLES = {
    "r_succeeded": oracle_r_succeeded,
    "r_failed": oracle_r_failed,
    "success_ratio": oracle_success_ratio,
    "q1": oracle_q1,
    "last_failed": oracle_last_failed,
    "neg_age": oracle_neg_age,
    "q2": oracle_q2,
    "r_failures": oracle_r_failures,
    "q3_mtbtf": oracle_q3_mtbtf,
    "q4": oracle_q4,
    "q5": oracle_q5,
    "acting_stddev": oracle_acting_stddev,
    "q6": oracle_q6,
}
