from __future__ import annotations

import random

import pytest

from metametrics import metrics as engine
from metametrics.errors import MetaMetricsError
from metametrics.history import SLOC_NORMALIZED, ArtifactHistory, IndicatorSample, history_from_outcomes
from metametrics.synth import oracle
from metametrics.synth import GeneratorConfig, Injection, Situation, generate, paper_fixture

SITUATIONS = (Situation("cutin", 2.0, 0.05), Situation("brake", 4.5, 0.2))


def corpus_configs() -> list[GeneratorConfig]:
    """Varied generator settings: healthy, flaky, broken, sparse data, regressions."""
    configs = []
    settings = [
        # (pass_probability, revisions, missing_probability, injections)
        (0.9, 40, 0.0, ()),
        (0.5, 60, 0.0, ()),
        (0.2, 50, 0.0, ()),
        (1.0, 30, 0.0, ()),
        (0.0, 25, 0.0, ()),
        (0.7, 80, 0.02, ()),
        (0.8, 45, 0.1, ()),
        (0.6, 70, 0.0, (Injection(35, "duration-drift", 0.2),)),
        (0.85, 70, 0.0, (Injection(30, "acting-variance", 3.0),)),
        (0.9, 60, 0.0, (Injection(20, "failure-rate", 0.6),)),
        (0.75, 55, 0.0, (Injection(25, "indicator-spike", 0.5),)),
        (0.95, 12, 0.05, ()),
    ]
    for k, (p, n, miss, inj) in enumerate(settings):
        configs.append(GeneratorConfig(
            artifacts=4,
            revisions=n,
            pass_probability=p,
            seed=1000 + k,
            missing_probability=miss,
            situations=SITUATIONS,
            injections=inj,
            artifact_prefix=f"C{k:02d}_",
        ))
    return configs


def corpus_histories() -> list[ArtifactHistory]:
    histories = [paper_fixture()]
    for config in corpus_configs():
        histories.extend(generate(config).values())
    return histories


@pytest.fixture(scope="session")
def corpus() -> list[ArtifactHistory]:
    return corpus_histories()


@pytest.fixture(scope="session")
def fixture_history() -> ArtifactHistory:
    return paper_fixture()


@pytest.fixture
def mixed() -> ArtifactHistory:
    """res = [0, 1, 1, 0, 1]"""
    return history_from_outcomes("M", [0, 1, 1, 0, 1])


def timed(artifact: str, runs: list[tuple[int, float | None, dict[str, float] | None]]) -> ArtifactHistory:
    """History from (res, duration, acting) triples."""
    return history_from_outcomes(
        artifact,
        [res for res, _, _ in runs],
        [IndicatorSample(duration=d, acting=a or {}) for _, d, a in runs],
    )


# -- differential harness ----------------------------------------------------------

DIFF_TOL = 1e-9


def _outcome(fn, *args, **kwargs):
    try:
        return ("ok", fn(*args, **kwargs))
    except MetaMetricsError as exc:
        return ("error", exc)


def _agree(a, b) -> bool:
    if a[0] != b[0]:
        return False
    if a[0] == "error":
        return a[1] == b[1]
    x, y = a[1], b[1]
    if isinstance(x, tuple):
        return all(abs(p - q) <= DIFF_TOL for p, q in zip(x, y))
    return abs(x - y) <= DIFF_TOL


def differential_cases(histories, per_history: int, seed: int):
    """(history, n1, n2, indicator, situation) tuples, including invalid ones."""
    rnd = random.Random(seed)
    situations = [s.id for s in SITUATIONS] + ["ghost"]
    cases = []
    for h in histories:
        for _ in range(per_history):
            roll = rnd.random()
            if roll < 0.05:
                n1, n2 = rnd.randint(1, h.n), h.n + rnd.randint(1, 3)
            elif roll < 0.10 and h.n > 1:
                n2 = rnd.randint(1, h.n - 1)
                n1 = rnd.randint(n2 + 1, h.n)
            else:
                n1 = rnd.randint(1, h.n)
                n2 = rnd.randint(n1, h.n)
            cases.append((h, n1, n2, rnd.choice(SLOC_NORMALIZED), rnd.choice(situations)))
    return cases


def check_case(h, n1, n2, indicator, situation) -> list[str]:
    """Compare every engine metric with its oracle; return the names that disagree."""
    checks = [
        ("r_succeeded", (h, n2), {}),
        ("r_failed", (h, n2), {}),
        ("success_ratio", (h, n1), {}),
        ("last_failed", (h, n2), {}),
        ("neg_age", (h, n1), {}),
        ("r_failures", (h, n2), {}),
        ("q3_mtbtf", (h, n2), {}),
        ("q1", (h, n1, n2), {}),
        ("q2", (h, n1, n2), {}),
        ("q4", (h, n1, n2, indicator), {}),
        ("q5", (h, n1, n2), {}),
        ("acting_stddev", (h, n2, situation), {}),
        ("acting_stddev", (h, n2, situation), {"strict_eq7": True}),
        ("q6", (h, n1, n2, situation), {}),
        ("q6", (h, n1, n2, situation), {"strict_eq7": True}),
    ]
    bad = []
    for name, args, kwargs in checks:
        got = _outcome(getattr(engine, name), *args, **kwargs)
        want = _outcome(oracle.ORACLES[name], *args, **kwargs)
        if not _agree(got, want):
            bad.append(f"{name}{args[1:]}{kwargs or ''}: engine={got} oracle={want}")
    return bad


# -- acceptance summary ----------------------------------------------------------------

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(ident, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_acceptance", None)
    if marker is None:
        return
    ident, title = marker
    if report.when == "call" or report.outcome != "passed":
        status = "PASS" if report.outcome == "passed" else "FAIL"
        if _ACCEPTANCE.get(ident, ("PASS",))[0] != "FAIL":
            _ACCEPTANCE[ident] = (status, title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result()._acceptance = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[ident]
        terminalreporter.write_line(f"[{status}] {ident}: {title}")
