from __future__ import annotations

import csv
import io
import json

import pytest

from metametrics.errors import EmptyPolicy, NoArtifacts, NoSelectors, PolicyError, UnknownSelector
from metametrics.history import HistorySet, history_from_outcomes
from metametrics.metrics import compute_report
from metametrics.reporting import (
    Gate,
    GatePolicy,
    GateRule,
    build_heatmap,
    evaluate_gates,
    min_max,
    parse_report_json,
    render_heatmap_csv,
    render_report,
    reports_for_policy,
)
from metametrics.synth import GeneratorConfig, generate, paper_fixture


def policy(rules, gates=((768, "G1"), (892, "G2")), undefined="warn") -> GatePolicy:
    return GatePolicy(
        tuple(Gate(name, rev) for rev, name in gates),
        tuple(GateRule(*r) for r in rules),
        undefined,
    )


def run(hs: HistorySet, pol: GatePolicy):
    return evaluate_gates(reports_for_policy(hs, pol), pol)


def test_q2_rule_passes_on_fixture():
    (verdict,) = run(HistorySet([paper_fixture()]), policy([("q2", ">=", 0, "fail")]))
    assert verdict.overall == "pass"
    assert verdict.outcomes[0].value == 124
    assert verdict.outcomes[0].status == "pass"


def test_q1_rule_fails_on_mixed():
    hs = HistorySet([history_from_outcomes("M", [0, 1, 1, 0, 1])])
    (verdict,) = run(hs, policy([("q1", ">=", 0, "fail")], gates=((3, "a"), (5, "b"))))
    assert verdict.overall == "fail"
    assert verdict.outcomes[0].status == "violated"
    assert verdict.outcomes[0].value == pytest.approx(-0.0666667, abs=1e-7)


def test_warn_severity():
    hs = HistorySet([history_from_outcomes("M", [0, 1, 1, 0, 1])])
    (verdict,) = run(hs, policy([("q1", ">=", 0, "warn")], gates=((3, "a"), (5, "b"))))
    assert verdict.overall == "warn"


@pytest.mark.parametrize("undefined, overall, status", [
    ("ignore", "pass", "skipped"),
    ("warn", "warn", "undefined"),
    ("fail", "fail", "undefined"),
])
def test_undefined_policy(undefined, overall, status):
    hs = HistorySet([history_from_outcomes("A", [1, 1, 1, 1])])
    (verdict,) = run(hs, policy([("q3", ">=", 10, "fail")], gates=((2, "a"), (4, "b")), undefined=undefined))
    assert verdict.overall == overall
    assert verdict.outcomes[0].status == status


def test_short_artifact_gets_out_of_range_entry():
    hs = HistorySet([paper_fixture(), history_from_outcomes("short", [1] * 800)])
    verdicts = run(hs, policy([("q2", ">=", 0, "fail")]))
    assert [(v.artifact, v.overall) for v in verdicts] == [("CCS", "pass"), ("short", "warn")]
    assert verdicts[1].outcomes[0].status == "out_of_range"
    assert "892" in verdicts[1].outcomes[0].detail


def test_single_gate_pairs_with_itself():
    hs = HistorySet([paper_fixture()])
    pol = policy([("q1", ">=", 0.9, "fail"), ("q3", ">=", 50, "fail")], gates=((892, "release"),))
    (verdict,) = run(hs, pol)
    q1_outcome, q3_outcome = verdict.outcomes
    assert q1_outcome.value == 0.0 and q1_outcome.status == "violated"
    assert q3_outcome.value == 64.0 and q3_outcome.status == "pass"
    assert verdict.overall == "fail"


def test_verdict_ordering():
    hs = generate(GeneratorConfig(artifacts=3, revisions=30, seed=3))
    pol = policy([("q1", ">=", -1, "fail")], gates=((10, "a"), (20, "b"), (30, "c")))
    verdicts = run(hs, pol)
    keys = [(v.artifact, v.gate_to.revision) for v in verdicts]
    assert keys == sorted(keys)
    assert len(verdicts) == 6


def test_rule_selectors_q4_q6():
    hs = generate(GeneratorConfig(artifacts=2, revisions=40, pass_probability=1.0, seed=12))
    pol = policy(
        [("q4:mccabe", ">=", -1, "fail"), ("q6:cutin", ">=", -1, "fail"), ("q5", ">=", -100, "fail")],
        gates=((20, "a"), (40, "b")),
    )
    for verdict in run(hs, pol):
        assert [o.status for o in verdict.outcomes] == ["pass", "pass", "pass"]


@pytest.mark.parametrize("rule", [
    ("q7", ">=", 0, "fail"),
    ("q4:sloc", ">=", 0, "fail"),
    ("q6", ">=", 0, "fail"),
    ("r_plus", ">=", 0, "fail"),
    ("q1", "==", 0, "fail"),
    ("q1", ">=", float("inf"), "fail"),
    ("q1", ">=", 0, "fatal"),
])
def test_rule_validation(rule):
    with pytest.raises(PolicyError):
        GateRule(*rule)


def test_empty_policy():
    with pytest.raises(EmptyPolicy):
        GatePolicy((), (GateRule("q1", ">=", 0),))
    with pytest.raises(EmptyPolicy):
        GatePolicy.from_json('{"gates": [], "rules": [{"metric":"q1","cmp":">=","threshold":0}]}')


def test_policy_json():
    text = json.dumps({
        "gates": [{"name": "alpha", "revision": 768}, {"name": "beta", "revision": 892}],
        "rules": [{"metric": "q2", "cmp": ">=", "threshold": 0, "severity": "fail"}],
        "undefined": "warn",
    })
    pol = GatePolicy.from_json(text)
    assert pol.revisions == [768, 892]
    assert GatePolicy.from_dict(pol.to_dict()) == pol
    with pytest.raises(PolicyError):
        GatePolicy.from_json('{"gates": [{"revision": 5}, {"revision": 3}], "rules": [{"metric":"q1","cmp":">=","threshold":0}]}')
    with pytest.raises(PolicyError):
        GatePolicy.from_json('{"gates": [{"revision": 5}], "rules": [], "extra": 1}')


def test_evaluation_is_pure():
    hs = generate(GeneratorConfig(artifacts=4, revisions=50, seed=21))
    pol = policy([("q1", ">=", 0, "fail"), ("q2", ">=", 0, "warn")], gates=((25, "a"), (50, "b")))
    reports = reports_for_policy(hs, pol)
    shuffled = dict(reversed(list(reports.items())))
    assert evaluate_gates(reports, pol) == evaluate_gates(shuffled, pol)


# -- heatmap -------------------------------------------------------------------------


def _reports(hs, gates):
    return {a: compute_report(h, gates) for a, h in hs.items()}


def test_min_max():
    assert min_max([0.2, 0.8]) == [0.0, 1.0]
    assert min_max([3.0]) == [0.5]
    assert min_max([None, 2.0, 2.0]) == [None, 0.5, 0.5]
    assert min_max([None]) == [None]


def test_heatmap_single_artifact():
    reports = _reports(HistorySet([history_from_outcomes("A", [1, 0])]), [2])
    text = render_heatmap_csv(build_heatmap(reports, ["r_plus"], 2))
    assert text.splitlines()[:2] == ["artifact,r_plus", "A,0.500000"]


def test_heatmap_endpoints():
    hs = HistorySet([
        history_from_outcomes("low", [1, 0, 0, 0, 0]),
        history_from_outcomes("high", [1, 1, 1, 1, 0]),
    ])
    text = render_heatmap_csv(build_heatmap(_reports(hs, [5]), ["r_plus"], 5))
    assert text == "artifact,r_plus\nhigh,1.000000\nlow,0.000000\n# raw\nartifact,r_plus\nhigh,0.8\nlow,0.2\n"


def test_heatmap_matches_oracle_normalization():
    hs = HistorySet([paper_fixture(), *generate(GeneratorConfig(artifacts=2, revisions=892, seed=5)).values()])
    selectors = ["r_plus", "neg_age", "q3", "q2"]
    reports = {a: compute_report(h, [768, 892]) for a, h in hs.items()}
    text = render_heatmap_csv(build_heatmap(reports, selectors, 892, baseline=768))
    norm_part, raw_part = text.split("# raw\n")
    rows = list(csv.reader(io.StringIO(norm_part)))
    raw_rows = list(csv.reader(io.StringIO(raw_part)))
    assert rows[0] == ["artifact", *selectors]
    for j, sel in enumerate(selectors, start=1):
        raw = [float(r[j]) if r[j] else None for r in raw_rows[1:]]
        defined = [x for x in raw if x is not None]
        lo, hi = min(defined), max(defined)
        for r, x in zip(rows[1:], raw):
            if x is None:
                assert r[j] == ""
            else:
                expected = 0.5 if lo == hi else (x - lo) / (hi - lo)
                assert float(r[j]) == pytest.approx(expected, abs=5e-7)


def test_heatmap_undefined_cells_empty():
    hs = HistorySet([history_from_outcomes("A", [1, 1]), history_from_outcomes("B", [0, 1])])
    text = render_heatmap_csv(build_heatmap(_reports(hs, [2]), ["mtbtf"], 2))
    assert text.splitlines()[1:3] == ["A,", "B,0.500000"]


def test_heatmap_monotone():
    hs = generate(GeneratorConfig(artifacts=6, revisions=60, pass_probability=0.5, seed=17))
    matrix = build_heatmap(_reports(hs, [60]), ["r_plus", "neg_age", "r_failures"], 60)
    for sel in matrix.columns:
        cells = [c for c in matrix.column(sel) if c.defined]
        assert all(0.0 <= c.normalized <= 1.0 for c in cells)
        raws = [c.raw for c in cells]
        norms = [c.normalized for c in cells]
        assert raws.index(max(raws)) == norms.index(max(norms))
        assert raws.index(min(raws)) == norms.index(min(norms))


def test_heatmap_errors():
    reports = _reports(HistorySet([history_from_outcomes("A", [1])]), [1])
    with pytest.raises(NoArtifacts):
        build_heatmap({}, ["r_plus"], 1)
    with pytest.raises(NoSelectors):
        build_heatmap(reports, [], 1)
    with pytest.raises(UnknownSelector):
        build_heatmap(reports, ["bogus"], 1)


# -- rendering -------------------------------------------------------------------------


def test_markdown_fixture_figures():
    reports = _reports(HistorySet([paper_fixture()]), [768, 892])
    text = render_report(reports, [], "markdown")
    for figure in ("192", "700", "743", "149", "124", "64"):
        assert figure in text
    assert "| Q2 | 124 | NotDecreased |" in text
    assert "| MTBTF (Q3) | 22.6667 | 64 |" in text


def test_empty_verdicts_base_only():
    reports = _reports(HistorySet([paper_fixture()]), [892])
    doc = json.loads(render_report(reports, [], "json"))
    assert doc["schema"] == "metametrics/1"
    assert doc["verdicts"] == []
    assert doc["artifacts"][0]["pairs"] == []
    assert doc["artifacts"][0]["gates"][0]["r_succeeded"] == 192


def test_render_is_deterministic():
    hs = generate(GeneratorConfig(artifacts=3, revisions=40, seed=8))
    pol = policy([("q1", ">=", 0, "fail"), ("q6:cutin", ">=", 0, "warn")], gates=((20, "a"), (40, "b")))
    reports = reports_for_policy(hs, pol)
    verdicts = evaluate_gates(reports, pol)
    for fmt in ("json", "markdown"):
        assert render_report(reports, verdicts, fmt) == render_report(reports, verdicts, fmt)


def test_json_round_trip():
    hs = generate(GeneratorConfig(artifacts=3, revisions=40, seed=8, missing_probability=0.05))
    reports = {a: compute_report(h, [10, 25, 40], ["mccabe", "uncovered"], ["cutin"]) for a, h in hs.items()}
    pol = policy([("q2", ">=", 0, "fail")], gates=((10, "a"), (25, "b")))
    verdicts = evaluate_gates(reports, pol)
    text = render_report(reports, verdicts, "json")
    parsed, raw_verdicts = parse_report_json(text)
    assert parsed == reports
    assert raw_verdicts == [v.to_dict() for v in verdicts]


def test_stamp_only_when_requested():
    reports = _reports(HistorySet([paper_fixture()]), [892])
    assert "generated_at" not in render_report(reports, [], "json")
    assert '"generated_at": "2026-01-01T00:00:00+00:00"' in render_report(
        reports, [], "json", stamp="2026-01-01T00:00:00+00:00"
    )
