from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metametrics.errors import DuplicateRevision, EmptyInput, GapInHistory, OutOfRange
from metametrics.history import (
    ArtifactHistory,
    HistorySet,
    IndicatorSample,
    RevisionRecord,
    TestOutcome,
    build_history,
    history_from_outcomes,
    prefix,
)

P, F = TestOutcome.PASS, TestOutcome.FAIL


def test_build_history_sorts():
    hs = build_history([RevisionRecord("A", 2, F), RevisionRecord("A", 1, P)])
    assert list(hs) == ["A"]
    assert hs["A"].n == 2
    assert hs["A"].outcomes == (1, 0)


def test_build_history_duplicate():
    with pytest.raises(DuplicateRevision) as err:
        build_history([RevisionRecord("A", 1, P), RevisionRecord("A", 1, F)])
    assert err.value == DuplicateRevision("A", 1)


def test_build_history_gap():
    with pytest.raises(GapInHistory) as err:
        build_history([RevisionRecord("A", 1, P), RevisionRecord("A", 3, P)])
    assert (err.value.artifact, err.value.missing) == ("A", 2)


def test_build_history_gap_at_start():
    with pytest.raises(GapInHistory) as err:
        build_history([RevisionRecord("B", 2, P)])
    assert err.value.missing == 1


def test_build_history_empty():
    with pytest.raises(EmptyInput):
        build_history([])


def test_multiple_artifacts_sorted():
    hs = build_history([RevisionRecord("z", 1, P), RevisionRecord("a", 1, F), RevisionRecord("m", 1, P)])
    assert list(hs) == ["a", "m", "z"]


def test_prefix():
    h = history_from_outcomes("A", [1, 0, 1])
    assert prefix(h, 2).outcomes == (1, 0)
    assert prefix(h, 3) == h
    with pytest.raises(OutOfRange) as err:
        prefix(h, 4)
    assert (err.value.n, err.value.total) == (4, 3)
    with pytest.raises(OutOfRange):
        prefix(h, 0)


@pytest.mark.parametrize("bad", ["", "   ", None])
def test_artifact_id_rejected(bad):
    with pytest.raises(ValueError):
        RevisionRecord(bad, 1, P)


def test_revision_must_be_positive():
    with pytest.raises(ValueError):
        RevisionRecord("A", 0, P)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"sloc": 0},
        {"misra_warnings": -1},
        {"mccabe": 0},
        {"uncovered": -3},
        {"duration": -0.1},
        {"duration": float("nan")},
        {"acting": {"s": -1.0}},
        {"acting": {"": 1.0}},
        {"sloc": 1.5},
    ],
)
def test_indicator_validation(kwargs):
    with pytest.raises((ValueError, TypeError)):
        IndicatorSample(**kwargs)


def test_indicator_sample_is_immutable():
    sample = IndicatorSample(acting={"a": 1.0})
    with pytest.raises(TypeError):
        sample.acting["b"] = 2.0  # type: ignore[index]


def test_history_rejects_foreign_record():
    with pytest.raises(ValueError):
        ArtifactHistory("A", (RevisionRecord("B", 1, P),))


def test_history_set_key_must_match():
    h = history_from_outcomes("A", [1])
    with pytest.raises(ValueError):
        HistorySet({"B": h})


outcome_lists = st.lists(st.integers(0, 1), min_size=1, max_size=40)


@given(outcome_lists, st.randoms(use_true_random=False))
def test_build_history_permutation_invariant(outcomes, rnd):
    records = [RevisionRecord("A", i + 1, TestOutcome.from_res(r)) for i, r in enumerate(outcomes)]
    records += [RevisionRecord("B", i + 1, TestOutcome.from_res(1 - r)) for i, r in enumerate(outcomes)]
    shuffled = list(records)
    rnd.shuffle(shuffled)
    assert build_history(shuffled) == build_history(records)


@given(outcome_lists)
def test_positions_are_revisions(outcomes):
    h = history_from_outcomes("A", outcomes)
    assert [r.revision for r in h.records] == list(range(1, len(outcomes) + 1))


@given(outcome_lists, st.data())
def test_prefix_composition(outcomes, data):
    h = history_from_outcomes("A", outcomes)
    m = data.draw(st.integers(1, h.n))
    n = data.draw(st.integers(1, m))
    assert prefix(h, h.n) == h
    assert prefix(prefix(h, m), n) == prefix(h, n)


def test_permutation_random_corpus(corpus):
    rnd = random.Random(7)
    records = [r for h in corpus[:6] for r in h.records]
    expected = build_history(records)
    rnd.shuffle(records)
    assert build_history(records) == expected
