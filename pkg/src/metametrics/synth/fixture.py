"""The CCS reference history (892 revisions).

Only aggregate figures of the original history are known, so the sequence
below is the fixed minimal pass/fail run pattern consistent with all of them:
192 passes, last failure at 743, fail->pass transitions at 100, 300 and 743.
"""

from __future__ import annotations

from metametrics.history import ArtifactHistory, RevisionRecord, TestOutcome

FIXTURE_ARTIFACT = "CCS"
FIXTURE_REVISIONS = 892

# (first revision, last revision, outcome), inclusive
FIXTURE_RUNS = (
    (1, 100, TestOutcome.FAIL),
    (101, 121, TestOutcome.PASS),
    (122, 300, TestOutcome.FAIL),
    (301, 322, TestOutcome.PASS),
    (323, 743, TestOutcome.FAIL),
    (744, 892, TestOutcome.PASS),
)


def paper_fixture() -> ArtifactHistory:
    records = [
        RevisionRecord(FIXTURE_ARTIFACT, i, outcome)
        for first, last, outcome in FIXTURE_RUNS
        for i in range(first, last + 1)
    ]
    return ArtifactHistory(FIXTURE_ARTIFACT, tuple(records))
