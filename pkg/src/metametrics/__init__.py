"""Meta-metrics for per-revision test and simulation results."""

from metametrics.errors import MetaMetricsError
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
from metametrics.ingest import load_history_file, load_history_files, load_history_set, write_history_set
from metametrics.metrics import (
    MetricsReport,
    Verdict,
    acting_stddev,
    compute_report,
    last_failed,
    neg_age,
    q1,
    q2,
    q3_mtbtf,
    q4,
    q5,
    q6,
    r_failed,
    r_failures,
    r_succeeded,
    success_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "ArtifactHistory",
    "HistorySet",
    "IndicatorSample",
    "MetaMetricsError",
    "MetricsReport",
    "RevisionRecord",
    "TestOutcome",
    "Verdict",
    "acting_stddev",
    "build_history",
    "compute_report",
    "history_from_outcomes",
    "last_failed",
    "load_history_file",
    "load_history_files",
    "load_history_set",
    "neg_age",
    "prefix",
    "q1",
    "q2",
    "q3_mtbtf",
    "q4",
    "q5",
    "q6",
    "r_failed",
    "r_failures",
    "r_succeeded",
    "success_ratio",
    "write_history_set",
]
