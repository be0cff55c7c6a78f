"""Metric rules checked against hand-built synthetic traces.

The expected values below are forced by the metric definitions alone:
reaction, repair, and recovery are time differences between specific
records, and outage is reaction + recovery.
"""

import pytest

from kubeavail.engine import EventKind, EventRecord, Trace
from kubeavail.metrics import (AggregateReport, IncompleteTraceError,
                               MetricsReport, ServiceHealth,
                               UnsupportedTraceError, aggregate, classify,
                               compute_metrics, csv_row, derive_timeline)

K = EventKind


def _trace(*specs):
    records = tuple(
        EventRecord(time, seq, kind, subject, detail)
        for seq, (time, kind, subject, *rest) in enumerate(specs)
        for detail in [rest[0] if rest else ""]
    )
    return Trace(records, seed=0)


def test_classification_rules():
    assert classify([]) is ServiceHealth.UNAVAILABLE
    assert classify([True]) is ServiceHealth.AVAILABLE
    assert classify([True, True]) is ServiceHealth.AVAILABLE
    assert classify([True, False]) is ServiceHealth.DEGRADED
    assert classify([False, False]) is ServiceHealth.UNAVAILABLE


def test_single_replica_app_failure_arithmetic():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.5, K.ENDPOINT_REMOVED, "pod-1"),
        (103.0, K.STREAM_STARTED, "pod-1"),
        (103.2, K.ENDPOINT_ADDED, "pod-1"),
    )
    report = compute_metrics(trace)
    assert report.reaction == pytest.approx(0.5)
    assert report.repair == pytest.approx(2.5)
    assert report.recovery == pytest.approx(2.7)
    assert report.outage == pytest.approx(3.2)
    assert report.degraded_loss == 0.0


def test_two_replica_app_failure_recovery_is_exactly_zero():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (0.0, K.ENDPOINT_ADDED, "pod-2", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.5, K.ENDPOINT_REMOVED, "pod-1"),
        (101.0, K.STREAM_STARTED, "pod-1"),
    )
    report = compute_metrics(trace)
    assert report.reaction == pytest.approx(0.5)
    assert report.recovery == 0.0
    assert report.outage == report.reaction
    assert report.degraded_loss == pytest.approx(0.25)  # 0.5 s degraded, 1 of 2 dead


def test_sandbox_failure_reaction_is_the_detection_record():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "pod-container"),
        (100.4, K.POD_SCHEDULED_FOR_TERMINATION, "pod-1", "sandbox-missing"),
        (100.43, K.ENDPOINT_REMOVED, "pod-1"),
        (130.4, K.POD_TERMINATED, "pod-1"),
        (131.4, K.STREAM_STARTED, "pod-2"),
        (131.7, K.ENDPOINT_ADDED, "pod-2"),
    )
    report = compute_metrics(trace)
    assert report.reaction == pytest.approx(0.4)
    assert report.repair == pytest.approx(31.0)
    assert report.recovery == pytest.approx(31.3)
    assert report.outage == pytest.approx(31.7)


def test_node_failure_reaction_is_the_not_ready_mark():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (120.0, K.FAILURE_INJECTED, "node-1", "node"),
        (158.0, K.NODE_MARKED_NOT_READY, "node-1"),
        (158.03, K.ENDPOINT_REMOVED, "pod-1"),
        (419.0, K.STREAM_STARTED, "pod-2"),
        (420.0, K.ENDPOINT_ADDED, "pod-2"),
    )
    report = compute_metrics(trace)
    assert report.reaction == pytest.approx(38.0)
    assert report.repair == pytest.approx(261.0)
    assert report.recovery == pytest.approx(262.0)
    assert report.outage == pytest.approx(300.0)


def test_outage_is_reaction_plus_recovery_exactly():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.7, K.ENDPOINT_REMOVED, "pod-1"),
        (101.1, K.STREAM_STARTED, "pod-1"),
        (102.3, K.ENDPOINT_ADDED, "pod-1"),
    )
    report = compute_metrics(trace)
    assert report.outage == report.reaction + report.recovery


def test_scenario_cross_check_rejects_mismatch():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.5, K.ENDPOINT_REMOVED, "pod-1"),
        (101.0, K.STREAM_STARTED, "pod-1"),
        (101.2, K.ENDPOINT_ADDED, "pod-1"),
    )
    assert compute_metrics(trace, "app-container")
    with pytest.raises(UnsupportedTraceError):
        compute_metrics(trace, "node")


def test_traces_without_exactly_one_failure():
    empty = _trace((0.0, K.ENDPOINT_ADDED, "pod-1", "initial"))
    with pytest.raises(UnsupportedTraceError):
        compute_metrics(empty)
    double = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (10.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (20.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
    )
    with pytest.raises(UnsupportedTraceError):
        compute_metrics(double)
    with pytest.raises(UnsupportedTraceError):
        derive_timeline(double, replicas=1)


def test_truncated_trace_is_reported_incomplete():
    truncated = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.5, K.ENDPOINT_REMOVED, "pod-1"),
    )
    with pytest.raises(IncompleteTraceError):
        compute_metrics(truncated)


def test_timeline_single_replica_goes_unavailable():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.5, K.ENDPOINT_REMOVED, "pod-1"),
        (101.0, K.STREAM_STARTED, "pod-1"),
        (103.2, K.ENDPOINT_ADDED, "pod-1"),
    )
    timeline = derive_timeline(trace, replicas=1)
    states = [(iv.start, iv.end, iv.state) for iv in timeline.intervals]
    assert states == [
        (0.0, 100.0, ServiceHealth.AVAILABLE),
        (100.0, 103.2, ServiceHealth.UNAVAILABLE),
        (103.2, 103.2, ServiceHealth.AVAILABLE),
    ]
    assert timeline.state_at(102.0) is ServiceHealth.UNAVAILABLE


def test_timeline_two_replicas_degrades_until_stale_removal():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (0.0, K.ENDPOINT_ADDED, "pod-2", "initial"),
        (100.0, K.FAILURE_INJECTED, "pod-1", "app-container"),
        (100.579, K.ENDPOINT_REMOVED, "pod-1"),
        (101.0, K.STREAM_STARTED, "pod-1"),
        (101.3, K.ENDPOINT_ADDED, "pod-1"),
    )
    timeline = derive_timeline(trace, replicas=2)
    assert timeline.intervals[1].state is ServiceHealth.DEGRADED
    assert timeline.intervals[1].end - timeline.intervals[1].start == pytest.approx(0.579)
    assert ServiceHealth.UNAVAILABLE not in {iv.state for iv in timeline.intervals}


def test_timeline_without_failure_is_one_available_interval():
    trace = _trace(
        (0.0, K.ENDPOINT_ADDED, "pod-1", "initial"),
        (50.0, K.HEARTBEAT_POSTED, "node-1"),
    )
    timeline = derive_timeline(trace, replicas=1)
    assert [iv.state for iv in timeline.intervals] == [ServiceHealth.AVAILABLE]
    assert timeline.intervals[0].end == 50.0


def test_aggregate_means():
    reports = [MetricsReport(1, 1, 1, 2), MetricsReport(3, 3, 3, 6)]
    agg = aggregate(reports, seeds=(1, 2))
    assert (agg.reaction, agg.repair, agg.recovery, agg.outage) == (2, 2, 2, 4)
    assert agg.count == 2 and agg.seeds == (1, 2)


def test_aggregate_single_report_is_identity():
    report = MetricsReport(0.5, 2.5, 2.7, 3.2)
    agg = aggregate([report])
    assert (agg.reaction, agg.repair, agg.recovery, agg.outage) == (0.5, 2.5, 2.7, 3.2)


def test_aggregate_rejects_empty_input():
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_missing_repair_stays_missing():
    agg = aggregate([MetricsReport(1, None, 1, 2), MetricsReport(1, None, 1, 2)])
    assert agg.repair is None


def test_csv_row_format():
    report = MetricsReport(0.5, 2.5, 2.7, 3.2)
    row = csv_row("app-container", "default", 1, 42, report)
    assert row == "app-container,default,1,42,0.500000,2.500000,2.700000,3.200000"
    amf = MetricsReport(0.65, None, 0.145, 0.795)
    assert csv_row("process", "amf", None, 7, amf) == \
        "process,amf,,7,0.650000,,0.145000,0.795000"


def test_aggregate_report_is_a_metrics_like_record():
    agg = AggregateReport(1.0, None, 2.0, 3.0, count=1)
    assert csv_row("vm", "amf", None, None, agg).endswith(",1.000000,,2.000000,3.000000")
