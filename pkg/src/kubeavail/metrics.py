"""Availability metrics derived from a simulation trace.

The trace is the sole input: the failure kind is read from the
``FailureInjected`` record and the replica count from the endpoint
population before the failure.

Metric definitions, anchored on the first reaction to the failure:

* reaction  -- failure event to the first reaction.  The first-reaction
  record depends on the failure kind: the failed pod's ``EndpointRemoved``
  for an app-container kill, the kubelet's pod-gone detection
  (``PodScheduledForTermination``) for a pod-sandbox kill, and
  ``NodeMarkedNotReady`` for a node crash.
* repair    -- first reaction to the repaired pod streaming again
  (first ``StreamStarted`` after the failure).
* recovery  -- first reaction to the service being routable again: the
  restoring ``EndpointAdded`` with a single replica, or the stale
  ``EndpointRemoved`` with two or more (the surviving replicas already
  serve; dropping the dead endpoint restores full service).
* outage    -- reaction + recovery, exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, unique
from statistics import fmean
from typing import Iterable, Optional, Sequence

from .engine import EventKind, EventRecord, Trace

APP_CONTAINER = "app-container"
POD_CONTAINER = "pod-container"
NODE = "node"
SCENARIO_KINDS = (APP_CONTAINER, POD_CONTAINER, NODE)


class UnsupportedTraceError(ValueError):
    """Trace does not contain exactly the failure structure metrics expect."""


class IncompleteTraceError(ValueError):
    """Trace is missing a constituent event (run truncated)."""


@unique
class ServiceHealth(Enum):
    AVAILABLE = "Available"
    DEGRADED = "Degraded"
    UNAVAILABLE = "Unavailable"


def classify(endpoint_healths: Iterable[bool]) -> ServiceHealth:
    """Service classification from per-endpoint health under round-robin
    routing: no routable endpoint is an outage, a mix of live and dead
    endpoints degrades the service, all-live is full availability."""
    flags = list(endpoint_healths)
    if not flags:
        return ServiceHealth.UNAVAILABLE
    if all(flags):
        return ServiceHealth.AVAILABLE
    if any(flags):
        return ServiceHealth.DEGRADED
    return ServiceHealth.UNAVAILABLE


@dataclass(frozen=True)
class TimelineInterval:
    start: float
    end: float
    state: ServiceHealth


@dataclass(frozen=True)
class ServiceTimeline:
    """Contiguous, non-overlapping service-state intervals for one run."""

    intervals: tuple[TimelineInterval, ...]

    def state_at(self, t: float) -> ServiceHealth:
        for iv in self.intervals:
            if iv.start <= t < iv.end:
                return iv.state
        return self.intervals[-1].state


@dataclass(frozen=True)
class MetricsReport:
    """Reaction, repair, recovery, and outage for one run, in seconds.

    ``repair`` is None for systems where it is not measured.
    ``degraded_loss`` is the expected lost-request fraction integrated over
    the degraded interval (round-robin routing); it never enters outage.
    """

    reaction: float
    repair: Optional[float]
    recovery: float
    outage: float
    degraded_loss: float = 0.0


@dataclass(frozen=True)
class AggregateReport:
    """Per-metric arithmetic means over repeated runs."""

    reaction: float
    repair: Optional[float]
    recovery: float
    outage: float
    count: int
    seeds: tuple[int, ...] = ()
    runs: tuple[MetricsReport, ...] = ()


CSV_HEADER = "scenario,profile,replicas,seed,reaction,repair,recovery,outage"


def csv_row(scenario: str, profile: str, replicas: Optional[int], seed: Optional[int],
            report: MetricsReport | AggregateReport) -> str:
    """One CSV row in the canonical format; non-applicable fields are empty."""
    cells = [
        scenario,
        profile,
        "" if replicas is None else str(replicas),
        "" if seed is None else str(seed),
        f"{report.reaction:.6f}",
        "" if report.repair is None else f"{report.repair:.6f}",
        f"{report.recovery:.6f}",
        f"{report.outage:.6f}",
    ]
    return ",".join(cells)


def _single_failure(trace: Trace) -> Optional[EventRecord]:
    failures = trace.of(EventKind.FAILURE_INJECTED)
    if len(failures) > 1:
        raise UnsupportedTraceError(f"trace contains {len(failures)} injected failures")
    return failures[0] if failures else None


def _first_after(trace: Trace, anchor: EventRecord, kind: EventKind,
                 subject: Optional[str] = None) -> Optional[EventRecord]:
    for r in trace.records:
        if (r.time, r.seq) <= (anchor.time, anchor.seq):
            continue
        if r.kind is kind and (subject is None or r.subject == subject):
            return r
    return None


def _replicas_before(trace: Trace, failure: EventRecord) -> int:
    return sum(
        1 for r in trace.records
        if r.kind is EventKind.ENDPOINT_ADDED and (r.time, r.seq) < (failure.time, failure.seq)
    )


def derive_timeline(trace: Trace, replicas: int) -> ServiceTimeline:
    """Service-state intervals for a run with at most one injected failure.

    With one replica the service is unavailable from the failure until the
    restoring endpoint addition; with two or more it is merely degraded until
    the stale endpoint is dropped.  A failure-free trace is a single
    available interval.
    """
    horizon = trace.records[-1].time if trace.records else 0.0
    failure = _single_failure(trace)
    if failure is None:
        return ServiceTimeline((TimelineInterval(0.0, horizon, ServiceHealth.AVAILABLE),))

    if replicas == 1:
        impact = ServiceHealth.UNAVAILABLE
        end_event = _first_after(trace, failure, EventKind.ENDPOINT_ADDED)
    else:
        impact = ServiceHealth.DEGRADED
        end_event = _first_after(trace, failure, EventKind.ENDPOINT_REMOVED)

    intervals: list[TimelineInterval] = []
    if failure.time > 0.0:
        intervals.append(TimelineInterval(0.0, failure.time, ServiceHealth.AVAILABLE))
    if end_event is None:  # truncated run: impact persists to the horizon
        intervals.append(TimelineInterval(failure.time, horizon, impact))
    else:
        intervals.append(TimelineInterval(failure.time, end_event.time, impact))
        intervals.append(TimelineInterval(end_event.time, horizon, ServiceHealth.AVAILABLE))
    return ServiceTimeline(tuple(intervals))


def compute_metrics(trace: Trace, scenario: Optional[object] = None) -> MetricsReport:
    """Compute the four per-run metrics from a trace with exactly one failure.

    ``scenario`` is an optional cross-check: when given, its kind must match
    the failure kind recorded in the trace.
    """
    failure = _single_failure(trace)
    if failure is None:
        raise UnsupportedTraceError("trace contains no injected failure")
    kind = failure.detail
    if kind not in SCENARIO_KINDS:
        raise UnsupportedTraceError(f"unknown failure kind {kind!r} in trace")
    if scenario is not None:
        wanted = getattr(getattr(scenario, "kind", scenario), "value", scenario)
        if wanted != kind:
            raise UnsupportedTraceError(f"trace holds a {kind} failure, not {wanted}")

    replicas = _replicas_before(trace, failure)
    if replicas < 1:
        raise UnsupportedTraceError("no endpoints were populated before the failure")

    if kind == APP_CONTAINER:
        first_reaction = _first_after(trace, failure, EventKind.ENDPOINT_REMOVED, failure.subject)
    elif kind == POD_CONTAINER:
        first_reaction = _first_after(
            trace, failure, EventKind.POD_SCHEDULED_FOR_TERMINATION, failure.subject)
    else:
        first_reaction = _first_after(trace, failure, EventKind.NODE_MARKED_NOT_READY, failure.subject)
    if first_reaction is None:
        raise IncompleteTraceError(f"no first-reaction event for {kind} failure")

    repaired = _first_after(trace, failure, EventKind.STREAM_STARTED)
    if repaired is None:
        raise IncompleteTraceError("no repaired stream in trace")

    degraded_loss = 0.0
    if replicas == 1:
        restored = _first_after(trace, failure, EventKind.ENDPOINT_ADDED)
        if restored is None:
            raise IncompleteTraceError("no restoring endpoint addition in trace")
        recovery = restored.time - first_reaction.time
    else:
        stale = _first_after(trace, failure, EventKind.ENDPOINT_REMOVED)
        if stale is None:
            raise IncompleteTraceError("no stale endpoint removal in trace")
        recovery = stale.time - first_reaction.time
        degraded_loss = (stale.time - failure.time) / replicas

    reaction = first_reaction.time - failure.time
    repair = repaired.time - first_reaction.time
    return MetricsReport(
        reaction=reaction,
        repair=repair,
        recovery=recovery,
        outage=reaction + recovery,
        degraded_loss=degraded_loss,
    )


def aggregate(reports: Sequence[MetricsReport], seeds: Sequence[int] = ()) -> AggregateReport:
    """Arithmetic mean per metric; repair averages only when present everywhere."""
    if not reports:
        raise ValueError("cannot aggregate an empty list of reports")
    repairs = [r.repair for r in reports]
    return AggregateReport(
        reaction=fmean(r.reaction for r in reports),
        repair=None if any(x is None for x in repairs) else fmean(repairs),
        recovery=fmean(r.recovery for r in reports),
        outage=fmean(r.outage for r in reports),
        count=len(reports),
        seeds=tuple(seeds),
        runs=tuple(reports),
    )
