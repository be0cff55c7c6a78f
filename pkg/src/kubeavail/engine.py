"""Deterministic discrete-event engine.

One engine instance owns a virtual clock, an ordered event queue, a single
seeded random stream, and the trace of everything that happened.  Events are
dispatched in (time, seq) order, where seq is assigned at scheduling time, so
two runs with the same seed and the same program of work produce identical
traces byte for byte.

Kinds whose value starts with an underscore are internal timers: they are
dispatched like any other event but never appear in the trace.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from enum import Enum, unique
from typing import Callable, Iterator, Optional

SimTime = float

_PENDING, _FIRED, _CANCELLED = 0, 1, 2


@unique
class EventKind(Enum):
    FAILURE_INJECTED = "FailureInjected"
    CONTAINER_DIED = "ContainerDied"
    ENDPOINT_REMOVED = "EndpointRemoved"
    ENDPOINT_ADDED = "EndpointAdded"
    NODE_MARKED_NOT_READY = "NodeMarkedNotReady"
    POD_SCHEDULED_FOR_TERMINATION = "PodScheduledForTermination"
    POD_TERMINATED = "PodTerminated"
    POD_CREATED = "PodCreated"
    CONTAINER_STARTED = "ContainerStarted"
    STREAM_STARTED = "StreamStarted"
    POD_READY = "PodReady"
    HEARTBEAT_POSTED = "HeartbeatPosted"
    SERVICE_STATE_CHANGED = "ServiceStateChanged"
    # internal timers, dispatched but not recorded
    KUBELET_SYNC = "_KubeletSync"
    NODE_MONITOR = "_NodeMonitor"
    REPLACEMENT_DUE = "_ReplacementDue"


RECORDED_KINDS = frozenset(k for k in EventKind if not k.value.startswith("_"))


@dataclass(frozen=True)
class EventRecord:
    """One timestamped occurrence in a run; (time, seq) is unique per run."""

    time: SimTime
    seq: int
    kind: EventKind
    subject: str
    detail: str = ""


@dataclass(frozen=True)
class Trace:
    """Immutable, (time, seq)-ordered log of a completed run."""

    records: tuple[EventRecord, ...]
    seed: int

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def of(self, kind: EventKind, subject: Optional[str] = None) -> tuple[EventRecord, ...]:
        """All records of a kind, optionally filtered by subject."""
        return tuple(
            r for r in self.records
            if r.kind is kind and (subject is None or r.subject == subject)
        )


class EventHandle:
    """Returned by ``schedule``; usable for cancellation."""

    __slots__ = ("time", "seq", "kind", "subject", "detail", "action", "periodic", "_state")

    def __init__(self, time: SimTime, seq: int, kind: EventKind, subject: str,
                 detail: str, action: Optional[Callable[[], None]], periodic: bool):
        self.time = time
        self.seq = seq
        self.kind = kind
        self.subject = subject
        self.detail = detail
        self.action = action
        self.periodic = periodic
        self._state = _PENDING

    @property
    def pending(self) -> bool:
        return self._state == _PENDING


class SimulationEngine:
    """Single-threaded virtual-time event loop with seeded randomness."""

    def __init__(self, seed: int, max_events: int = 1_000_000):
        self.rng = random.Random(seed)
        self.seed = seed
        self.max_events = max_events
        self._clock: SimTime = 0.0
        self._seq = 0
        self._queue: list[tuple[SimTime, int, EventHandle]] = []
        self._records: list[EventRecord] = []
        self._dispatched = 0
        self._pending_work = 0  # pending non-periodic events

    @property
    def now(self) -> SimTime:
        return self._clock

    @property
    def pending_work(self) -> int:
        """Number of pending events that are not periodic maintenance ticks."""
        return self._pending_work

    def schedule(self, kind: EventKind, subject: str, at: SimTime, detail: str = "",
                 action: Optional[Callable[[], None]] = None,
                 periodic: bool = False) -> EventHandle:
        """Enqueue an event; scheduling in the past is a programming error."""
        if at < self._clock:
            raise ValueError(
                f"cannot schedule {kind.value} at t={at}: clock is at t={self._clock}"
            )
        handle = EventHandle(at, self._seq, kind, subject, detail, action, periodic)
        self._seq += 1
        heapq.heappush(self._queue, (at, handle.seq, handle))
        if not periodic:
            self._pending_work += 1
        return handle

    def cancel(self, handle: Optional[EventHandle]) -> bool:
        """Remove a pending event; False if it already fired or was cancelled."""
        if handle is None or handle._state != _PENDING:
            return False
        handle._state = _CANCELLED
        if not handle.periodic:
            self._pending_work -= 1
        return True

    def run(self, until: Optional[SimTime] = None,
            quiescent: Optional[Callable[[], bool]] = None) -> Trace:
        """Dispatch events in (time, seq) order and return the trace so far.

        With ``until`` set, stops once the next event lies beyond it.  With
        ``quiescent`` given, also stops as soon as no non-periodic work is
        pending and ``quiescent()`` is true.  Exceeding the event budget
        signals a non-terminating loop.
        """
        while self._queue:
            at, _, handle = self._queue[0]
            if until is not None and at > until:
                break
            heapq.heappop(self._queue)
            if handle._state != _PENDING:
                continue
            handle._state = _FIRED
            self._clock = at
            self._dispatched += 1
            if self._dispatched > self.max_events:
                raise RuntimeError(
                    f"event budget of {self.max_events} exceeded at t={at}: "
                    "likely a non-terminating loop"
                )
            if handle.kind in RECORDED_KINDS:
                self._records.append(
                    EventRecord(at, handle.seq, handle.kind, handle.subject, handle.detail)
                )
            if not handle.periodic:
                self._pending_work -= 1
            if handle.action is not None:
                handle.action()
            if quiescent is not None and self._pending_work == 0 and quiescent():
                break
        return Trace(tuple(self._records), self.seed)
