"""Compact model of an AMF-managed deployment used as a baseline.

One active unit plus a spare: a failure is detected after a per-scenario
detection latency and the spare takes over after a failover latency, so the
outage is their sum and no repair time is measured.  The model is calibrated
directly on aggregate measurements rather than simulating middleware
internals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum, unique
from types import MappingProxyType
from typing import Mapping

from .metrics import MetricsReport


@unique
class AmfScenarioKind(Enum):
    PROCESS_FAILURE = "process"
    VM_FAILURE = "vm"
    HOST_FAILURE = "host"


@dataclass(frozen=True)
class AmfTimings:
    detection: float
    failover: float

    def __post_init__(self):
        if self.detection < 0 or self.failover < 0:
            raise ValueError("AMF latencies must be non-negative")


@dataclass(frozen=True)
class AmfProfile:
    timings: Mapping[AmfScenarioKind, AmfTimings]
    jitter_fraction: float = 0.02

    def __post_init__(self):
        if not 0 <= self.jitter_fraction < 1:
            raise ValueError("jitter_fraction must lie in [0, 1)")


DEFAULT_AMF_PROFILE = AmfProfile(timings=MappingProxyType({
    AmfScenarioKind.PROCESS_FAILURE: AmfTimings(detection=0.650, failover=0.145),
    AmfScenarioKind.VM_FAILURE: AmfTimings(detection=3.233, failover=0.123),
    AmfScenarioKind.HOST_FAILURE: AmfTimings(detection=3.229, failover=0.118),
}))


def run_amf(kind: AmfScenarioKind, profile: AmfProfile = DEFAULT_AMF_PROFILE,
            seed: int = 0) -> MetricsReport:
    """One simulated AMF run: jittered detection, spare takeover, no repair."""
    timings = profile.timings[kind]
    rng = random.Random(seed)
    f = profile.jitter_fraction
    reaction = timings.detection * (1.0 + rng.uniform(-f, f))
    recovery = timings.failover * (1.0 + rng.uniform(-f, f))
    return MetricsReport(reaction=reaction, repair=None, recovery=recovery,
                         outage=reaction + recovery)
