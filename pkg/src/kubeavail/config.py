"""Control-plane timer and latency profiles.

Timers (heartbeat interval, monitor period, grace period, eviction wait) are
software clocks and run exactly as configured.  The sub-second latencies are
measured-world constants and receive multiplicative jitter when drawn.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional


@dataclass(frozen=True)
class ConfigProfile:
    """Every timer and latency of the modeled control plane, in seconds."""

    heartbeat_interval: float = 10.0
    allowed_missed_updates: int = 4
    node_monitor_period: float = 5.0
    eviction_wait: float = 260.0
    grace_period: float = 30.0
    force_kill_floor: float = 2.0
    kubelet_sync_period: float = 1.0
    endpoint_propagation_latency: float = 0.030
    container_restart_latency: float = 0.47
    pod_creation_latency: float = 0.7
    stream_start_latency: float = 0.3
    readiness_latency: float = 0.25
    jitter_fraction: float = 0.1

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value < 0:
                raise ValueError(f"{f.name} must be non-negative, got {value}")
        if self.allowed_missed_updates < 1:
            raise ValueError("allowed_missed_updates must be at least 1")
        if not 0 <= self.jitter_fraction < 1:
            raise ValueError("jitter_fraction must lie in [0, 1)")

    @property
    def termination_delay(self) -> float:
        """Effective graceful-termination delay before a force kill."""
        return max(self.grace_period, self.force_kill_floor)

    def replace(self, **overrides) -> "ConfigProfile":
        return dataclasses.replace(self, **overrides)


# "default" mirrors stock control-plane settings; "responsive" posts and reads
# node status every second, tolerates a single miss, and replaces after 1 s.
BUILTIN_PROFILES: Mapping[str, ConfigProfile] = {
    "default": ConfigProfile(),
    "responsive": ConfigProfile(
        heartbeat_interval=1.0,
        allowed_missed_updates=1,
        node_monitor_period=1.0,
        eviction_wait=1.0,
    ),
}


def get_profile(name: str = "default",
                overrides: Optional[Mapping[str, float]] = None,
                extra_profiles: Optional[Mapping[str, ConfigProfile]] = None) -> ConfigProfile:
    """Look up a named profile and apply field overrides."""
    table = dict(BUILTIN_PROFILES)
    if extra_profiles:
        table.update(extra_profiles)
    if name not in table:
        known = ", ".join(sorted(table))
        raise ValueError(f"unknown profile {name!r} (known: {known})")
    profile = table[name]
    if overrides:
        profile = profile.replace(**dict(overrides))
    return profile


def load_config(path: str | Path) -> dict:
    """Load the runner's JSON configuration document.

    Schema: ``{"profiles": {name: {field: value}}, "experiment": {...}}``,
    both sections optional.  Profiles extend the built-ins; the experiment
    section provides defaults that command-line flags override.
    """
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: configuration root must be a JSON object")
    profiles = {}
    for name, fields in raw.get("profiles", {}).items():
        base = fields.pop("base", "default")
        profiles[name] = get_profile(base, overrides=fields)
    experiment = raw.get("experiment", {})
    if not isinstance(experiment, dict):
        raise ValueError(f"{path}: 'experiment' must be a JSON object")
    return {"profiles": profiles, "experiment": experiment}
