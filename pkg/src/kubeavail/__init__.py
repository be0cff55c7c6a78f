"""Deterministic discrete-event simulator of Kubernetes-style availability
management: failure injection, control-loop replay, and outage metrics."""

from .amf import AmfProfile, AmfScenarioKind, AmfTimings, DEFAULT_AMF_PROFILE, run_amf
from .cluster import (Cluster, ClusterState, ContainerState, DeploymentSpec,
                      NodeState, NodeStatus, PodPhase, PodState,
                      RedundancyModel, ServiceState, build_cluster)
from .config import BUILTIN_PROFILES, ConfigProfile, get_profile, load_config
from .engine import (EventKind, EventRecord, SimTime, SimulationEngine, Trace,
                     RECORDED_KINDS)
from .failures import FailureKind, FailureScenario, InjectionError, TargetSelector, inject
from .metrics import (AggregateReport, IncompleteTraceError, MetricsReport,
                      ServiceHealth, ServiceTimeline, TimelineInterval,
                      UnsupportedTraceError, aggregate, classify,
                      compute_metrics, csv_row, derive_timeline)
from .runner import (ExperimentSpec, OutputTable, RunValidationError,
                     check_tables, compare, emit, reproduce_tables,
                     run_experiment, simulate_once)

__version__ = "0.1.0"

__all__ = [
    "AggregateReport", "AmfProfile", "AmfScenarioKind", "AmfTimings",
    "BUILTIN_PROFILES", "Cluster", "ClusterState", "ConfigProfile",
    "ContainerState", "DEFAULT_AMF_PROFILE", "DeploymentSpec", "EventKind",
    "EventRecord", "ExperimentSpec", "FailureKind", "FailureScenario",
    "IncompleteTraceError", "InjectionError", "MetricsReport", "NodeState",
    "NodeStatus", "OutputTable", "PodPhase", "PodState", "RECORDED_KINDS",
    "RedundancyModel", "RunValidationError", "ServiceHealth", "ServiceState",
    "ServiceTimeline", "SimTime", "SimulationEngine", "TargetSelector",
    "TimelineInterval", "Trace", "UnsupportedTraceError", "aggregate",
    "build_cluster", "check_tables", "classify", "compare", "compute_metrics",
    "csv_row", "derive_timeline", "emit", "get_profile", "inject",
    "load_config", "reproduce_tables", "run_amf", "run_experiment",
    "simulate_once",
]
