"""Failure injection: turn a declarative scenario into engine events.

Three failure kinds, all applied at a chosen virtual time:

* app-container kill: the application process inside the pod dies; the
  stream stops immediately and the kubelet restarts the container in place.
* pod-container kill: the pod sandbox process dies; the app container keeps
  running until its termination signal, but the pod is doomed and the
  service impact is accounted from the injection.
* node crash: the node stops cold; no further heartbeats, its containers
  stop serving, and its pending work is cancelled.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, unique
from typing import Union

from . import metrics
from .cluster import Cluster, ContainerState, NodeStatus, PodPhase
from .engine import EventKind, SimTime


class InjectionError(ValueError):
    """Scenario cannot be applied to the current cluster state."""


@unique
class FailureKind(Enum):
    APP_CONTAINER_KILL = metrics.APP_CONTAINER
    POD_SANDBOX_KILL = metrics.POD_CONTAINER
    NODE_CRASH = metrics.NODE


@unique
class TargetSelector(Enum):
    FIRST_POD = "first-pod"
    NODE_HOSTING_FIRST_POD = "node-hosting-first-pod"


@dataclass(frozen=True)
class FailureScenario:
    kind: FailureKind
    target: Union[str, TargetSelector] = TargetSelector.FIRST_POD
    at: SimTime = 120.0


def _resolve_target(scenario: FailureScenario, cluster: Cluster) -> str:
    pods = cluster.state.pods
    nodes = cluster.state.nodes
    target = scenario.target
    if target is TargetSelector.FIRST_POD:
        if not pods:
            raise InjectionError("cluster has no pods to target")
        resolved = next(iter(pods))
    elif target is TargetSelector.NODE_HOSTING_FIRST_POD:
        if not pods:
            raise InjectionError("cluster has no pods to target")
        resolved = pods[next(iter(pods))].node
    else:
        resolved = str(target)
        if resolved not in pods and resolved not in nodes:
            raise InjectionError(f"unknown target {resolved!r}")

    wants_node = scenario.kind is FailureKind.NODE_CRASH
    if wants_node and resolved not in nodes:
        raise InjectionError(f"node-crash target {resolved!r} is not a node")
    if not wants_node and resolved not in pods:
        raise InjectionError(f"{scenario.kind.value} target {resolved!r} is not a pod")
    return resolved


def inject(scenario: FailureScenario, cluster: Cluster) -> None:
    """Schedule the scenario; corruption is applied when the event fires."""
    subject = _resolve_target(scenario, cluster)
    if scenario.kind is FailureKind.APP_CONTAINER_KILL:
        apply = lambda: _kill_app_container(cluster, subject)
    elif scenario.kind is FailureKind.POD_SANDBOX_KILL:
        apply = lambda: _kill_pod_sandbox(cluster, subject)
    else:
        apply = lambda: _crash_node(cluster, subject)
    cluster.engine.schedule(EventKind.FAILURE_INJECTED, subject, scenario.at,
                            detail=scenario.kind.value, action=apply)


def _kill_app_container(cluster: Cluster, pod_name: str) -> None:
    pod = cluster.state.pods[pod_name]
    if pod.phase is not PodPhase.RUNNING or pod.app_container is not ContainerState.SERVING:
        raise InjectionError(f"{pod_name} has no serving app container to kill")
    def died():
        pod.app_container = ContainerState.DEAD
        cluster.refresh_service_state()
    cluster.engine.schedule(EventKind.CONTAINER_DIED, pod_name, cluster.engine.now,
                            detail="injected-kill", action=died)


def _kill_pod_sandbox(cluster: Cluster, pod_name: str) -> None:
    pod = cluster.state.pods[pod_name]
    if pod.phase is not PodPhase.RUNNING or not pod.sandbox_alive:
        raise InjectionError(f"{pod_name} has no live sandbox to kill")
    pod.sandbox_alive = False
    pod.doomed = True
    cluster.refresh_service_state()


def _crash_node(cluster: Cluster, node_name: str) -> None:
    node = cluster.state.nodes[node_name]
    if node.status is NodeStatus.CRASHED:
        raise InjectionError(f"{node_name} already crashed")
    node.status = NodeStatus.CRASHED
    cluster.engine.cancel(node.hb_handle)
    cluster.engine.cancel(node.sync_handle)
    for pod in cluster._pods_on(node_name):
        if pod.phase is PodPhase.TERMINATED:
            continue
        if pod.app_container is not ContainerState.DEAD:
            pod.app_container = ContainerState.DEAD
        pod.readiness_pending = False
        for handle in pod.pending:
            cluster.engine.cancel(handle)
        pod.pending.clear()
    cluster.refresh_service_state()
