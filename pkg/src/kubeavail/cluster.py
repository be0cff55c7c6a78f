"""The modeled cluster and its control loops.

Workers host pods; the master is implicit.  Four loops drive the state:

* kubelet heartbeat: each live node posts its status every
  ``heartbeat_interval`` seconds.
* kubelet sync: every ``kubelet_sync_period`` seconds the node agent checks
  its pods, restarts dead app containers in place, starts graceful
  termination when the pod sandbox is gone, reports readiness of freshly
  started containers, and reaps terminated pods.
* node controller: every ``node_monitor_period`` seconds the master marks
  nodes whose last heartbeat is older than
  ``allowed_missed_updates * heartbeat_interval`` as not ready, schedules
  their pods for termination, and queues replacement creation after
  ``eviction_wait``.
* reconcilers: the deployment reconciler keeps the live pod count at the
  desired replica count once a predecessor's slot is free; the endpoints
  reconciler converges the routable endpoint set onto the ready pods, each
  change landing after ``endpoint_propagation_latency``.

Timers run exactly; latencies are drawn with multiplicative jitter from the
engine's seeded stream.  Container state transitions become visible to the
control plane only at sync ticks, which is what spreads detection and
readiness reporting over the sync period.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, unique
from functools import partial
from typing import Optional

from .config import ConfigProfile
from .engine import EventHandle, EventKind, SimulationEngine, SimTime, Trace
from .metrics import ServiceHealth, classify

SERVICE_SUBJECT = "service"


@unique
class NodeStatus(Enum):
    READY = "Ready"
    NOT_READY = "NotReady"
    CRASHED = "Crashed"


@unique
class PodPhase(Enum):
    PENDING = "Pending"
    RUNNING = "Running"
    TERMINATING = "Terminating"
    TERMINATED = "Terminated"


@unique
class ContainerState(Enum):
    STARTING = "Starting"
    SERVING = "Serving"
    DEAD = "Dead"


@unique
class RedundancyModel(Enum):
    NO_REDUNDANCY = "No-Redundancy"
    N_WAY_ACTIVE = "N-Way Active"


@dataclass
class NodeState:
    name: str
    index: int
    heartbeat_phase: float
    sync_phase: float
    last_heartbeat: SimTime
    status: NodeStatus = NodeStatus.READY
    marked_not_ready: bool = False  # node controller acts exactly once
    hb_handle: Optional[EventHandle] = None
    sync_handle: Optional[EventHandle] = None


@dataclass
class PodState:
    name: str
    node: str
    phase: PodPhase = PodPhase.RUNNING
    app_container: ContainerState = ContainerState.SERVING
    sandbox_alive: bool = True
    ready: bool = True
    doomed: bool = False  # sandbox killed: serving but unroutable by accounting
    termination_deadline: Optional[SimTime] = None
    ready_anchor: Optional[SimTime] = None  # container (re)start awaiting sync observation
    readiness_pending: bool = False
    reaped: bool = False
    pending: list[EventHandle] = field(default_factory=list)


@dataclass(frozen=True)
class DeploymentSpec:
    desired_replicas: int

    @property
    def redundancy_model(self) -> RedundancyModel:
        if self.desired_replicas == 1:
            return RedundancyModel.NO_REDUNDANCY
        return RedundancyModel.N_WAY_ACTIVE


@dataclass
class ServiceState:
    endpoints: set[str] = field(default_factory=set)
    inflight: dict[str, tuple[str, EventHandle]] = field(default_factory=dict)


@dataclass
class ClusterState:
    nodes: dict[str, NodeState]
    pods: dict[str, PodState]
    deployment: DeploymentSpec
    service: ServiceState
    profile: ConfigProfile


class Cluster:
    """One simulated cluster bound to one engine instance."""

    def __init__(self, engine: SimulationEngine, state: ClusterState):
        self.engine = engine
        self.state = state
        self.service_level = ServiceHealth.AVAILABLE
        self.monitor_phase = 0.0
        self._pod_seq = len(state.pods)

    # -- helpers ----------------------------------------------------------

    @property
    def profile(self) -> ConfigProfile:
        return self.state.profile

    def _lat(self, nominal: float) -> float:
        f = self.profile.jitter_fraction
        return nominal * (1.0 + self.engine.rng.uniform(-f, f))

    def _pods_on(self, node_name: str) -> list[PodState]:
        return [p for p in self.state.pods.values() if p.node == node_name]

    def _pick_node(self) -> Optional[NodeState]:
        # least-loaded healthy node, lowest index breaking ties
        ready = [n for n in self.state.nodes.values() if n.status is NodeStatus.READY]
        if not ready:
            return None
        def load(node: NodeState) -> int:
            return sum(1 for p in self._pods_on(node.name) if p.phase is not PodPhase.TERMINATED)
        return min(ready, key=lambda n: (load(n), n.index))

    def endpoint_healthy(self, pod_name: str) -> bool:
        pod = self.state.pods.get(pod_name)
        if pod is None or pod.phase is not PodPhase.RUNNING:
            return False
        node = self.state.nodes[pod.node]
        return (pod.app_container is ContainerState.SERVING
                and pod.sandbox_alive
                and not pod.doomed
                and node.status is not NodeStatus.CRASHED)

    def refresh_service_state(self) -> None:
        level = classify(self.endpoint_healthy(p) for p in self.state.service.endpoints)
        if level is not self.service_level:
            self.service_level = level
            self.engine.schedule(EventKind.SERVICE_STATE_CHANGED, SERVICE_SUBJECT,
                                 self.engine.now, detail=level.value)

    def converged(self) -> bool:
        """Healthy ready pods match the desired count and the endpoint set.

        A pod that still claims readiness but is dead, doomed, or on a
        crashed node keeps the cluster in a transient state."""
        ready = {p.name for p in self.state.pods.values() if p.ready}
        return (len(ready) == self.state.deployment.desired_replicas
                and self.state.service.endpoints == ready
                and all(self.endpoint_healthy(name) for name in ready))

    def run(self, until: Optional[SimTime] = None, horizon: SimTime = 3600.0) -> Trace:
        """Run to a time bound, or to quiescence when no bound is given.

        The horizon caps a quiescence run that never reconverges (for
        example a deferred replacement with no healthy node left)."""
        if until is not None:
            return self.engine.run(until=until)
        return self.engine.run(until=horizon, quiescent=self.converged)

    # -- kubelet ----------------------------------------------------------

    def kubelet_heartbeat_tick(self, node_name: str) -> None:
        node = self.state.nodes[node_name]
        if node.status is NodeStatus.CRASHED:
            return
        now = self.engine.now
        node.last_heartbeat = now
        node.hb_handle = self.engine.schedule(
            EventKind.HEARTBEAT_POSTED, node_name, now + self.profile.heartbeat_interval,
            periodic=True, action=partial(self.kubelet_heartbeat_tick, node_name))

    def kubelet_sync_tick(self, node_name: str) -> None:
        node = self.state.nodes[node_name]
        if node.status is NodeStatus.CRASHED:
            return
        now = self.engine.now
        for pod in self._pods_on(node_name):
            if pod.phase is PodPhase.RUNNING:
                if not pod.sandbox_alive and pod.termination_deadline is None:
                    # pod sandbox gone: the pod is doomed, stop routing to it
                    self.engine.schedule(EventKind.POD_SCHEDULED_FOR_TERMINATION,
                                         pod.name, now, detail="sandbox-missing")
                    pod.ready = False
                    self.endpoints_reconcile()
                    self.terminate_pod(pod, graceful=True)
                elif pod.app_container is ContainerState.DEAD:
                    # in-place restart of the app container
                    pod.ready = False
                    pod.ready_anchor = None
                    pod.app_container = ContainerState.STARTING
                    self.endpoints_reconcile()
                    handle = self.engine.schedule(
                        EventKind.STREAM_STARTED, pod.name,
                        now + self._lat(self.profile.container_restart_latency),
                        detail="restart",
                        action=partial(self._on_stream_started, pod.name, True))
                    pod.pending.append(handle)
                elif (pod.ready_anchor is not None and not pod.ready
                      and not pod.readiness_pending and pod.sandbox_alive
                      and now > pod.ready_anchor):
                    # freshly started container observed: report readiness
                    pod.readiness_pending = True
                    handle = self.engine.schedule(
                        EventKind.POD_READY, pod.name,
                        now + self._lat(self.profile.readiness_latency),
                        action=partial(self._on_pod_ready, pod.name))
                    pod.pending.append(handle)
            elif pod.phase is PodPhase.TERMINATED and not pod.reaped:
                pod.reaped = True
        self.deployment_reconcile()
        node.sync_handle = self.engine.schedule(
            EventKind.KUBELET_SYNC, node_name, now + self.profile.kubelet_sync_period,
            periodic=True, action=partial(self.kubelet_sync_tick, node_name))

    # -- master loops -----------------------------------------------------

    def node_controller_tick(self) -> None:
        now = self.engine.now
        profile = self.profile
        stale_after = profile.allowed_missed_updates * profile.heartbeat_interval
        for node in self.state.nodes.values():
            if node.marked_not_ready:
                continue
            if now - node.last_heartbeat > stale_after:
                node.marked_not_ready = True
                if node.status is NodeStatus.READY:
                    node.status = NodeStatus.NOT_READY
                self.engine.schedule(EventKind.NODE_MARKED_NOT_READY, node.name, now)
                for pod in self._pods_on(node.name):
                    if pod.phase in (PodPhase.TERMINATING, PodPhase.TERMINATED):
                        continue
                    self.engine.schedule(EventKind.POD_SCHEDULED_FOR_TERMINATION,
                                         pod.name, now, detail="node-eviction")
                    pod.ready = False
                    self.terminate_pod(pod, graceful=False)
                    self.engine.schedule(
                        EventKind.REPLACEMENT_DUE, pod.name, now + profile.eviction_wait,
                        action=partial(self._on_eviction_complete, pod.name))
                self.endpoints_reconcile()
        self.engine.schedule(EventKind.NODE_MONITOR, "master",
                             now + profile.node_monitor_period,
                             periodic=True, action=self.node_controller_tick)

    def _on_eviction_complete(self, pod_name: str) -> None:
        self.state.pods[pod_name].reaped = True
        self.deployment_reconcile()

    # -- pod lifecycle ----------------------------------------------------

    def terminate_pod(self, pod: PodState, graceful: bool = True) -> None:
        if pod.phase in (PodPhase.TERMINATING, PodPhase.TERMINATED):
            return
        now = self.engine.now
        node = self.state.nodes[pod.node]
        pod.phase = PodPhase.TERMINATING
        pod.ready = False
        pod.readiness_pending = False
        for handle in pod.pending:
            self.engine.cancel(handle)
        pod.pending.clear()
        if not graceful or node.status is NodeStatus.CRASHED:
            deadline = now  # nothing left to signal
        else:
            deadline = now + self.profile.termination_delay
        pod.termination_deadline = deadline
        if pod.app_container is ContainerState.SERVING:
            self.engine.schedule(EventKind.CONTAINER_DIED, pod.name, deadline,
                                 detail="force-kill",
                                 action=partial(self._on_container_killed, pod.name))
        self.engine.schedule(EventKind.POD_TERMINATED, pod.name, deadline,
                             action=partial(self._on_pod_terminated, pod.name))
        self.endpoints_reconcile()

    def _on_container_killed(self, pod_name: str) -> None:
        self.state.pods[pod_name].app_container = ContainerState.DEAD
        self.refresh_service_state()

    def _on_pod_terminated(self, pod_name: str) -> None:
        pod = self.state.pods[pod_name]
        pod.phase = PodPhase.TERMINATED
        pod.ready = False
        self.refresh_service_state()

    def _on_container_started(self, pod_name: str) -> None:
        pod = self.state.pods[pod_name]
        if pod.phase in (PodPhase.TERMINATING, PodPhase.TERMINATED):
            return
        now = self.engine.now
        pod.phase = PodPhase.RUNNING
        pod.app_container = ContainerState.STARTING
        pod.ready_anchor = now
        handle = self.engine.schedule(
            EventKind.STREAM_STARTED, pod.name,
            now + self._lat(self.profile.stream_start_latency),
            detail="initial", action=partial(self._on_stream_started, pod.name, False))
        pod.pending.append(handle)

    def _on_stream_started(self, pod_name: str, restarted: bool) -> None:
        pod = self.state.pods[pod_name]
        if pod.phase is not PodPhase.RUNNING:
            return
        pod.app_container = ContainerState.SERVING
        if restarted:
            pod.ready_anchor = self.engine.now
        self.refresh_service_state()

    def _on_pod_ready(self, pod_name: str) -> None:
        pod = self.state.pods[pod_name]
        pod.readiness_pending = False
        if pod.phase is not PodPhase.RUNNING or not pod.sandbox_alive or pod.doomed:
            return
        pod.ready = True
        self.endpoints_reconcile()

    # -- reconcilers ------------------------------------------------------

    def deployment_reconcile(self) -> None:
        """Create replacement pods once a predecessor's slot is free.

        A terminated pod occupies its slot until reaped (by its node's sync
        loop, or by eviction completing for a crashed node).  Creation is
        deferred when no healthy node exists.
        """
        desired = self.state.deployment.desired_replicas
        occupied = sum(1 for p in self.state.pods.values()
                       if p.phase is not PodPhase.TERMINATED or not p.reaped)
        for _ in range(desired - occupied):
            node = self._pick_node()
            if node is None:
                return
            self._pod_seq += 1
            name = f"pod-{self._pod_seq}"
            pod = PodState(name, node.name, phase=PodPhase.PENDING,
                           app_container=ContainerState.STARTING, ready=False)
            self.state.pods[name] = pod
            now = self.engine.now
            self.engine.schedule(EventKind.POD_CREATED, name, now)
            handle = self.engine.schedule(
                EventKind.CONTAINER_STARTED, name,
                now + self._lat(self.profile.pod_creation_latency),
                action=partial(self._on_container_started, name))
            pod.pending.append(handle)

    def endpoints_reconcile(self) -> None:
        """Converge the endpoint set onto the ready pods.

        Each difference materializes after the propagation latency; in-flight
        changes that no longer match the desired set are cancelled.
        """
        desired = {p.name for p in self.state.pods.values() if p.ready}
        service = self.state.service
        now = self.engine.now
        for pod_name, (op, handle) in list(service.inflight.items()):
            if (op == "add") == (pod_name in desired):
                continue
            self.engine.cancel(handle)
            del service.inflight[pod_name]
        for pod_name in sorted(service.endpoints - desired):
            if pod_name in service.inflight:
                continue
            handle = self.engine.schedule(
                EventKind.ENDPOINT_REMOVED, pod_name,
                now + self._lat(self.profile.endpoint_propagation_latency),
                action=partial(self._on_endpoint_removed, pod_name))
            service.inflight[pod_name] = ("remove", handle)
        for pod_name in sorted(desired - service.endpoints):
            if pod_name in service.inflight:
                continue
            handle = self.engine.schedule(
                EventKind.ENDPOINT_ADDED, pod_name,
                now + self._lat(self.profile.endpoint_propagation_latency),
                action=partial(self._on_endpoint_added, pod_name))
            service.inflight[pod_name] = ("add", handle)

    def _on_endpoint_removed(self, pod_name: str) -> None:
        self.state.service.endpoints.discard(pod_name)
        self.state.service.inflight.pop(pod_name, None)
        self.refresh_service_state()

    def _on_endpoint_added(self, pod_name: str) -> None:
        self.state.service.endpoints.add(pod_name)
        self.state.service.inflight.pop(pod_name, None)
        self.refresh_service_state()


def build_cluster(node_count: int, profile: ConfigProfile, replicas: int,
                  seed: int) -> Cluster:
    """Build a steady-state cluster of worker nodes with ready, routable pods.

    Heartbeat and sync phases are drawn from the seeded stream; pods spread
    over the least-loaded nodes.  The initial endpoint population and the
    initial available service state are recorded at t=0.
    """
    if node_count < 1:
        raise ValueError("need at least one worker node")
    if replicas < 1:
        raise ValueError("need at least one replica")
    engine = SimulationEngine(seed)
    rng = engine.rng

    nodes: dict[str, NodeState] = {}
    for i in range(1, node_count + 1):
        hb_phase = rng.uniform(0.0, profile.heartbeat_interval)
        sync_phase = rng.uniform(0.0, profile.kubelet_sync_period)
        nodes[f"node-{i}"] = NodeState(
            name=f"node-{i}", index=i, heartbeat_phase=hb_phase, sync_phase=sync_phase,
            last_heartbeat=hb_phase - profile.heartbeat_interval)
    monitor_phase = rng.uniform(0.0, profile.node_monitor_period)

    state = ClusterState(nodes=nodes, pods={}, deployment=DeploymentSpec(replicas),
                         service=ServiceState(), profile=profile)
    cluster = Cluster(engine, state)
    cluster.monitor_phase = monitor_phase

    for i in range(1, replicas + 1):
        node = cluster._pick_node()
        state.pods[f"pod-{i}"] = PodState(f"pod-{i}", node.name, ready_anchor=0.0)
    cluster._pod_seq = replicas
    state.service.endpoints = set(state.pods)
    for pod_name in sorted(state.pods):
        engine.schedule(EventKind.ENDPOINT_ADDED, pod_name, 0.0, detail="initial")
    engine.schedule(EventKind.SERVICE_STATE_CHANGED, SERVICE_SUBJECT, 0.0,
                    detail=ServiceHealth.AVAILABLE.value)

    for node in nodes.values():
        node.hb_handle = engine.schedule(
            EventKind.HEARTBEAT_POSTED, node.name, node.heartbeat_phase,
            periodic=True, action=partial(cluster.kubelet_heartbeat_tick, node.name))
        node.sync_handle = engine.schedule(
            EventKind.KUBELET_SYNC, node.name, node.sync_phase,
            periodic=True, action=partial(cluster.kubelet_sync_tick, node.name))
    engine.schedule(EventKind.NODE_MONITOR, "master", monitor_phase,
                    periodic=True, action=cluster.node_controller_tick)
    return cluster
