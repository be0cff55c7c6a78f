"""Failure injection semantics and target resolution."""

import pytest

from kubeavail.cluster import ContainerState, NodeStatus, build_cluster
from kubeavail.config import get_profile
from kubeavail.engine import EventKind
from kubeavail.failures import (FailureKind, FailureScenario, InjectionError,
                                TargetSelector, inject)

K = EventKind


def fresh_cluster(replicas=1, seed=5):
    return build_cluster(2, get_profile(), replicas=replicas, seed=seed)


def test_app_kill_records_failure_then_container_death():
    cluster = fresh_cluster()
    inject(FailureScenario(FailureKind.APP_CONTAINER_KILL, "pod-1", at=100.0), cluster)
    trace = cluster.run()
    failure = trace.of(K.FAILURE_INJECTED)
    assert len(failure) == 1
    assert failure[0].time == 100.0 and failure[0].subject == "pod-1"
    assert failure[0].detail == "app-container"
    died = trace.of(K.CONTAINER_DIED, "pod-1")[0]
    assert died.time == 100.0 and died.seq > failure[0].seq


def test_failure_precedes_every_consequence():
    cluster = fresh_cluster()
    inject(FailureScenario(FailureKind.POD_SANDBOX_KILL, at=50.0), cluster)
    trace = cluster.run()
    failure = trace.of(K.FAILURE_INJECTED)[0]
    after = [r for r in trace.records if (r.time, r.seq) > (failure.time, failure.seq)]
    consequences = {K.POD_SCHEDULED_FOR_TERMINATION, K.ENDPOINT_REMOVED,
                    K.POD_TERMINATED, K.POD_CREATED}
    for record in trace.records:
        if record.kind in consequences:
            assert record in after


def test_sandbox_kill_leaves_app_serving_until_sigterm():
    cluster = fresh_cluster()
    inject(FailureScenario(FailureKind.POD_SANDBOX_KILL, "pod-1", at=50.0), cluster)
    cluster.run(until=60.0)
    pod = cluster.state.pods["pod-1"]
    assert not pod.sandbox_alive and pod.doomed
    assert pod.app_container is ContainerState.SERVING  # grace period still running
    # but the service is already accounted as impacted
    assert not cluster.endpoint_healthy("pod-1")


def test_node_crash_cancels_the_nodes_future_ticks():
    cluster = fresh_cluster()
    target = cluster.state.pods["pod-1"].node
    inject(FailureScenario(
        FailureKind.NODE_CRASH, TargetSelector.NODE_HOSTING_FIRST_POD, at=50.0), cluster)
    trace = cluster.run()
    assert cluster.state.nodes[target].status is NodeStatus.CRASHED
    assert all(t < 50.0 for t in
               (r.time for r in trace.of(K.HEARTBEAT_POSTED, target)))
    other = ({"node-1", "node-2"} - {target}).pop()
    assert any(r.time > 50.0 for r in trace.of(K.HEARTBEAT_POSTED, other))


def test_target_selectors_resolve_at_injection():
    cluster = fresh_cluster(replicas=2)
    first_pod_node = cluster.state.pods["pod-1"].node
    inject(FailureScenario(
        FailureKind.NODE_CRASH, TargetSelector.NODE_HOSTING_FIRST_POD, at=10.0), cluster)
    trace = cluster.run()
    assert trace.of(K.FAILURE_INJECTED)[0].subject == first_pod_node


def test_unresolvable_or_incompatible_targets_are_rejected():
    cluster = fresh_cluster()
    with pytest.raises(InjectionError):
        inject(FailureScenario(FailureKind.APP_CONTAINER_KILL, "pod-99"), cluster)
    with pytest.raises(InjectionError):
        inject(FailureScenario(FailureKind.NODE_CRASH, "pod-1"), cluster)
    with pytest.raises(InjectionError):
        inject(FailureScenario(FailureKind.APP_CONTAINER_KILL, "node-1"), cluster)
    with pytest.raises(InjectionError):
        inject(FailureScenario(
            FailureKind.NODE_CRASH, TargetSelector.FIRST_POD), cluster)


def test_double_injection_on_dead_target_fails():
    cluster = fresh_cluster()
    inject(FailureScenario(FailureKind.APP_CONTAINER_KILL, "pod-1", at=10.0), cluster)
    inject(FailureScenario(FailureKind.APP_CONTAINER_KILL, "pod-1", at=10.2), cluster)
    with pytest.raises(InjectionError):
        cluster.run()


def test_double_node_crash_fails():
    cluster = fresh_cluster()
    target = cluster.state.pods["pod-1"].node
    inject(FailureScenario(FailureKind.NODE_CRASH, target, at=10.0), cluster)
    inject(FailureScenario(FailureKind.NODE_CRASH, target, at=11.0), cluster)
    with pytest.raises(InjectionError):
        cluster.run()


def test_exactly_one_failure_record_per_scenario():
    cluster = fresh_cluster(replicas=2)
    inject(FailureScenario(FailureKind.APP_CONTAINER_KILL, at=30.0), cluster)
    trace = cluster.run()
    assert len(trace.of(K.FAILURE_INJECTED)) == 1
