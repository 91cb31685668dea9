"""Unit tests for the per-GPU token arbiter."""

import pytest

from src.models.domain import Priority
from src.models.scaling import Branch, ShareKind, VscalerConfig
from src.services.vscaler import GpuArbiter, GrantPolicy


def _arbiter(policy: GrantPolicy = GrantPolicy.ARBITRATED) -> GpuArbiter:
    """GPU 0 with SLO instance ``a`` (400/800 tokens) and best-effort ``b`` (200/600)."""
    arbiter = GpuArbiter(0, VscalerConfig(), policy)
    arbiter.attach("a", Priority.SLO_SENSITIVE, 0.4, 0.8)
    arbiter.attach("b", Priority.BEST_EFFORT, 0.2, 0.6)
    return arbiter


def test_quota_tokens() -> None:
    from src.services.vscaler import quota_tokens

    assert quota_tokens(0.3, 1000) == 300
    assert quota_tokens(0.4, 1000) == 400
    assert quota_tokens(0.0, 1000) == 0


def test_idle_slo_instance_scales_down() -> None:
    """Validates: an idle SLO instance drops to its request and BE grows by eta."""
    outcome = _arbiter().arbitrate()

    assert outcome.branches == {"a": Branch.SCALE_DOWN}
    assert outcome.state.kind is ShareKind.RECOVERY
    assert outcome.grants == {"a": 400, "b": 250}


def test_lone_busy_slo_instance_scales_up() -> None:
    arbiter = _arbiter()
    arbiter.report_kernels("a", 10)

    outcome = arbiter.arbitrate()

    assert outcome.branches == {"a": Branch.SCALE_UP}
    assert outcome.grants["a"] == 500
    assert outcome.executed["a"] == 10


def test_scale_up_stops_at_limit() -> None:
    arbiter = _arbiter()
    for period in range(6):
        arbiter.report_kernels("a", 10)
        arbiter.arbitrate(period)
        arbiter.end_period()
    assert arbiter.clients["a"].token.r_last == 800


def test_busy_neighbours_contend() -> None:
    """Validates: both busy means the SLO instance holds its request and BE its last grant."""
    arbiter = _arbiter()
    arbiter.report_kernels("a", 10)
    arbiter.report_kernels("b", 10)

    outcome = arbiter.arbitrate()

    assert outcome.branches == {"a": Branch.CONTEND}
    assert outcome.state.kind is ShareKind.CONTENTION
    assert outcome.grants == {"a": 400, "b": 200}


def test_klc_drift_triggers_emergency() -> None:
    """Validates:
    - a tripped SLO instance receives its limit and owns the GPU
    - the SLO instance drains before best-effort within the block capacity
    """
    arbiter = _arbiter()
    arbiter.report_kernels("a", 1000)
    arbiter.report_kernels("b", 1000)
    arbiter.update_klc("a", 10.0)
    assert arbiter.update_klc("a", 20.0) == pytest.approx(1.0)

    outcome = arbiter.arbitrate()

    assert outcome.branches == {"a": Branch.PROTECT}
    assert outcome.state.kind is ShareKind.EMERGENCY
    assert outcome.state.owner == "a"
    assert outcome.executed == {"a": 800, "b": 200}
    assert outcome.total_executed == 1000


def test_emergency_keeps_its_owner() -> None:
    """Validates: while the owner still trips, a worse newcomer does not take over."""
    arbiter = GpuArbiter(0, VscalerConfig())
    for iid in ("a", "c"):
        arbiter.attach(iid, Priority.SLO_SENSITIVE, 0.3, 0.5)
        arbiter.update_klc(iid, 10.0)
    arbiter.update_klc("a", 15.0)

    assert arbiter.arbitrate().state.owner == "a"

    arbiter.update_klc("c", 30.0)
    assert arbiter.arbitrate(1).state.owner == "a"


def test_best_effort_alone_gets_limit() -> None:
    arbiter = GpuArbiter(0, VscalerConfig())
    arbiter.attach("b", Priority.BEST_EFFORT, 0.2, 0.6)

    outcome = arbiter.arbitrate()

    assert outcome.state.kind is ShareKind.NONE
    assert outcome.grants == {"b": 600}


def test_klc_delta_ages_out() -> None:
    from src.services.vscaler import KlcTracker

    tracker = KlcTracker(window_len=20)
    assert tracker.effective_delta(0) == 0.0
    tracker.update(10.0, period_index=0)
    tracker.update(14.0, period_index=0)

    assert tracker.effective_delta(20) == pytest.approx(0.4)
    assert tracker.effective_delta(21) == 0.0
    with pytest.raises(ValueError):
        tracker.update(0.0)


def test_static_policy_grants_limit() -> None:
    arbiter = _arbiter(GrantPolicy.STATIC)
    arbiter.report_kernels("a", 10)
    arbiter.update_klc("a", 10.0)
    arbiter.update_klc("a", 50.0)

    outcome = arbiter.arbitrate()

    assert outcome.grants == {"a": 800, "b": 600}
    assert outcome.state.kind is ShareKind.NONE
    assert outcome.branches == {}


def test_capacity_bounds_execution() -> None:
    arbiter = GpuArbiter(0, VscalerConfig())
    for iid in ("x", "y"):
        arbiter.attach(iid, Priority.BEST_EFFORT, 0.3, 0.6)
        arbiter.report_kernels(iid, 1000)

    outcome = arbiter.arbitrate()

    assert outcome.executed == {"x": 600, "y": 400}
    assert arbiter.clients["y"].token.pending_blocks == 600


def test_batch_cap_limits_drain() -> None:
    arbiter = GpuArbiter(0, VscalerConfig())
    client = arbiter.attach("a", Priority.SLO_SENSITIVE, 0.4, 0.8)
    client.batch_cap = 255
    arbiter.report_kernels("a", 714)

    assert arbiter.arbitrate().executed["a"] == 255


def test_end_period_rolls_state() -> None:
    arbiter = _arbiter()
    arbiter.report_kernels("a", 10)
    arbiter.arbitrate()
    arbiter.end_period()

    a = arbiter.clients["a"]
    assert a.token.r_last == 500
    assert a.klc.window_sum() == 10
    assert a.klc.rate_window[-1] == 0


def test_detach() -> None:
    """Validates: unknown ids raise and the last detach resets the state."""
    from src.models.error import UnknownInstanceError

    arbiter = _arbiter()
    arbiter.arbitrate()
    arbiter.detach("a")
    assert arbiter.state.kind is ShareKind.RECOVERY
    arbiter.detach("b")
    assert arbiter.state.kind is ShareKind.NONE

    with pytest.raises(UnknownInstanceError):
        arbiter.detach("b")
    with pytest.raises(UnknownInstanceError):
        arbiter.report_kernels("b", 1)
