"""Per-GPU kernel-block token arbiter.

Every period each GPU's arbiter issues tokens to its running residents from
kernel-launching-cycle (KLC) drift, priority and <request, limit> quotas, then
releases queued kernel blocks up to the grant and the GPU's physical block
capacity. Static baselines bypass arbitration and grant a constant amount.
"""

import logging
import math
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum

from src.models.domain import Priority, TokenState
from src.models.error import UnknownInstanceError
from src.models.scaling import Branch, ShareKind, ShareState, VscalerConfig

logger = logging.getLogger(__name__)


def quota_tokens(frac: float, max_tokens: int) -> int:
    """Integer token count for an SM fraction."""
    return math.floor(max_tokens * frac + 1e-9)


@dataclass(slots=True)
class KlcTracker:
    """KLC statistics and the recent launch-rate window of one instance."""

    window_len: int
    t_current_ms: float | None = None
    t_min_ms: float | None = None
    delta: float = 0.0
    last_cycle_period: int | None = None
    rate_window: deque[int] = field(init=False)

    def __post_init__(self) -> None:
        self.rate_window = deque([0] * self.window_len, maxlen=self.window_len)

    def record_launch(self, blocks: int) -> None:
        self.rate_window[-1] += blocks

    def roll(self) -> None:
        self.rate_window.append(0)

    def window_sum(self) -> int:
        return sum(self.rate_window)

    def update(self, cycle_span_ms: float, period_index: int = 0) -> float:
        """Record a completed cycle and return its relative drift from the minimum."""
        if cycle_span_ms <= 0:
            raise ValueError("cycle span must be positive")
        self.t_current_ms = cycle_span_ms
        self.last_cycle_period = period_index
        if self.t_min_ms is None or cycle_span_ms < self.t_min_ms:
            self.t_min_ms = cycle_span_ms
        self.delta = (self.t_current_ms - self.t_min_ms) / self.t_min_ms
        return self.delta

    def effective_delta(self, period_index: int) -> float:
        """Drift of the last cycle, or 0 once that cycle is older than the window."""
        if self.last_cycle_period is None:
            return 0.0
        if period_index - self.last_cycle_period > self.window_len:
            return 0.0
        return self.delta


@dataclass(slots=True)
class TokenClient:
    """One resident instance as seen by an arbiter."""

    instance_id: str
    priority: Priority
    request_tokens: int
    limit_tokens: int
    token: TokenState
    klc: KlcTracker
    batch_cap: int = 0

    @property
    def slo_sensitive(self) -> bool:
        return self.priority is Priority.SLO_SENSITIVE


@dataclass(frozen=True, slots=True)
class TokenIssue:
    grants: dict[str, int]
    state: ShareState
    branches: dict[str, Branch]


def _grow(r_last: int, cfg: VscalerConfig, ceiling: int) -> int:
    return min(math.ceil(max(r_last, 1) * cfg.eta_increase), ceiling)


def issue_tokens(
    residents: Sequence[TokenClient],
    state: ShareState,
    cfg: VscalerConfig,
    period_index: int = 0,
) -> TokenIssue:
    """Compute one period's grants for the residents of a GPU.

    SLO-sensitive instances are visited first in id order: a tripped KLC
    drift gets the limit and EMERGENCY, an idle instance drops to its request
    (RECOVERY), an instance whose neighbours are all idle grows toward its
    limit (RECOVERY), otherwise it holds its request (CONTENTION). Best-effort
    instances then follow the resulting state.

    Args:
        residents: Running instances on the GPU
        state: State left by the previous period
        cfg: Arbiter configuration
        period_index: Current period, used to age KLC drift

    Returns:
        Grants per instance, the new state and each SLO instance's branch
    """
    slo = sorted((c for c in residents if c.slo_sensitive), key=lambda c: c.instance_id)
    best_effort = sorted(
        (c for c in residents if not c.slo_sensitive), key=lambda c: c.instance_id
    )
    # Kernel launches in the rate window and KLC drift per resident
    windows = {c.instance_id: c.klc.window_sum() for c in residents}
    deltas = {c.instance_id: c.klc.effective_delta(period_index) for c in slo}

    # EMERGENCY stays with its owner while the owner still trips
    tripping = [c for c in slo if deltas[c.instance_id] > cfg.eta_violation]
    owner: str | None = None
    if tripping:
        tripping_ids = {c.instance_id for c in tripping}
        if state.kind is ShareKind.EMERGENCY and state.owner in tripping_ids:
            owner = state.owner
        else:
            owner = max(tripping, key=lambda c: deltas[c.instance_id]).instance_id

    # SLO-sensitive pass
    grants: dict[str, int] = {}
    branches: dict[str, Branch] = {}
    kind = ShareKind.NONE
    for c in slo:
        cid = c.instance_id
        if deltas[cid] > cfg.eta_violation:
            grant, branch, kind = c.limit_tokens, Branch.PROTECT, ShareKind.EMERGENCY
        elif windows[cid] == 0:
            grant, branch, kind = c.request_tokens, Branch.SCALE_DOWN, ShareKind.RECOVERY
        elif all(windows[o.instance_id] == 0 for o in residents if o.instance_id != cid):
            grant = _grow(c.token.r_last, cfg, c.limit_tokens)
            branch, kind = Branch.SCALE_UP, ShareKind.RECOVERY
        else:
            grant, branch, kind = c.request_tokens, Branch.CONTEND, ShareKind.CONTENTION
        grants[cid] = grant
        branches[cid] = branch
    if owner is not None:
        kind = ShareKind.EMERGENCY

    # Best-effort residents follow the state the SLO pass left
    owner_delta = deltas[owner] if owner is not None else 0.0
    for c in best_effort:
        match kind:
            case ShareKind.NONE:
                grant = c.limit_tokens
            case ShareKind.EMERGENCY:
                grant = math.floor(min(c.request_tokens, c.token.r_last) / max(owner_delta, 1.0))
            case ShareKind.RECOVERY:
                grant = _grow(c.token.r_last, cfg, c.limit_tokens)
            case ShareKind.CONTENTION:
                grant = c.token.r_last
        grants[c.instance_id] = max(0, min(grant, c.limit_tokens))

    return TokenIssue(grants=grants, state=ShareState(kind=kind, owner=owner), branches=branches)


class GrantPolicy(StrEnum):
    ARBITRATED = "arbitrated"
    STATIC = "static"


@dataclass(frozen=True, slots=True)
class PeriodOutcome:
    """What one arbiter did in one period."""

    state: ShareState
    previous: ShareState
    grants: dict[str, int]
    executed: dict[str, int]
    branches: dict[str, Branch]

    @property
    def total_executed(self) -> int:
        return sum(self.executed.values())


class GpuArbiter:
    """Token arbiter for one GPU.

    Residents register with their charged request/limit fractions. With the
    STATIC policy every resident receives its limit tokens each period and the
    state stays NONE.
    """

    def __init__(
        self,
        gpu_id: int,
        cfg: VscalerConfig,
        policy: GrantPolicy = GrantPolicy.ARBITRATED,
    ) -> None:
        self.gpu_id = gpu_id
        self.cfg = cfg
        self.policy = policy
        self.state = ShareState()
        self.clients: dict[str, TokenClient] = {}
        self._used_this_period = 0

    def attach(
        self,
        instance_id: str,
        priority: Priority,
        request_frac: float,
        limit_frac: float,
        token: TokenState | None = None,
    ) -> TokenClient:
        """Register a resident; its last grant starts at its request tokens."""
        request_tokens = quota_tokens(request_frac, self.cfg.max_tokens)
        token = token or TokenState()
        token.r_last = request_tokens
        token.r_issue = request_tokens
        client = TokenClient(
            instance_id=instance_id,
            priority=priority,
            request_tokens=request_tokens,
            limit_tokens=quota_tokens(limit_frac, self.cfg.max_tokens),
            token=token,
            klc=KlcTracker(window_len=self.cfg.rate_window_len),
        )
        self.clients[instance_id] = client
        return client

    def detach(self, instance_id: str) -> None:
        """Remove a resident; the GPU returns to NONE once nobody is left.

        Raises:
            UnknownInstanceError: If ``instance_id`` is not attached here
        """
        if self.clients.pop(instance_id, None) is None:
            raise UnknownInstanceError(instance_id)
        if not self.clients:
            self.state = ShareState()

    def _client(self, instance_id: str) -> TokenClient:
        client = self.clients.get(instance_id)
        if client is None:
            raise UnknownInstanceError(instance_id)
        return client

    def report_kernels(self, instance_id: str, blocks: int, now_ms: float = 0.0) -> None:
        """Queue intercepted kernel blocks and count them in the rate window."""
        client = self._client(instance_id)
        client.token.pending_blocks += blocks
        client.klc.record_launch(blocks)
        logger.debug(
            f"Reported {blocks} blocks for {instance_id}",
            extra={"gpu_id": self.gpu_id, "instance_id": instance_id, "now_ms": now_ms},
        )

    def update_klc(self, instance_id: str, cycle_span_ms: float, period_index: int = 0) -> float:
        """Feed one finished batch or iteration into the resident's KLC tracker.

        Args:
            instance_id: Resident that finished a cycle
            cycle_span_ms: Wall time the cycle took, in ms
            period_index: Current period, kept for diagnostics

        Returns:
            Relative drift of this cycle over the fastest one seen

        Raises:
            UnknownInstanceError: If ``instance_id`` is not attached here
            ValueError: If ``cycle_span_ms`` is not positive
        """
        return self._client(instance_id).klc.update(cycle_span_ms, period_index)

    def drain(self, instance_id: str, grant: int) -> int:
        """Release up to ``grant`` pending blocks within the remaining capacity."""
        client = self._client(instance_id)
        remaining = max(0, self.cfg.capacity - self._used_this_period)
        cap = client.batch_cap if client.batch_cap > 0 else grant
        executed = max(0, min(client.token.pending_blocks, grant, cap, remaining))
        client.token.pending_blocks -= executed
        self._used_this_period += executed
        return executed

    def arbitrate(self, period_index: int = 0) -> PeriodOutcome:
        """Issue tokens and drain every resident once for this period."""
        previous = self.state
        residents = list(self.clients.values())
        if self.policy is GrantPolicy.STATIC:
            issue = TokenIssue(
                grants={c.instance_id: c.limit_tokens for c in residents},
                state=ShareState(),
                branches={},
            )
        else:
            issue = issue_tokens(residents, self.state, self.cfg, period_index)
        self.state = issue.state

        self._used_this_period = 0
        executed: dict[str, int] = {}
        order = sorted(residents, key=lambda c: (not c.slo_sensitive, c.instance_id))
        for client in order:
            grant = issue.grants[client.instance_id]
            client.token.r_issue = grant
            executed[client.instance_id] = self.drain(client.instance_id, grant)

        if previous.kind is not ShareKind.EMERGENCY and issue.state.kind is ShareKind.EMERGENCY:
            logger.debug(
                f"GPU {self.gpu_id} entered EMERGENCY",
                extra={"gpu_id": self.gpu_id, "owner": issue.state.owner},
            )
        return PeriodOutcome(
            state=issue.state,
            previous=previous,
            grants=issue.grants,
            executed=executed,
            branches=issue.branches,
        )

    def end_period(self) -> None:
        """Roll rate windows and remember this period's grants."""
        for client in self.clients.values():
            client.token.r_last = client.token.r_issue
            client.klc.roll()
