"""Request gateway: per-instance batch queues and load-balanced dispatch."""

import logging
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

from src.models.domain import Phase, Request

logger = logging.getLogger(__name__)

SATURATION_FACTOR = 2


@dataclass(slots=True)
class BatchQueue:
    """Requests bound to one instance; ``running`` is the batch in execution."""

    queue: deque[Request] = field(default_factory=deque)
    running: list[Request] = field(default_factory=list)

    @property
    def outstanding(self) -> int:
        return len(self.queue) + len(self.running)

    def enqueue(self, request: Request) -> None:
        self.queue.append(request)

    def ready(self, now_ms: float, ibs: int, max_wait_ms: float) -> bool:
        """A batch fires when it is full or its oldest member waited ``max_wait_ms``."""
        if not self.queue:
            return False
        return len(self.queue) >= ibs or now_ms - self.queue[0].arrival_ms >= max_wait_ms

    def take(self, ibs: int, batch_id: int) -> list[Request]:
        batch = [self.queue.popleft() for _ in range(min(ibs, len(self.queue)))]
        for request in batch:
            request.batch_id = batch_id
        self.running = batch
        return batch

    def finish(self, completed_ms: float) -> list[Request]:
        done, self.running = self.running, []
        for request in done:
            request.completed_ms = completed_ms
        return done


class DispatchTarget(Protocol):
    @property
    def instance_id(self) -> str: ...

    @property
    def phase(self) -> Phase: ...

    @property
    def outstanding(self) -> int: ...


@dataclass(frozen=True, slots=True)
class DispatchChoice:
    """Where a request goes: an existing instance, or a new one to launch."""

    target: str | None
    launch: bool = False


def dispatch(targets: Sequence[DispatchTarget], ibs: int, eager: bool = False) -> DispatchChoice:
    """Pick an instance for one request.

    The least-loaded warm instance wins (ties by id). When every warm instance
    holds ``2 * ibs`` outstanding requests the request spills to a cold-starting
    instance that is not saturated; eager mode launches a new instance instead
    when no such instance exists. Without any warm instance the least-loaded
    cold-starting instance is used, else a launch is requested.

    Examples:
        >>> dispatch([], ibs=4)
        DispatchChoice(target=None, launch=True)
    """
    saturation = SATURATION_FACTOR * ibs
    warm = sorted(
        (t for t in targets if t.phase is Phase.WARM),
        key=lambda t: (t.outstanding, t.instance_id),
    )
    cold = sorted(
        (t for t in targets if t.phase is Phase.COLD_STARTING),
        key=lambda t: (t.outstanding, t.instance_id),
    )
    if warm:
        best = warm[0]
        if best.outstanding < saturation:
            return DispatchChoice(best.instance_id)
        if cold and cold[0].outstanding < saturation:
            return DispatchChoice(cold[0].instance_id)
        if eager:
            return DispatchChoice(None, launch=True)
        return DispatchChoice(best.instance_id)
    if cold:
        return DispatchChoice(cold[0].instance_id)
    return DispatchChoice(None, launch=True)
