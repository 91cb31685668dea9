"""Lazy horizontal scaling from a sliding window of per-second RPS samples.

Scale-out needs a sustained overload (at least ``phi_out`` seconds above the
deployed capacity); scale-in needs more than ``phi_in`` seconds below the
capacity of one instance fewer. Short bursts are left to the vertical scaler.
"""

import logging
import math
from collections import deque

from src.models.domain import FunctionSpec
from src.models.error import UnprofiledFunctionError
from src.models.scaling import HscalerConfig, ScaleAction, ScaleDecision
from src.services.perfmodel import ModelCatalog, infer_exec_time

logger = logging.getLogger(__name__)


class RpsWindow:
    """Fixed-length ring of per-second request counts; missing seconds are zero."""

    def __init__(self, window_s: int) -> None:
        self.window_s = window_s
        self.samples: deque[int] = deque(maxlen=window_s)
        self.last_second: int | None = None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def full(self) -> bool:
        return len(self.samples) == self.window_s

    def record(self, second_index: int, count: int) -> None:
        """Append the count for ``second_index``, zero-filling skipped seconds.

        Raises:
            ValueError: If ``second_index`` does not move forward
        """
        if self.last_second is not None:
            if second_index <= self.last_second:
                raise ValueError(
                    f"second_index must increase: {second_index} after {self.last_second}"
                )
            gap = min(second_index - self.last_second - 1, self.window_s)
            self.samples.extend([0] * gap)
        self.samples.append(count)
        self.last_second = second_index


def capacity_of(func: FunctionSpec, n_instances: int, catalog: ModelCatalog) -> float:
    """Serving throughput in RPS of ``n_instances`` at the profiled <IBS, request SMR>.

    Raises:
        UnprofiledFunctionError: If ``func`` has no inference quota
    """
    quota = func.quota
    if quota is None or quota.ibs is None:
        raise UnprofiledFunctionError(func.id)
    if n_instances <= 0:
        return 0.0
    t_exec_ms = infer_exec_time(catalog.get(func.model), quota.ibs, quota.request_smr)
    return n_instances * quota.ibs / (t_exec_ms / 1000.0)


def scaling_decision(
    window: RpsWindow,
    n_instances: int,
    per_instance_rps: float,
    cfg: HscalerConfig,
) -> ScaleDecision:
    """Decide scale-out, scale-in or hold for one function.

    Args:
        window: Per-second RPS samples
        n_instances: Instances currently deployed (cold or warm)
        per_instance_rps: Serving throughput of a single instance
        cfg: Thresholds

    Returns:
        The decision; scale-out is sized to the window maximum
    """
    if not window.full or per_instance_rps <= 0:
        return ScaleDecision()
    samples = list(window.samples)
    capacity = n_instances * per_instance_rps
    # lazy scale-out: sustained overload only
    above = sum(1 for s in samples if s > capacity)
    if above >= cfg.phi_out:
        wanted = math.ceil(max(samples) / per_instance_rps)
        return ScaleDecision(action=ScaleAction.OUT, count=max(1, wanted - n_instances))
    # scale-in: one instance fewer would still have been enough
    if n_instances > cfg.min_instances:
        reduced = (n_instances - 1) * per_instance_rps
        below = sum(1 for s in samples if s < reduced)
        if below > cfg.phi_in:
            return ScaleDecision(action=ScaleAction.IN, count=1)
    return ScaleDecision()


class HorizontalScaler:
    """One RPS window per inference function plus the decision loop."""

    def __init__(self, cfg: HscalerConfig, catalog: ModelCatalog) -> None:
        self.cfg = cfg
        self.catalog = catalog
        self.windows: dict[str, RpsWindow] = {}
        self._unit_rps: dict[str, float] = {}

    def register(self, func: FunctionSpec) -> None:
        if func.is_training:
            return
        self.windows[func.id] = RpsWindow(self.cfg.window_s)
        self._unit_rps[func.id] = capacity_of(func, 1, self.catalog)

    def record_rps(self, function_id: str, second_index: int, count: int) -> None:
        window = self.windows.get(function_id)
        if window is not None:
            window.record(second_index, count)

    def would_relaunch(self, function_id: str) -> bool:
        """Whether the current window would scale an empty deployment straight back out."""
        window = self.windows.get(function_id)
        if window is None or not self.cfg.enabled:
            return False
        decision = scaling_decision(window, 0, self._unit_rps[function_id], self.cfg)
        return decision.action is ScaleAction.OUT

    def decide(self, function_id: str, n_instances: int) -> ScaleDecision:
        window = self.windows.get(function_id)
        if window is None or not self.cfg.enabled:
            return ScaleDecision()
        decision = scaling_decision(window, n_instances, self._unit_rps[function_id], self.cfg)
        if decision.action is not ScaleAction.HOLD:
            logger.info(
                f"Scaling decision for {function_id}: {decision.action} x{decision.count}",
                extra={
                    "function_id": function_id,
                    "decision": decision.action,
                    "n_before": n_instances,
                },
            )
        return decision

