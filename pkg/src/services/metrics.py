"""Turns a finished run's log into a :class:`MetricsReport`."""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.models.domain import FunctionSpec, Request, TrainingKind
from src.models.metrics import FunctionMetrics, MetricsReport
from src.models.scenario import BaselineMode
from src.services.perfmodel import ModelCatalog, train_throughput

logger = logging.getLogger(__name__)

GRANT_COLUMNS = ["tick", "gpu_id", "instance_id", "state", "r_issue", "executed"]
SCALING_COLUMNS = ["second", "function_id", "decision", "n_before", "n_after"]
GPU_COUNT_COLUMNS = ["second", "gpu_count"]


@dataclass
class RunLog:
    """Raw accumulators filled by the simulator while it runs."""

    mode: BaselineMode
    seed: int
    duration_s: float
    period_ms: float
    gpu_count_interval_s: float = 1.0
    functions: list[FunctionSpec] = field(default_factory=list)
    requests: dict[str, list[Request]] = field(default_factory=dict)
    csc: dict[str, int] = field(default_factory=dict)
    samples: dict[str, int] = field(default_factory=dict)
    jct_s: dict[str, float] = field(default_factory=dict)
    gpu_counts: list[int] = field(default_factory=list)
    active_gpu_ticks: int = 0
    exclusive_gpu_ticks: int = 0
    sm_frag_sum: float = 0.0
    mem_frag_sum: float = 0.0
    instances_placed: int = 0
    placement_failures: int = 0
    grant_rows: list[tuple[int, int, str, str, int, int]] = field(default_factory=list)
    scaling_rows: list[tuple[int, str, str, int, int]] = field(default_factory=list)

    def grants_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.grant_rows, columns=GRANT_COLUMNS)

    def scaling_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.scaling_rows, columns=SCALING_COLUMNS)

    def gpu_count_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "second": [i * self.gpu_count_interval_s for i in range(len(self.gpu_counts))],
                "gpu_count": self.gpu_counts,
            },
            columns=GPU_COUNT_COLUMNS,
        )


@dataclass
class SimulationResult:
    report: MetricsReport
    log: RunLog


def _percentile(values: list[float], q: float) -> float | None:
    if not values:
        return None
    return float(np.percentile(np.asarray(values), q))


def _inference_metrics(func: FunctionSpec, log: RunLog) -> FunctionMetrics:
    requests = log.requests.get(func.id, [])
    slo = func.slo_ms or 0.0
    latencies = [lat for r in requests if (lat := r.latency_ms) is not None]
    violations = sum(1 for r in requests if r.latency_ms is None or r.latency_ms > slo)
    return FunctionMetrics(
        function_id=func.id,
        kind="inference",
        admitted=len(requests),
        completed=len(latencies),
        p50_ms=_percentile(latencies, 50),
        p95_ms=_percentile(latencies, 95),
        svr=violations / len(requests) if requests else 0.0,
        csc=log.csc.get(func.id, 0),
    )


def _training_metrics(func: FunctionSpec, log: RunLog, catalog: ModelCatalog) -> FunctionMetrics:
    samples = log.samples.get(func.id, 0)
    elapsed = log.jct_s.get(func.id, log.duration_s)
    normalized = None
    kind = func.kind
    if func.id in log.jct_s and isinstance(kind, TrainingKind) and kind.samples_target:
        model = catalog.get(func.model)
        ideal = train_throughput(model, 100.0, func.n_gpus, kind.comm_idle_frac)
        normalized = log.jct_s[func.id] / (kind.samples_target / ideal)
    return FunctionMetrics(
        function_id=func.id,
        kind="training",
        samples=samples,
        training_throughput=samples / elapsed if elapsed > 0 else 0.0,
        normalized_jct=normalized,
        csc=log.csc.get(func.id, 0),
    )


def compute_metrics(log: RunLog, catalog: ModelCatalog) -> MetricsReport:
    """Summarize a run.

    Unfinished requests count as SLO violations. Fragmentation averages are
    over (tick, active GPU) pairs; saved GPU time compares against running
    every instance on whole GPUs of its own.
    """
    per_function = [
        _training_metrics(f, log, catalog) if f.is_training else _inference_metrics(f, log)
        for f in sorted(log.functions, key=lambda f: f.id)
    ]
    inference = [m for m in per_function if m.kind == "inference"]
    admitted = sum(m.admitted for m in inference)
    violated = sum(round(m.svr * m.admitted) for m in inference)
    completed = sum(m.completed for m in inference)
    samples = sum(m.samples for m in per_function)

    tick_s = log.period_ms / 1000.0
    occupied_s = log.active_gpu_ticks * tick_s
    active = log.active_gpu_ticks
    report = MetricsReport(
        mode=log.mode,
        seed=log.seed,
        duration_s=log.duration_s,
        functions=per_function,
        gpu_count_peak=max(log.gpu_counts, default=0),
        gpu_count_mean=float(np.mean(log.gpu_counts)) if log.gpu_counts else 0.0,
        sm_fragmentation=min(1.0, max(0.0, log.sm_frag_sum / active)) if active else 0.0,
        mem_fragmentation=min(1.0, max(0.0, log.mem_frag_sum / active)) if active else 0.0,
        aggregate_throughput=(completed + samples) / occupied_s if occupied_s > 0 else None,
        saved_gpu_time_s=(log.exclusive_gpu_ticks - log.active_gpu_ticks) * tick_s,
        training_throughput=samples / log.duration_s,
        total_csc=sum(log.csc.values()),
        overall_svr=min(1.0, violated / admitted) if admitted else 0.0,
        instances_placed=log.instances_placed,
        placement_failures=log.placement_failures,
    )
    logger.info(
        f"Computed metrics for {log.mode} run",
        extra={"mode": log.mode, "seed": log.seed, "overall_svr": report.overall_svr},
    )
    return report
