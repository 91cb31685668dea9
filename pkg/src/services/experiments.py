"""Parameter sweeps over independent scenario runs.

Each grid point is a fresh scenario derived from the base one; points share
no mutable state, so they may run on a thread pool. Results are always
returned in grid order regardless of completion order.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import StrEnum
from typing import Any

import pandas as pd

from src.models.error import ValidationFailedError
from src.models.metrics import MetricsReport
from src.models.scenario import BaselineMode, Scenario
from src.services.metrics import SimulationResult
from src.services.perfmodel import ModelCatalog
from src.services.simulator import run_scenario

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "axis",
    "value",
    "mode",
    "gpu_count_peak",
    "gpu_count_mean",
    "sm_fragmentation",
    "mem_fragmentation",
    "overall_svr",
    "total_csc",
    "p95_ms_max",
    "training_throughput",
    "saved_gpu_time_s",
]


class SweepAxis(StrEnum):
    GAMMA = "gamma"
    MAX_TOKENS = "max_tokens"
    CV = "cv"
    MEAN_RPS = "mean_rps"


_RATE_FIELD = {
    "poisson": "mean_rps",
    "gamma": "mean_rps",
    "periodic": "mean_rps",
    "bursty": "base_rps",
    "sporadic": "on_rps",
}


def apply_axis(scenario: Scenario, axis: SweepAxis, value: float) -> Scenario:
    """Copy of ``scenario`` with ``axis`` set to ``value``, re-validated.

    Raises:
        ValidationFailedError: If the scenario has nothing the axis can change
    """
    data: dict[str, Any] = scenario.model_dump(mode="json")
    match axis:
        case SweepAxis.GAMMA:
            data["scheduler"]["gamma"] = value
        case SweepAxis.MAX_TOKENS:
            vscaler = data["vscaler"]
            vscaler["gpu_blocks_per_period"] = scenario.vscaler.capacity
            vscaler["max_tokens"] = int(value)
        case SweepAxis.CV | SweepAxis.MEAN_RPS:
            touched = 0
            for entry in data["functions"]:
                workload = entry.get("workload")
                if workload is None:
                    continue
                if axis is SweepAxis.CV and workload["type"] == "gamma":
                    workload["cv"] = value
                    touched += 1
                elif axis is SweepAxis.MEAN_RPS and workload["type"] in _RATE_FIELD:
                    workload[_RATE_FIELD[workload["type"]]] = value
                    touched += 1
            if not touched:
                raise ValidationFailedError(
                    [f"no workload in the scenario has a {axis} parameter"], subject="sweep axis"
                )
    return Scenario.model_validate(data)


def _row(axis: SweepAxis, value: float, report: MetricsReport) -> dict[str, Any]:
    p95 = [f.p95_ms for f in report.functions if f.p95_ms is not None]
    return {
        "axis": axis.value,
        "value": value,
        "mode": report.mode.value,
        "gpu_count_peak": report.gpu_count_peak,
        "gpu_count_mean": report.gpu_count_mean,
        "sm_fragmentation": report.sm_fragmentation,
        "mem_fragmentation": report.mem_fragmentation,
        "overall_svr": report.overall_svr,
        "total_csc": report.total_csc,
        "p95_ms_max": max(p95) if p95 else None,
        "training_throughput": report.training_throughput,
        "saved_gpu_time_s": report.saved_gpu_time_s,
    }


def sweep(
    scenario: Scenario,
    axis: SweepAxis,
    points: list[float],
    modes: list[BaselineMode] | None = None,
    threads: int = 1,
    catalog: ModelCatalog | None = None,
) -> tuple[pd.DataFrame, list[SimulationResult]]:
    """Run every (point, mode) combination of the grid.

    Args:
        scenario: Base scenario
        axis: Parameter to vary
        points: Values for the axis
        modes: Baselines to compare; the scenario's own mode when omitted
        threads: Worker threads, at least 1
        catalog: Base model profiles

    Returns:
        The sweep table (one row per run, grid order) and the run results
    """
    modes = modes or [scenario.baseline_mode]
    grid = [
        apply_axis(scenario, axis, value).model_copy(update={"baseline_mode": mode})
        for value, mode in itertools.product(points, modes)
    ]
    logger.info(
        f"Sweeping {axis} over {len(points)} points x {len(modes)} modes",
        extra={"axis": axis, "points": points, "threads": threads},
    )
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda s: run_scenario(s, catalog), grid))
    rows = [
        _row(axis, value, result.report)
        for (value, _), result in zip(itertools.product(points, modes), results, strict=True)
    ]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS), results
