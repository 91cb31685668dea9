"""Run output files and the cross-run comparison table.

Every write goes through :data:`io_retry`; a write that still fails after the
last attempt surfaces as :class:`OutputIOError`.

Files in a run directory:

- ``metrics.json``: the :class:`MetricsReport`
- ``grants.csv``: tick, gpu_id, instance_id, state, r_issue, executed
- ``scaling.csv``: second, function_id, decision, n_before, n_after
- ``gpu_count.csv``: second, gpu_count
"""

import logging
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, ValidationError
from tenacity import (
    before_sleep_log,
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from src.models.error import OutputIOError
from src.models.metrics import MetricsReport
from src.services.metrics import SimulationResult

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.json"
GRANTS_FILE = "grants.csv"
SCALING_FILE = "scaling.csv"
GPU_COUNT_FILE = "gpu_count.csv"

io_retry = retry(
    retry=retry_if_exception_type(OSError),
    wait=wait_exponential(multiplier=0.1, min=0.1, max=2),
    stop=stop_after_attempt(3),
    before_sleep=before_sleep_log(logger, logging.WARNING),
    reraise=True,
)


@io_retry
def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def write_text(path: str | Path, text: str) -> Path:
    """Write ``text`` to ``path``, creating parent directories.

    Raises:
        OutputIOError: If the write keeps failing
    """
    target = Path(path)
    try:
        _write_text(target, text)
    except OSError as e:
        raise OutputIOError(str(target), str(e)) from e
    return target


def write_json(path: str | Path, model: BaseModel) -> Path:
    return write_text(path, model.model_dump_json(indent=2) + "\n")


def write_frame(path: str | Path, frame: pd.DataFrame) -> Path:
    return write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def write_run(out_dir: str | Path, result: SimulationResult) -> list[Path]:
    """Write a run's metrics and traces into ``out_dir``."""
    out = Path(out_dir)
    written = [
        write_json(out / METRICS_FILE, result.report),
        write_frame(out / GRANTS_FILE, result.log.grants_frame()),
        write_frame(out / SCALING_FILE, result.log.scaling_frame()),
        write_frame(out / GPU_COUNT_FILE, result.log.gpu_count_frame()),
    ]
    logger.info(
        f"Wrote {len(written)} files to {out}",
        extra={"out_dir": str(out), "mode": result.report.mode},
    )
    return written


def read_metrics(run_dir: str | Path) -> MetricsReport | None:
    """Load ``metrics.json`` from a run directory; None when missing or unreadable."""
    path = Path(run_dir) / METRICS_FILE
    try:
        return MetricsReport.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as e:
        logger.warning(f"Skipping {run_dir}: {e}", extra={"run_dir": str(run_dir)})
        return None


_TABLE_ROWS = [
    ("SVR", "overall_svr"),
    ("CSC", "total_csc"),
    ("SGT (s)", "saved_gpu_time_s"),
    ("SM fragmentation", "sm_fragmentation"),
    ("Memory fragmentation", "mem_fragmentation"),
    ("GPU count (peak)", "gpu_count_peak"),
    ("GPU count (mean)", "gpu_count_mean"),
    ("Training throughput", "training_throughput"),
]


def comparison_table(reports: dict[str, MetricsReport]) -> pd.DataFrame:
    """Side-by-side table: one column per run, one row per headline metric."""
    table = pd.DataFrame(
        {name: [getattr(r, field) for _, field in _TABLE_ROWS] for name, r in reports.items()},
        index=[label for label, _ in _TABLE_ROWS],
    )
    table.index.name = "metric"
    return table
