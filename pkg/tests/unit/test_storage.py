"""Unit tests for run output files."""

from pathlib import Path

import pytest

from src.models.scenario import BaselineMode
from src.services.metrics import RunLog, SimulationResult, compute_metrics
from src.services.perfmodel import ModelCatalog


@pytest.fixture
def result(catalog: ModelCatalog) -> SimulationResult:
    log = RunLog(
        mode=BaselineMode.STATIC_LIMIT,
        seed=3,
        duration_s=2.0,
        period_ms=5.0,
        gpu_counts=[1, 2],
        active_gpu_ticks=600,
        exclusive_gpu_ticks=800,
        grant_rows=[(0, 0, "f#0000", "none", 600, 600)],
        scaling_rows=[(1, "f", "scale_out", 1, 2)],
    )
    return SimulationResult(report=compute_metrics(log, catalog), log=log)


def test_write_run_and_read_back(tmp_path: Path, result: SimulationResult) -> None:
    """Validates: a run directory holds metrics plus three CSV traces that read back."""
    from src.services.storage import read_metrics, write_run

    written = write_run(tmp_path / "run", result)

    assert sorted(p.name for p in written) == [
        "gpu_count.csv",
        "grants.csv",
        "metrics.json",
        "scaling.csv",
    ]
    assert read_metrics(tmp_path / "run") == result.report
    grants = (tmp_path / "run" / "grants.csv").read_text().splitlines()
    assert grants == ["tick,gpu_id,instance_id,state,r_issue,executed", "0,0,f#0000,none,600,600"]


def test_read_metrics_skips_missing_and_corrupt(tmp_path: Path) -> None:
    from src.services.storage import read_metrics

    assert read_metrics(tmp_path / "absent") is None

    (tmp_path / "metrics.json").write_text("{not json")
    assert read_metrics(tmp_path) is None


def test_unwritable_path_raises_output_error(tmp_path: Path) -> None:
    """Validates: a write that keeps failing surfaces as OutputIOError after retries."""
    from src.models.error import OutputIOError
    from src.services.storage import write_text

    blocker = tmp_path / "file"
    blocker.write_text("x")

    with pytest.raises(OutputIOError) as exc:
        write_text(blocker / "nested" / "out.txt", "data")
    assert exc.value.error_code == "IO_ERROR"


def test_comparison_table(result: SimulationResult) -> None:
    from src.services.storage import comparison_table

    other = result.report.model_copy(update={"total_csc": 4})
    table = comparison_table({"static": result.report, "dilu": other})

    assert list(table.columns) == ["static", "dilu"]
    assert table.index.name == "metric"
    assert table.loc["CSC", "dilu"] == 4
    assert table.loc["SGT (s)", "static"] == pytest.approx(1.0)
