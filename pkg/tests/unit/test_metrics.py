"""Unit tests for run summarization."""

from typing import Any

import pytest

from src.models.domain import Request
from src.models.scenario import BaselineMode
from src.services.metrics import RunLog, compute_metrics
from src.services.perfmodel import ModelCatalog
from tests.utils.scenarios import inference_function, quota, training_function


def _log(**kwargs: Any) -> RunLog:
    return RunLog(mode=BaselineMode.DILU, seed=1, duration_s=10.0, period_ms=5.0, **kwargs)


def _request(rid: int, latency_ms: float | None) -> Request:
    request = Request(
        request_id=rid, function_id="roberta-infer", arrival_ms=0.0, deadline_ms=120.0
    )
    if latency_ms is not None:
        request.completed_ms = latency_ms
    return request


def test_unfinished_and_late_requests_violate_slo(catalog: ModelCatalog) -> None:
    """Validates: SVR counts late and unfinished requests against admitted ones."""
    func = inference_function(quota=quota(20, 40, 3.0, 2))
    log = _log(
        functions=[func],
        requests={
            "roberta-infer": [
                _request(1, 50.0),
                _request(2, 100.0),
                _request(3, 130.0),
                _request(4, None),
            ]
        },
        csc={"roberta-infer": 2},
    )

    report = compute_metrics(log, catalog)

    metrics = report.functions[0]
    assert (metrics.admitted, metrics.completed) == (4, 3)
    assert metrics.svr == pytest.approx(0.5)
    assert metrics.p50_ms == pytest.approx(100.0)
    assert report.overall_svr == pytest.approx(0.5)
    assert report.total_csc == 2


def test_normalized_jct(catalog: ModelCatalog) -> None:
    """Validates: JCT is normalized by the exclusive full-GPU ideal time."""
    func = training_function(quota=quota(ibs=None), samples_target=800)
    log = _log(functions=[func], samples={"resnet-train": 800}, jct_s={"resnet-train": 4.0})

    metrics = compute_metrics(log, catalog).functions[0]

    assert metrics.normalized_jct == pytest.approx(2.0)
    assert metrics.training_throughput == pytest.approx(200.0)


def test_unfinished_training_has_no_jct(catalog: ModelCatalog) -> None:
    func = training_function(quota=quota(ibs=None), samples_target=800)
    log = _log(functions=[func], samples={"resnet-train": 500})

    metrics = compute_metrics(log, catalog).functions[0]

    assert metrics.normalized_jct is None
    assert metrics.training_throughput == pytest.approx(50.0)


def test_cluster_level_metrics(catalog: ModelCatalog) -> None:
    """Validates: saved GPU time, fragmentation and GPU counts."""
    log = _log(
        gpu_counts=[1, 3, 2],
        active_gpu_ticks=1000,
        exclusive_gpu_ticks=2000,
        sm_frag_sum=250.0,
        mem_frag_sum=500.0,
    )

    report = compute_metrics(log, catalog)

    assert report.saved_gpu_time_s == pytest.approx(5.0)
    assert report.sm_fragmentation == pytest.approx(0.25)
    assert report.mem_fragmentation == pytest.approx(0.5)
    assert report.gpu_count_peak == 3
    assert report.gpu_count_mean == pytest.approx(2.0)
    assert report.aggregate_throughput == pytest.approx(0.0)


def test_empty_run(catalog: ModelCatalog) -> None:
    report = compute_metrics(_log(), catalog)

    assert report.functions == []
    assert report.overall_svr == 0.0
    assert report.aggregate_throughput is None
    assert report.gpu_count_peak == 0


def test_run_log_frames() -> None:
    from src.services.metrics import GRANT_COLUMNS, SCALING_COLUMNS

    log = _log(
        gpu_count_interval_s=10.0,
        gpu_counts=[2, 4],
        grant_rows=[(0, 0, "a", "none", 400, 12)],
        scaling_rows=[(3, "f", "scale_out", 1, 2)],
    )

    assert list(log.grants_frame().columns) == GRANT_COLUMNS
    assert list(log.scaling_frame().columns) == SCALING_COLUMNS
    assert log.gpu_count_frame()["second"].tolist() == [0.0, 10.0]
