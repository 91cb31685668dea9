"""Unit tests for seeded arrival generators."""

from pathlib import Path

import numpy as np
import pytest

from src.models.scenario import (
    BurstyPattern,
    GammaPattern,
    PeriodicPattern,
    PoissonPattern,
    SporadicPattern,
    TraceFilePattern,
)
from src.services.workload import generate_trace


def test_same_seed_same_trace() -> None:
    """Validates: arrivals depend only on (pattern, duration, seed, stream)."""
    pattern = PoissonPattern(mean_rps=20.0)

    first = generate_trace(pattern, 30.0, seed=5, stream="f")
    second = generate_trace(pattern, 30.0, seed=5, stream="f")

    np.testing.assert_array_equal(first, second)
    assert not np.array_equal(first, generate_trace(pattern, 30.0, seed=5, stream="g"))
    assert not np.array_equal(first, generate_trace(pattern, 30.0, seed=6, stream="f"))


def test_arrivals_are_sorted_and_bounded() -> None:
    arrivals = generate_trace(GammaPattern(mean_rps=30.0, cv=2.0), 20.0, seed=1)
    assert np.all(np.diff(arrivals) >= 0)
    assert arrivals.min() >= 0.0
    assert arrivals.max() < 20_000.0


def test_poisson_rate() -> None:
    arrivals = generate_trace(PoissonPattern(mean_rps=100.0), 100.0, seed=3)
    assert arrivals.size == pytest.approx(10_000, rel=0.05)


def test_zero_rate_is_silent() -> None:
    assert generate_trace(PoissonPattern(mean_rps=0.0), 10.0, seed=1).size == 0
    assert generate_trace(GammaPattern(mean_rps=0.0, cv=2.0), 10.0, seed=1).size == 0


def test_gamma_matches_mean_and_cv() -> None:
    """Validates: inter-arrival gaps have the configured mean and coefficient of variation."""
    arrivals = generate_trace(GammaPattern(mean_rps=50.0, cv=2.0), 600.0, seed=9)
    gaps = np.diff(arrivals)

    assert gaps.mean() == pytest.approx(20.0, rel=0.1)
    assert gaps.std() / gaps.mean() == pytest.approx(2.0, rel=0.15)


def test_bursty_concentrates_load_in_bursts() -> None:
    pattern = BurstyPattern(
        base_rps=10.0, burst_scale=5.0, burst_period_s=20.0, burst_len_s=5.0, burst_offset_s=10.0
    )
    per_second = np.bincount(
        (generate_trace(pattern, 60.0, seed=2) // 1000).astype(int), minlength=60
    )

    in_burst = np.r_[10:15, 30:35, 50:55]
    outside = np.setdiff1d(np.arange(60), in_burst)
    assert per_second[in_burst].mean() == pytest.approx(50.0, rel=0.2)
    assert per_second[outside].mean() == pytest.approx(10.0, rel=0.2)


def test_periodic_keeps_mean_rate() -> None:
    arrivals = generate_trace(
        PeriodicPattern(mean_rps=40.0, amplitude=0.8, period_s=20.0), 200.0, seed=4
    )
    assert arrivals.size == pytest.approx(8000, rel=0.05)


def test_sporadic_has_silent_stretches() -> None:
    pattern = SporadicPattern(on_rps=50.0, on_s=2.0, off_s=10.0)
    per_second = np.bincount(
        (generate_trace(pattern, 300.0, seed=8) // 1000).astype(int), minlength=300
    )
    assert (per_second == 0).sum() > 150
    assert per_second.max() > 20


def test_trace_file_replays_counts(tmp_path: Path) -> None:
    path = tmp_path / "trace.csv"
    path.write_text("second,count\n0,3\n1,0\n2,5\n9,4\n")

    arrivals = generate_trace(TraceFilePattern(path=str(path)), 5.0, seed=1)

    counts = np.bincount((arrivals // 1000).astype(int), minlength=5)
    assert counts.tolist() == [3, 0, 5, 0, 0]


def test_trace_file_errors(tmp_path: Path) -> None:
    """Validates: missing files and missing columns are validation failures."""
    from src.models.error import ValidationFailedError

    with pytest.raises(ValidationFailedError, match="cannot read trace"):
        generate_trace(TraceFilePattern(path=str(tmp_path / "absent.csv")), 5.0, seed=1)

    bad = tmp_path / "bad.csv"
    bad.write_text("t,n\n0,1\n")
    with pytest.raises(ValidationFailedError, match="lacks columns"):
        generate_trace(TraceFilePattern(path=str(bad)), 5.0, seed=1)


def test_trace_frame() -> None:
    from src.services.workload import trace_frame

    frame = trace_frame(np.array([1.0, 2.5]), "f")
    assert list(frame.columns) == ["function_id", "arrival_ms"]
    assert frame["function_id"].tolist() == ["f", "f"]
