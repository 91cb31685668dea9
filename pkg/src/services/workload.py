"""Seeded request-arrival generators.

Every generator draws from its own named sub-stream of the scenario seed, so
adding a function or a generator never perturbs the arrivals of another.
Arrival times are milliseconds from the start of the run, sorted ascending.
"""

import logging
import math
import zlib
from pathlib import Path

import numpy as np
import pandas as pd

from src.models.error import ValidationFailedError
from src.models.scenario import (
    BurstyPattern,
    GammaPattern,
    PeriodicPattern,
    PoissonPattern,
    SporadicPattern,
    TraceFilePattern,
    WorkloadPattern,
)

logger = logging.getLogger(__name__)


def rng_for(seed: int, stream: str) -> np.random.Generator:
    """Independent generator for the named sub-stream of ``seed``."""
    key = zlib.crc32(stream.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


class _Draw:
    """Inter-arrival sampler; exponential unless a gamma shape is set."""

    def __init__(self, mean_gap_ms: float, shape: float | None = None) -> None:
        self.mean_gap_ms = mean_gap_ms
        self.shape = shape

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.shape is None:
            return rng.exponential(self.mean_gap_ms, size)
        return rng.gamma(self.shape, self.mean_gap_ms / self.shape, size)


def _renewal(
    rng: np.random.Generator, draw: _Draw, start_ms: float, end_ms: float, mean_gap_ms: float
) -> np.ndarray:
    """Cumulative arrivals in [start, end) from a renewal process."""
    if end_ms <= start_ms:
        return np.empty(0)
    chunk = max(16, int(1.5 * (end_ms - start_ms) / mean_gap_ms) + 16)
    parts: list[np.ndarray] = []
    t = start_ms
    while t < end_ms:
        times = t + np.cumsum(draw(rng, chunk))
        parts.append(times)
        t = float(times[-1])
    arrivals = np.concatenate(parts)
    return arrivals[arrivals < end_ms]


def _poisson(
    rng: np.random.Generator, rate_rps: float, start_ms: float, end_ms: float
) -> np.ndarray:
    if rate_rps <= 0:
        return np.empty(0)
    gap = 1000.0 / rate_rps
    return _renewal(rng, _Draw(gap), start_ms, end_ms, gap)


def _bursty(rng: np.random.Generator, p: BurstyPattern, end_ms: float) -> np.ndarray:
    base = _poisson(rng, p.base_rps, 0.0, end_ms)
    extra_rps = p.base_rps * (p.burst_scale - 1.0)
    bursts = [base]
    start = p.burst_offset_s * 1000.0
    while start < end_ms and extra_rps > 0 and p.burst_len_s > 0:
        stop = min(start + p.burst_len_s * 1000.0, end_ms)
        bursts.append(_poisson(rng, extra_rps, start, stop))
        start += p.burst_period_s * 1000.0
    return np.sort(np.concatenate(bursts))


def _periodic(rng: np.random.Generator, p: PeriodicPattern, end_ms: float) -> np.ndarray:
    peak = p.mean_rps * (1.0 + p.amplitude)
    candidates = _poisson(rng, peak, 0.0, end_ms)
    if candidates.size == 0:
        return candidates
    phase = 2.0 * math.pi * candidates / (p.period_s * 1000.0)
    rate = p.mean_rps * (1.0 + p.amplitude * np.sin(phase))
    keep = rng.random(candidates.size) * peak < rate
    return candidates[keep]


def _sporadic(rng: np.random.Generator, p: SporadicPattern, end_ms: float) -> np.ndarray:
    parts: list[np.ndarray] = []
    t = rng.exponential(p.off_s * 1000.0)
    while t < end_ms:
        on_end = min(t + rng.exponential(p.on_s * 1000.0), end_ms)
        parts.append(_poisson(rng, p.on_rps, t, on_end))
        t = on_end + rng.exponential(p.off_s * 1000.0)
    return np.concatenate(parts) if parts else np.empty(0)


def _trace_file(rng: np.random.Generator, p: TraceFilePattern, end_ms: float) -> np.ndarray:
    path = Path(p.path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise ValidationFailedError([f"cannot read trace {path}: {e}"], subject="trace file") from e
    missing = {"second", "count"} - set(frame.columns)
    if missing:
        raise ValidationFailedError(
            [f"trace {path} lacks columns {sorted(missing)}"], subject="trace file"
        )
    parts = []
    for second, count in zip(frame["second"], frame["count"], strict=True):
        if count <= 0:
            continue
        offsets = np.sort(rng.random(int(count))) * 1000.0
        parts.append(float(second) * 1000.0 + offsets)
    if not parts:
        return np.empty(0)
    arrivals = np.sort(np.concatenate(parts))
    return arrivals[arrivals < end_ms]


def generate_trace(
    pattern: WorkloadPattern, duration_s: float, seed: int, stream: str = "trace"
) -> np.ndarray:
    """Arrival timestamps (ms) for ``pattern`` over ``duration_s``.

    Args:
        pattern: Workload pattern
        duration_s: Run length in seconds
        seed: Scenario seed
        stream: Sub-stream name, usually the function id

    Returns:
        Sorted float array of arrival times in [0, duration_s * 1000)

    Examples:
        >>> trace = generate_trace(PoissonPattern(mean_rps=0), 10, seed=1)
        >>> trace.size
        0
    """
    rng = rng_for(seed, f"trace-gen/{stream}")
    end_ms = duration_s * 1000.0
    match pattern:
        case PoissonPattern():
            arrivals = _poisson(rng, pattern.mean_rps, 0.0, end_ms)
        case GammaPattern():
            if pattern.mean_rps <= 0:
                arrivals = np.empty(0)
            else:
                gap = 1000.0 / pattern.mean_rps
                shape = 1.0 / pattern.cv**2
                arrivals = _renewal(rng, _Draw(gap, shape), 0.0, end_ms, gap)
        case BurstyPattern():
            arrivals = _bursty(rng, pattern, end_ms)
        case PeriodicPattern():
            arrivals = _periodic(rng, pattern, end_ms)
        case SporadicPattern():
            arrivals = _sporadic(rng, pattern, end_ms)
        case TraceFilePattern():
            arrivals = _trace_file(rng, pattern, end_ms)
    logger.debug(
        f"Generated {arrivals.size} arrivals for {stream}",
        extra={"stream": stream, "pattern": pattern.type, "seed": seed},
    )
    return arrivals


def trace_frame(arrivals: np.ndarray, function_id: str) -> pd.DataFrame:
    """Arrivals as a ``function_id,arrival_ms`` frame for CSV export."""
    return pd.DataFrame({"function_id": function_id, "arrival_ms": arrivals})
