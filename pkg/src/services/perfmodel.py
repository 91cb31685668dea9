"""Synthetic performance oracle standing in for real GPUs.

Maps (model, SMR, IBS) to latency and throughput and converts work into
kernel blocks for the token arbiter. All functions are pure over an
immutable :class:`ModelRef`; :class:`PerformanceOracle` adds optional seeded
log-normal jitter for robustness runs.
"""

import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from src.models.error import ValidationFailedError, ZeroComputeError
from src.models.perf import ModelCatalogFile, ModelRef

logger = logging.getLogger(__name__)

_EPS = 1e-9


def knee(model: ModelRef, ibs: int) -> float:
    """SMR beyond which inference latency stops improving for batch size ``ibs``."""
    return min(100.0, model.knee_coeff * math.sqrt(ibs))


def infer_exec_time(model: ModelRef, ibs: int, smr: float) -> float:
    """Batch execution time in ms at the given SM rate.

    Args:
        model: Model profile
        ibs: Batch size, at least 1
        smr: SM rate in (0, 100]

    Returns:
        ``(a + b*ibs) * knee(ibs) / min(smr, knee(ibs))``

    Raises:
        ZeroComputeError: If ``smr`` is 0
        ValueError: If ``ibs`` or ``smr`` is out of range

    Examples:
        >>> m = ModelRef(name="m", mem_gb=1, a_ms=5, b_ms=5, knee_coeff=50, knee_t=50,
        ...              t_max=10, blocks_per_sample=1)
        >>> infer_exec_time(m, 4, 100)
        25.0
        >>> infer_exec_time(m, 4, 50)
        50.0
    """
    if ibs < 1:
        raise ValueError(f"ibs must be >= 1, got {ibs}")
    if smr <= 0:
        raise ZeroComputeError(model.name)
    if smr > 100.0 + _EPS:
        raise ValueError(f"smr must be <= 100, got {smr}")
    k = knee(model, ibs)
    return (model.a_ms + model.b_ms * ibs) * k / min(smr, k)


def train_throughput(
    model: ModelRef, smr: float, workers: int = 1, comm_idle_frac: float = 0.0
) -> float:
    """Training samples/s: ``workers * T_max * min(1, smr/knee_t) * (1 - idle)``."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers * model.t_max * min(1.0, smr / model.knee_t) * (1.0 - comm_idle_frac)


def kernel_blocks(model: ModelRef, samples: int) -> int:
    """Kernel blocks emitted while processing ``samples`` training samples."""
    if samples < 0:
        raise ValueError(f"samples must be >= 0, got {samples}")
    return samples * model.blocks_per_sample


def cold_start_time(model: ModelRef) -> float:
    """Container start plus model load, in ms; 0 means instances start warm.

    Args:
        model: Model profile

    Returns:
        Delay before a new instance can serve
    """
    return model.cold_start_ms


def batch_blocks(model: ModelRef, k: int, blocks_per_period: int, period_ms: float) -> int:
    """Blocks in one inference batch of size ``k``.

    Sized so the batch executed at ``blocks_per_period * smr / 100`` blocks per
    period reproduces :func:`infer_exec_time`.
    """
    k_smr = knee(model, k)
    raw = (model.a_ms + model.b_ms * k) * k_smr * blocks_per_period / (100.0 * period_ms)
    return max(1, math.ceil(raw - _EPS))


def batch_block_cap(model: ModelRef, k: int, blocks_per_period: int) -> int:
    """Blocks per period an inference batch of size ``k`` can execute at most."""
    return max(1, math.floor(blocks_per_period * knee(model, k) / 100.0 + _EPS))


def iteration_block_cap(model: ModelRef, blocks_per_period: int) -> int:
    """Blocks per period a training iteration can execute at most."""
    return max(1, math.floor(blocks_per_period * model.knee_t / 100.0 + _EPS))


@dataclass
class PerformanceOracle:
    """Oracle facade used by the profiler.

    With ``jitter_sigma`` > 0 every probe is scaled by a log-normal factor
    drawn from ``rng``; the default is exact.
    """

    jitter_sigma: float = 0.0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))

    def _jitter(self) -> float:
        if self.jitter_sigma <= 0:
            return 1.0
        return float(self.rng.lognormal(mean=0.0, sigma=self.jitter_sigma))

    def infer_exec_time(self, model: ModelRef, ibs: int, smr: float) -> float:
        return infer_exec_time(model, ibs, smr) * self._jitter()

    def train_throughput(
        self, model: ModelRef, smr: float, workers: int = 1, comm_idle_frac: float = 0.0
    ) -> float:
        return train_throughput(model, smr, workers, comm_idle_frac) * self._jitter()


class ModelCatalog:
    """Named model profiles plus the calibration asset version."""

    def __init__(self, models: list[ModelRef], version: str = "custom") -> None:
        self.version = version
        self._models = {m.name: m for m in models}

    def __contains__(self, name: object) -> bool:
        return name in self._models

    def __len__(self) -> int:
        return len(self._models)

    def names(self) -> list[str]:
        return list(self._models)

    def get(self, name: str) -> ModelRef:
        try:
            return self._models[name]
        except KeyError:
            raise ValidationFailedError(
                [f"unknown model {name!r}"], subject="model reference"
            ) from None

    def with_overrides(self, models: list[ModelRef]) -> "ModelCatalog":
        """Copy of this catalog with ``models`` added or replacing by name."""
        merged = dict(self._models)
        merged.update({m.name: m for m in models})
        return ModelCatalog(list(merged.values()), version=self.version)

    @property
    def max_mem_gb(self) -> float:
        return max((m.mem_gb for m in self._models.values()), default=0.0)


def load_model_catalog(path: str | Path | None = None) -> ModelCatalog:
    """Load model profiles from ``path`` or from the packaged asset.

    Raises:
        pydantic.ValidationError: If the file does not match the schema
    """
    if path is None:
        text = resources.files("src.assets").joinpath("models.json").read_text(encoding="utf-8")
        source = "built-in asset"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    parsed = ModelCatalogFile.model_validate_json(text)
    logger.info(
        f"Loaded {len(parsed.models)} model profiles from {source}",
        extra={"catalog_version": parsed.version, "source": source},
    )
    return ModelCatalog(parsed.models, version=parsed.version)

