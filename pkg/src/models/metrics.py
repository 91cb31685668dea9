"""Run measurements."""

from pydantic import BaseModel, Field

from src.models.scenario import BaselineMode


class FunctionMetrics(BaseModel):
    """Per-function latency, SLO and training measurements."""

    function_id: str
    kind: str
    admitted: int = 0
    completed: int = 0
    p50_ms: float | None = None
    p95_ms: float | None = None
    svr: float = Field(default=0.0, ge=0.0, le=1.0, description="SLO violation rate")
    csc: int = Field(default=0, ge=0, description="Cold start count")
    samples: int = 0
    training_throughput: float | None = Field(default=None, description="Samples per second")
    normalized_jct: float | None = None


class MetricsReport(BaseModel):
    """Everything a run measured; written as ``metrics.json``."""

    mode: BaselineMode
    seed: int
    duration_s: float
    functions: list[FunctionMetrics] = Field(default_factory=list)
    gpu_count_peak: int = 0
    gpu_count_mean: float = 0.0
    sm_fragmentation: float = Field(default=0.0, ge=0.0, le=1.0)
    mem_fragmentation: float = Field(default=0.0, ge=0.0, le=1.0)
    aggregate_throughput: float | None = Field(
        default=None, description="Completed requests plus trained samples per GPU-second"
    )
    saved_gpu_time_s: float = 0.0
    training_throughput: float = 0.0
    total_csc: int = 0
    overall_svr: float = Field(default=0.0, ge=0.0, le=1.0)
    instances_placed: int = 0
    placement_failures: int = 0
