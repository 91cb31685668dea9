"""Scenario schema: cluster, functions, workloads, configs and baseline mode."""

from enum import StrEnum
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.domain import DEFAULT_GPU_MEM_GB, FunctionSpec
from src.models.perf import ModelRef
from src.models.scaling import HscalerConfig, VscalerConfig
from src.models.scheduling import SchedulerConfig


class BaselineMode(StrEnum):
    """Resource management policy a run is evaluated under."""

    DILU = "dilu"
    EXCLUSIVE = "exclusive"
    STATIC_LIMIT = "static_limit"
    STATIC_REQUEST = "static_request"
    EAGER_HORIZONTAL = "eager_horizontal"


class PoissonPattern(BaseModel):
    type: Literal["poisson"] = "poisson"
    mean_rps: float = Field(..., ge=0.0)


class GammaPattern(BaseModel):
    """Gamma inter-arrivals with the given mean rate and coefficient of variation."""

    type: Literal["gamma"] = "gamma"
    mean_rps: float = Field(..., ge=0.0)
    cv: float = Field(..., gt=0.0)


class BurstyPattern(BaseModel):
    """Poisson base load plus periodic bursts at ``burst_scale`` times the base rate."""

    type: Literal["bursty"] = "bursty"
    base_rps: float = Field(..., ge=0.0)
    burst_scale: float = Field(default=4.0, ge=1.0)
    burst_period_s: float = Field(default=60.0, gt=0.0)
    burst_len_s: float = Field(default=10.0, ge=0.0)
    burst_offset_s: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _burst_fits(self) -> "BurstyPattern":
        if self.burst_len_s > self.burst_period_s:
            raise ValueError("burst_len_s must not exceed burst_period_s")
        return self


class PeriodicPattern(BaseModel):
    """Sinusoidally modulated Poisson rate."""

    type: Literal["periodic"] = "periodic"
    mean_rps: float = Field(..., ge=0.0)
    amplitude: float = Field(default=0.5, ge=0.0, le=1.0)
    period_s: float = Field(default=60.0, gt=0.0)


class SporadicPattern(BaseModel):
    """On/off source: Poisson at ``on_rps`` during on-periods, silent otherwise."""

    type: Literal["sporadic"] = "sporadic"
    on_rps: float = Field(..., ge=0.0)
    on_s: float = Field(default=5.0, gt=0.0, description="Mean on-period length")
    off_s: float = Field(default=30.0, gt=0.0, description="Mean off-period length")


class TraceFilePattern(BaseModel):
    """External trace: CSV with ``second,count`` columns."""

    type: Literal["trace_file"] = "trace_file"
    path: str


WorkloadPattern = Annotated[
    PoissonPattern
    | GammaPattern
    | BurstyPattern
    | PeriodicPattern
    | SporadicPattern
    | TraceFilePattern,
    Field(discriminator="type"),
]


class ClusterConfig(BaseModel):
    nodes: int = Field(default=1, ge=1)
    gpus_per_node: int = Field(default=4, ge=1)
    gpu_mem_gb: float = Field(default=DEFAULT_GPU_MEM_GB, gt=0.0)

    @property
    def total_gpus(self) -> int:
        return self.nodes * self.gpus_per_node


class ScenarioFunction(BaseModel):
    """A function deployed in a scenario together with its request stream."""

    function: FunctionSpec
    workload: WorkloadPattern | None = Field(
        default=None, description="Required for inference functions"
    )
    initial_instances: int = Field(default=1, ge=0, description="Warm instances at t=0")


class FleetSpec(BaseModel):
    """Placement-level large-scale fleet (no kernel execution)."""

    instances: int = Field(default=3200, ge=1)
    ratio: tuple[int, int, int] = Field(
        default=(2, 2, 6), description="training : LLM inference : other inference"
    )
    sample_s: float = Field(default=10.0, gt=0.0)
    arrival_window_frac: float = Field(default=0.5, gt=0.0, le=1.0)
    min_lifetime_frac: float = Field(default=0.5, gt=0.0)
    max_lifetime_frac: float = Field(default=1.0, gt=0.0)
    max_training_workers: int = Field(default=2, ge=1)
    pattern_tags: int = Field(default=8, ge=1, description="Distinct inference workload tags")
    training_models: list[str] = Field(
        default_factory=lambda: ["resnet152-like", "roberta-large-like", "gpt2-large-like"]
    )
    llm_models: list[str] = Field(default_factory=lambda: ["llama2-7b-like"])
    inference_models: list[str] = Field(
        default_factory=lambda: ["resnet152-like", "roberta-large-like", "gpt2-large-like"]
    )

    @model_validator(mode="after")
    def _lifetimes(self) -> "FleetSpec":
        if self.min_lifetime_frac > self.max_lifetime_frac:
            raise ValueError("min_lifetime_frac must not exceed max_lifetime_frac")
        if sum(self.ratio) <= 0 or min(self.ratio) < 0:
            raise ValueError("ratio entries must be non-negative with a positive sum")
        return self


class Scenario(BaseModel):
    """Complete simulation input.

    When ``fleet`` is set the run is placement-level: instances are generated
    from the fleet spec and ``functions`` is ignored.
    """

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "seed": 7,
                    "duration_s": 60,
                    "cluster": {"nodes": 1, "gpus_per_node": 2},
                    "baseline_mode": "dilu",
                    "functions": [
                        {
                            "function": {
                                "id": "roberta-infer",
                                "kind": {"kind": "inference", "slo_ms": 120},
                                "model": "roberta-large-like",
                            },
                            "workload": {"type": "poisson", "mean_rps": 20},
                        }
                    ],
                }
            ]
        }
    )

    seed: int = Field(default=0, ge=0)
    duration_s: float = Field(..., gt=0.0)
    cluster: ClusterConfig = Field(default_factory=ClusterConfig)
    models: list[ModelRef] = Field(
        default_factory=list, description="Extra or overriding model profiles"
    )
    functions: list[ScenarioFunction] = Field(default_factory=list)
    scheduler: SchedulerConfig = Field(default_factory=SchedulerConfig)
    vscaler: VscalerConfig = Field(default_factory=VscalerConfig)
    hscaler: HscalerConfig = Field(default_factory=HscalerConfig)
    baseline_mode: BaselineMode = BaselineMode.DILU
    fleet: FleetSpec | None = None
    check_invariants: bool = True
    record_grants: bool = True
