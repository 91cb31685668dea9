"""Model profiles consumed by the performance oracle."""

from pydantic import BaseModel, ConfigDict, Field


class ModelRef(BaseModel):
    """Parametric stand-in for one deep-learning model.

    Inference latency follows ``(a_ms + b_ms * ibs) * knee / min(smr, knee)``
    with ``knee = min(100, knee_coeff * sqrt(ibs))``. Training throughput
    saturates at ``knee_t`` percent SMs.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {
                    "name": "roberta-large-like",
                    "mem_gb": 3.0,
                    "a_ms": 10.0,
                    "b_ms": 4.0,
                    "knee_coeff": 25.5,
                    "knee_t": 60.0,
                    "t_max": 120.0,
                    "blocks_per_sample": 1000,
                    "cold_start_ms": 2000.0,
                    "is_llm": False,
                    "slo_ms": 120.0,
                }
            ]
        },
    )

    name: str = Field(..., min_length=1, description="Model profile name")
    mem_gb: float = Field(..., gt=0.0, description="Parameter plus activation footprint")
    a_ms: float = Field(..., gt=0.0, description="Fixed per-batch overhead")
    b_ms: float = Field(..., gt=0.0, description="Per-sample latency")
    knee_coeff: float = Field(..., gt=0.0, description="SMR units per unit of sqrt(IBS)")
    knee_t: float = Field(..., gt=0.0, le=100.0, description="Training saturation SMR")
    t_max: float = Field(..., gt=0.0, description="Training samples/s at full SMR")
    blocks_per_sample: int = Field(..., ge=1, description="Kernel blocks per sample")
    cold_start_ms: float = Field(default=2000.0, ge=0.0, description="Container plus load time")
    is_llm: bool = False
    slo_ms: float | None = Field(
        default=None, gt=0.0, description="Default inference SLO used by the profile command"
    )


class ModelCatalogFile(BaseModel):
    """On-disk layout of a model calibration file."""

    version: str = Field(..., description="Calibration asset version", examples=["1.0.0"])
    models: list[ModelRef] = Field(default_factory=list)
