"""Scheduler configuration, placements and cluster snapshots."""

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.domain import FunctionSpec, GpuState


class SchedulerConfig(BaseModel):
    """Oversubscription caps and scoring weights for placement.

    ``omega`` caps the per-GPU sum of request fractions and ``gamma`` the sum
    of limit fractions.
    """

    model_config = ConfigDict(frozen=True)

    omega: float = Field(default=1.0, gt=0.0, description="Max request-fraction sum per GPU")
    gamma: float = Field(default=1.5, gt=0.0, description="Max limit-fraction sum per GPU")
    alpha: float = Field(default=0.5, ge=0.0, le=1.0, description="SM leftover weight")
    beta: float = Field(default=0.5, ge=0.0, le=1.0, description="Memory leftover weight")
    max_pipeline_stages: int = Field(default=4, ge=1, description="GPUs per split LLM instance")

    @model_validator(mode="after")
    def _check(self) -> "SchedulerConfig":
        if self.omega > self.gamma:
            raise ValueError("omega must not exceed gamma")
        if not math.isclose(self.alpha + self.beta, 1.0):
            raise ValueError("alpha + beta must equal 1")
        return self


class Placement(BaseModel):
    """Where one instance landed and what it charged on each GPU."""

    instance_id: str
    function_id: str
    gpu_ids: list[int] = Field(..., min_length=1)
    mem_split_gb: list[float] = Field(..., description="Memory charged per GPU, same order")
    request_frac: float = Field(..., ge=0.0, description="Charged request fraction per GPU")
    limit_frac: float = Field(..., ge=0.0, description="Charged limit fraction per GPU")


class DeploymentRequest(BaseModel):
    """Request to deploy one instance of a registered function."""

    model_config = ConfigDict(
        json_schema_extra={"examples": [{"function_id": "roberta-infer", "n_gpus": 1}]}
    )

    function_id: str
    n_gpus: int | None = Field(default=None, ge=1, description="Overrides the function's n_j")


class FunctionRegistration(BaseModel):
    """HTTP body registering a function with the placement service."""

    function: FunctionSpec


class ClusterSnapshot(BaseModel):
    """Serializable view of the cluster for reports and the HTTP API."""

    total_gpus: int
    active_gpus: int
    gpus: list[GpuState] = Field(default_factory=list, description="Active GPUs only")
