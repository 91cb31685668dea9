"""Profiling parameters, trial records and reports."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from src.models.domain import ResourceQuota, SmRate


class ProfileTrial(BaseModel):
    """One oracle probe made during a profiling session."""

    model_config = ConfigDict(frozen=True)

    trial_index: int = Field(..., ge=1, description="1-based, strictly increasing per session")
    session: str = Field(..., description="Session label", examples=["request", "limit", "search"])
    smr: SmRate
    ibs: int | None = Field(default=None, ge=1)
    measured: float = Field(..., description="Throughput (samples/s) or latency (ms)")
    feasible: bool | None = Field(default=None, description="SLO feasibility for inference probes")


class TrainingProfileParams(BaseModel):
    """Throughput fractions targeted by the training bisection."""

    p_request: float = Field(default=0.80, gt=0.0, le=1.0)
    p_limit: float = Field(default=1.00, gt=0.0, le=1.0)
    tolerance: float = Field(default=0.02, gt=0.0)
    smr_floor: float = Field(default=1.0, gt=0.0, description="Bisection stops below this width")
    max_trials: int = Field(default=8, ge=2, description="Per-session trial cap")

    @model_validator(mode="after")
    def _ordered(self) -> "TrainingProfileParams":
        if self.p_request > self.p_limit:
            raise ValueError("p_request must not exceed p_limit")
        return self


class ProfileResult(BaseModel):
    """Outcome of profiling one model for one function kind."""

    model: str
    kind: Literal["training", "inference"]
    method: Literal["bisection", "hybrid_growth", "traversal"]
    quota: ResourceQuota
    trials: list[ProfileTrial] = Field(default_factory=list)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def trial_count(self) -> int:
        return len(self.trials)

    def session_counts(self) -> dict[str, int]:
        """Number of trials per session label."""
        counts: dict[str, int] = {}
        for trial in self.trials:
            counts[trial.session] = counts.get(trial.session, 0) + 1
        return counts


class ProfileRequest(BaseModel):
    """HTTP body for profiling a single model."""

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {"model": "roberta-large-like", "kind": "inference", "slo_ms": 120.0},
                {"model": "resnet152-like", "kind": "training", "workers": 2},
            ]
        }
    )

    model: str = Field(..., description="Built-in model profile name")
    kind: Literal["training", "inference"] = "inference"
    slo_ms: float | None = Field(default=None, gt=0.0, description="Defaults to the model's SLO")
    workers: int = Field(default=1, ge=1)
    comm_idle_frac: float = Field(default=0.0, ge=0.0, lt=1.0)
    smr_step: float = Field(default=10.0, gt=0.0, le=100.0)
    ibs_max: int = Field(default=32, ge=1)
    with_traversal: bool = Field(default=False, description="Also run the exhaustive grid")


class ProfileEntry(BaseModel):
    """One line of a profiling report; ``error`` set when profiling failed."""

    model: str
    kind: Literal["training", "inference"]
    slo_ms: float | None = None
    result: ProfileResult | None = None
    traversal: ProfileResult | None = None
    error: str | None = None


class ProfileReport(BaseModel):
    """Profiling report written by the profile command."""

    catalog_version: str
    entries: list[ProfileEntry] = Field(default_factory=list)
