"""Shared vocabulary for functions, quotas, GPUs, instances and requests.

SM rates are real-valued percentages of one GPU (0-100). Kernel-block tokens
are integers and live in the vertical scaler; conversions between the two go
through ``max_tokens * smr / 100`` and nowhere else.

Validated value types are pydantic models. Mutable runtime state touched on
every tick (instances, token counters, requests) uses slotted dataclasses.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

SmRate = Annotated[float, Field(ge=0.0, le=100.0, description="Percent of one GPU's SMs")]

SM_TOTAL = 100.0
DEFAULT_GPU_MEM_GB = 40.0


class Priority(StrEnum):
    """Scheduling priority used by the token arbiter."""

    SLO_SENSITIVE = "slo_sensitive"
    BEST_EFFORT = "best_effort"


class Phase(StrEnum):
    """Instance lifecycle; transitions move forward one step at a time."""

    COLD_STARTING = "cold_starting"
    WARM = "warm"
    DRAINING = "draining"
    TERMINATED = "terminated"


_PHASE_ORDER = {
    Phase.COLD_STARTING: 0,
    Phase.WARM: 1,
    Phase.DRAINING: 2,
    Phase.TERMINATED: 3,
}


class ResourceQuota(BaseModel):
    """The <request, limit> SM-rate pair plus steady memory demand.

    ``ibs`` is the profiled inference batch size and stays empty for
    training functions. Cross-field rules (request <= limit, positive memory)
    are reported by :func:`validate_spec` rather than raised here.
    """

    model_config = ConfigDict(frozen=True)

    request_smr: SmRate
    limit_smr: SmRate
    mem_gb: float = Field(..., ge=0.0, description="Steady GPU memory demand in GB")
    ibs: int | None = Field(default=None, ge=1, description="Inference batch size")

    @property
    def request_frac(self) -> float:
        return self.request_smr / SM_TOTAL

    @property
    def limit_frac(self) -> float:
        return self.limit_smr / SM_TOTAL


class TrainingKind(BaseModel):
    """Training function parameters (data-parallel workers)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["training"] = "training"
    workers: int = Field(default=1, ge=0, description="Number of GPUs n_j")
    comm_idle_frac: float = Field(
        default=0.0, ge=0.0, lt=1.0, description="Share of an iteration spent communicating"
    )
    batch_size: int = Field(default=32, ge=1, description="Samples per iteration per worker")
    samples_target: int | None = Field(
        default=None, ge=1, description="Samples to train before the job completes"
    )


class InferenceKind(BaseModel):
    """Inference function parameters."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["inference"] = "inference"
    slo_ms: float = Field(..., gt=0.0, description="End-to-end latency target")
    is_llm: bool = False


FunctionKind = Annotated[TrainingKind | InferenceKind, Field(discriminator="kind")]


class FunctionSpec(BaseModel):
    """A registered deep-learning function.

    ``quota`` is filled by the profiler. ``priority`` defaults by kind:
    inference is SLO-sensitive, training is best-effort; scenarios may
    override it explicitly.
    """

    model_config = ConfigDict(str_strip_whitespace=True)

    id: str = Field(..., min_length=1, description="Unique function name")
    kind: FunctionKind
    model: str = Field(..., description="Name of the model profile in the oracle")
    quota: ResourceQuota | None = None
    priority: Priority | None = None
    affinity_tag: str | None = Field(
        default=None,
        description="Workload-pattern tag; functions sharing (kind, tag) are affine",
        examples=["poisson-20rps"],
    )

    @model_validator(mode="after")
    def _default_priority(self) -> "FunctionSpec":
        if self.priority is None:
            default = (
                Priority.SLO_SENSITIVE
                if isinstance(self.kind, InferenceKind)
                else Priority.BEST_EFFORT
            )
            object.__setattr__(self, "priority", default)
        return self

    @property
    def is_training(self) -> bool:
        return isinstance(self.kind, TrainingKind)

    @property
    def is_llm(self) -> bool:
        return isinstance(self.kind, InferenceKind) and self.kind.is_llm

    @property
    def n_gpus(self) -> int:
        """GPUs needed per instance (n_j); inference instances need one."""
        return self.kind.workers if isinstance(self.kind, TrainingKind) else 1

    @property
    def slo_ms(self) -> float | None:
        return self.kind.slo_ms if isinstance(self.kind, InferenceKind) else None

    @property
    def affinity_class(self) -> tuple[str, str] | None:
        if self.affinity_tag is None:
            return None
        return (self.kind.kind, self.affinity_tag)


class GpuState(BaseModel):
    """Snapshot of one GPU's committed quotas and residents.

    ``req_sum`` and ``lim_sum`` are fractions of ``sm_total``.
    """

    gpu_id: int
    node_id: int
    sm_total: float = SM_TOTAL
    mem_total_gb: float = DEFAULT_GPU_MEM_GB
    req_sum: float = 0.0
    lim_sum: float = 0.0
    mem_used_gb: float = 0.0
    residents: list[str] = Field(default_factory=list)
    active: bool = False


@dataclass(slots=True)
class TokenState:
    """Per-instance token counters (kernel blocks)."""

    r_last: int = 0
    r_issue: int = 0
    pending_blocks: int = 0


@dataclass(slots=True)
class InstanceState:
    """Runtime state of one placed function instance."""

    instance_id: str
    function_id: str
    gpu_ids: list[int]
    started_at: int
    phase: Phase = Phase.COLD_STARTING
    cold_remaining_ms: float = 0.0
    token: TokenState = field(default_factory=TokenState)

    def advance(self, phase: Phase) -> None:
        """Move to ``phase``, which must directly follow the current one.

        Raises:
            ValueError: On a backwards, repeated or skipping transition
        """
        if _PHASE_ORDER[phase] != _PHASE_ORDER[self.phase] + 1:
            raise ValueError(f"{self.instance_id}: illegal transition {self.phase} -> {phase}")
        self.phase = phase


@dataclass(slots=True)
class Request:
    """One inference request; carrier for latency and SLO accounting."""

    request_id: int
    function_id: str
    arrival_ms: float
    deadline_ms: float
    batch_id: int | None = None
    completed_ms: float | None = None

    @property
    def latency_ms(self) -> float | None:
        if self.completed_ms is None:
            return None
        return self.completed_ms - self.arrival_ms


def validate_spec(spec: FunctionSpec) -> list[str]:
    """Return every violated invariant of ``spec``; an empty list means ok.

    Args:
        spec: Function spec, with or without a profiled quota

    Returns:
        Human-readable violation messages

    Examples:
        >>> quota = ResourceQuota(request_smr=60, limit_smr=30, mem_gb=2, ibs=4)
        >>> kind = InferenceKind(slo_ms=100)
        >>> validate_spec(FunctionSpec(id="f", kind=kind, model="m", quota=quota))
        ['request exceeds limit']
    """
    violations: list[str] = []
    quota = spec.quota
    if quota is not None:
        if quota.request_smr > quota.limit_smr:
            violations.append("request exceeds limit")
        if quota.mem_gb <= 0:
            violations.append("mem_gb must be positive for a deployable function")
        if isinstance(spec.kind, InferenceKind) and quota.ibs is None:
            violations.append("inference quota requires ibs")
        if isinstance(spec.kind, TrainingKind) and quota.ibs is not None:
            violations.append("training quota must not carry ibs")
    if isinstance(spec.kind, TrainingKind) and spec.kind.workers < 1:
        violations.append("n_j ≥ 1")
    return violations
