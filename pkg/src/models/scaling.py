"""Vertical and horizontal scaling configuration and state values."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class VscalerConfig(BaseModel):
    """Token arbiter configuration.

    ``gpu_blocks_per_period`` is the physical block capacity of one GPU per
    period; it defaults to ``max_tokens`` so tokens match the hardware.
    """

    model_config = ConfigDict(frozen=True)

    period_ms: float = Field(default=5.0, gt=0.0)
    max_tokens: int = Field(default=1000, gt=0)
    eta_violation: float = Field(default=0.3, gt=0.0)
    eta_increase: float = Field(default=1.25, gt=1.0)
    rate_window_len: int = Field(default=20, ge=1, description="Periods in the rate window")
    gpu_blocks_per_period: int | None = Field(default=None, gt=0)

    @property
    def capacity(self) -> int:
        return self.gpu_blocks_per_period or self.max_tokens


class ShareKind(StrEnum):
    NONE = "none"
    EMERGENCY = "emergency"
    RECOVERY = "recovery"
    CONTENTION = "contention"


class Branch(StrEnum):
    """Which arbitration branch an SLO-sensitive instance took."""

    PROTECT = "protect"
    SCALE_DOWN = "scale_down"
    SCALE_UP = "scale_up"
    CONTEND = "contend"


class LaunchCause(StrEnum):
    """Why an instance was started; demand launches always count as cold starts."""

    INITIAL = "initial"
    DEMAND = "demand"
    SCALE_OUT = "scale_out"


class ShareState(BaseModel):
    """Per-GPU sharing state; only EMERGENCY carries an owner."""

    model_config = ConfigDict(frozen=True)

    kind: ShareKind = ShareKind.NONE
    owner: str | None = None

    @model_validator(mode="after")
    def _owner_iff_emergency(self) -> "ShareState":
        if (self.owner is not None) != (self.kind is ShareKind.EMERGENCY):
            raise ValueError("owner must be set exactly when the state is EMERGENCY")
        return self


class HscalerConfig(BaseModel):
    """Lazy horizontal scaling thresholds (one RPS sample per second)."""

    model_config = ConfigDict(frozen=True)

    window_s: int = Field(default=40, ge=1)
    phi_out: int = Field(default=20, ge=1)
    phi_in: int = Field(default=30, ge=0)
    min_instances: int = Field(default=1, ge=0)
    idle_terminate_s: int | None = Field(default=None, ge=1, description="Scale-to-zero timeout")
    enabled: bool = Field(default=True, description="Disable to pin instance counts")

    @model_validator(mode="after")
    def _thresholds(self) -> "HscalerConfig":
        if self.phi_out > self.window_s or self.phi_in > self.window_s:
            raise ValueError("phi_out and phi_in must not exceed window_s")
        if self.phi_out + self.phi_in < self.window_s:
            raise ValueError("phi_out + phi_in must be at least window_s")
        return self


class ScaleAction(StrEnum):
    OUT = "scale_out"
    IN = "scale_in"
    HOLD = "hold"


class ScaleDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    action: ScaleAction = ScaleAction.HOLD
    count: int = Field(default=0, ge=0)
