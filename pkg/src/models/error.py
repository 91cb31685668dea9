"""Error payloads and the simulator exception hierarchy.

Every failure raised by the control plane carries a machine-readable
``error_code`` and optional ``details`` so the HTTP layer and the CLI can
report it in one structured shape.
"""

from typing import Any

from pydantic import BaseModel, Field


class ErrorResponse(BaseModel):
    """Standard error response model for all API errors.

    Attributes:
        error_code: Machine-readable error code (e.g., CAPACITY_EXHAUSTED,
            SLO_UNATTAINABLE)
        message: Human-readable error message explaining what went wrong
        details: Optional additional context for debugging
    """

    error_code: str = Field(
        ...,
        description="Machine-readable error code",
        examples=["CAPACITY_EXHAUSTED", "SLO_UNATTAINABLE", "VALIDATION_ERROR"],
    )
    message: str = Field(
        ...,
        description="Human-readable error message",
        examples=["No feasible <IBS, SMR> point at IBS=1 even with the full GPU"],
    )
    details: dict[str, Any] | None = Field(
        default=None,
        description="Optional additional context for debugging",
        examples=[{"function_id": "roberta-infer", "slo_ms": 10.0}],
    )

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "error_code": "CAPACITY_EXHAUSTED",
                    "message": "No inactive GPU remains and no active GPU is feasible",
                    "details": {"function_id": "llama-infer", "n_gpus": 1},
                },
                {
                    "error_code": "INVARIANT_VIOLATION",
                    "message": "GPU 3 req_sum 1.12 exceeds omega 1.0",
                    "details": {"tick": 420},
                },
            ]
        }
    }


class SimulationError(Exception):
    """Base class for every error raised by the simulator and control plane."""

    error_code = "SIMULATION_ERROR"

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize error with a message and structured context.

        Args:
            message: Human-readable description
            details: Optional machine-readable context
        """
        self.message = message
        self.details = details or {}
        super().__init__(message)

    def to_response(self) -> ErrorResponse:
        """Convert the exception into the structured error payload."""
        return ErrorResponse(
            error_code=self.error_code,
            message=self.message,
            details=self.details or None,
        )


class ValidationFailedError(SimulationError):
    """Raised when a function spec or scenario violates its invariants."""

    error_code = "VALIDATION_ERROR"

    def __init__(self, violations: list[str], subject: str = "input") -> None:
        self.violations = violations
        super().__init__(
            f"Invalid {subject}: " + "; ".join(violations),
            details={"violations": violations},
        )


class ZeroComputeError(SimulationError):
    """Raised when the performance oracle is asked to run with no SMs."""

    error_code = "ZERO_COMPUTE"

    def __init__(self, model: str) -> None:
        super().__init__("zero compute", details={"model": model})


class SloUnattainableError(SimulationError):
    """Raised when no <IBS, SMR> point meets the SLO, even IBS=1 at SMR=100."""

    error_code = "SLO_UNATTAINABLE"

    def __init__(self, model: str, slo_ms: float, min_latency_ms: float) -> None:
        self.slo_ms = slo_ms
        self.min_latency_ms = min_latency_ms
        super().__init__(
            f"SLO unattainable for {model}: t_exec budget {slo_ms / 2:.2f} ms "
            f"< minimum latency {min_latency_ms:.2f} ms",
            details={"model": model, "slo_ms": slo_ms, "min_latency_ms": min_latency_ms},
        )


class MonotonicityError(SimulationError):
    """Raised when training throughput drops while SMR grows."""

    error_code = "ORACLE_NOT_MONOTONE"

    def __init__(self, model: str, low_smr: float, high_smr: float) -> None:
        super().__init__(
            "oracle violates monotonicity precondition",
            details={"model": model, "low_smr": low_smr, "high_smr": high_smr},
        )


class UnprofiledFunctionError(SimulationError):
    """Raised when a function without profiled quotas is used for capacity."""

    error_code = "UNPROFILED_FUNCTION"

    def __init__(self, function_id: str) -> None:
        super().__init__(
            f"Function {function_id} has no profiled quota",
            details={"function_id": function_id},
        )


class CapacityExhaustedError(SimulationError):
    """Raised when no GPU (active or inactive) can host a placement."""

    error_code = "CAPACITY_EXHAUSTED"

    def __init__(self, function_id: str, n_gpus: int) -> None:
        super().__init__(
            "capacity exhausted",
            details={"function_id": function_id, "n_gpus": n_gpus},
        )


class UnknownInstanceError(SimulationError):
    """Raised when an operation references an instance that is not placed."""

    error_code = "UNKNOWN_INSTANCE"

    def __init__(self, instance_id: str) -> None:
        super().__init__(
            f"Unknown instance {instance_id}", details={"instance_id": instance_id}
        )


class DuplicateInstanceError(SimulationError):
    """Raised when a placement reuses the id of an instance that is still placed."""

    error_code = "DUPLICATE_INSTANCE"

    def __init__(self, instance_id: str) -> None:
        super().__init__(
            f"Instance {instance_id} is already placed", details={"instance_id": instance_id}
        )


class InvariantViolationError(SimulationError):
    """Raised by the per-tick checks when a domain invariant breaks."""

    error_code = "INVARIANT_VIOLATION"

    def __init__(self, tick: int, diagnostic: str) -> None:
        self.tick = tick
        super().__init__(diagnostic, details={"tick": tick})


class OutputIOError(SimulationError):
    """Raised when run outputs cannot be written after retries."""

    error_code = "IO_ERROR"

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(
            f"Cannot write {path}: {reason}", details={"path": path, "reason": reason}
        )
