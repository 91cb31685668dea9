"""Global exception handler producing structured :class:`ErrorResponse` payloads."""

import logging

from fastapi import Request, status
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from src.models.error import (
    CapacityExhaustedError,
    DuplicateInstanceError,
    ErrorResponse,
    InvariantViolationError,
    MonotonicityError,
    OutputIOError,
    SimulationError,
    SloUnattainableError,
    UnknownInstanceError,
    UnprofiledFunctionError,
    ValidationFailedError,
    ZeroComputeError,
)

logger = logging.getLogger(__name__)

_STATUS_BY_ERROR: list[tuple[type[SimulationError], int]] = [
    (ValidationFailedError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (ZeroComputeError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (SloUnattainableError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (MonotonicityError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (UnprofiledFunctionError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (CapacityExhaustedError, status.HTTP_409_CONFLICT),
    (DuplicateInstanceError, status.HTTP_409_CONFLICT),
    (UnknownInstanceError, status.HTTP_404_NOT_FOUND),
    (InvariantViolationError, status.HTTP_500_INTERNAL_SERVER_ERROR),
    (OutputIOError, status.HTTP_500_INTERNAL_SERVER_ERROR),
]


def status_for(exc: SimulationError) -> int:
    for error_type, code in _STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return code
    return status.HTTP_500_INTERNAL_SERVER_ERROR


async def handle_exception(request: Request, exc: Exception) -> JSONResponse:
    """Convert any exception raised by a route into an ``ErrorResponse``.

    Args:
        request: Request being served
        exc: Exception raised while serving it

    Returns:
        JSONResponse with the error payload and a matching status code
    """
    if isinstance(exc, SimulationError):
        code = status_for(exc)
        log = logger.error if code >= 500 else logger.warning
        log(
            f"{exc.error_code} on {request.method} {request.url.path}: {exc.message}",
            extra={"error_code": exc.error_code, "status_code": code},
        )
        return JSONResponse(status_code=code, content=exc.to_response().model_dump())

    if isinstance(exc, ValidationError | ValueError):
        error = ErrorResponse(error_code="VALIDATION_ERROR", message=str(exc))
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content=error.model_dump()
        )

    logger.exception("Unexpected error occurred", exc_info=exc)
    error = ErrorResponse(
        error_code="INTERNAL_SERVER_ERROR",
        message="An unexpected error occurred.",
        details={"error_type": type(exc).__name__},
    )
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, content=error.model_dump()
    )
