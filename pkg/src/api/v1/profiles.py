"""Profiling endpoint.

POST /v1/profiles runs the resource profiler against one built-in model and
returns the chosen quota together with every trial it took.
"""

import logging

from fastapi import APIRouter, status
from fastapi.concurrency import run_in_threadpool

from src.models.error import ErrorResponse
from src.models.profiling import ProfileEntry, ProfileRequest
from src.services.perfmodel import load_model_catalog
from src.services.profiler import profile_request

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/v1", tags=["Profiles"])


@router.post(
    "/profiles",
    response_model=ProfileEntry,
    status_code=status.HTTP_200_OK,
    summary="Profile a model",
    description=(
        "Find the request/limit SMR pair for a training model, or the "
        "<IBS, SMR> pair for an inference model under its SLO."
    ),
    responses={422: {"model": ErrorResponse}},
)
async def create_profile(request: ProfileRequest) -> ProfileEntry:
    """Profile the model named in ``request``.

    Raises:
        ValidationFailedError: Unknown model or missing SLO (422)
        SloUnattainableError: SLO below the model's minimum latency (422)
        MonotonicityError: Throughput not monotone in SMR (422)
    """
    entry = await run_in_threadpool(profile_request, request, load_model_catalog())
    logger.info(
        f"Profiled {entry.model}",
        extra={"model": entry.model, "trials": entry.result.trial_count if entry.result else 0},
    )
    return entry
