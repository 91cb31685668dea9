"""Function registration and instance placement endpoints."""

import logging

from fastapi import APIRouter, status

from src.models.domain import FunctionSpec
from src.models.error import ErrorResponse
from src.models.scheduling import (
    ClusterSnapshot,
    DeploymentRequest,
    FunctionRegistration,
    Placement,
)
from src.services.placement import get_placement_service

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/v1", tags=["Placements"])


@router.post(
    "/functions",
    response_model=FunctionSpec,
    status_code=status.HTTP_201_CREATED,
    summary="Register a function",
    description="Profile the function if it has no quota and make it deployable.",
    responses={422: {"model": ErrorResponse}},
)
async def register_function(body: FunctionRegistration) -> FunctionSpec:
    return get_placement_service().register(body.function)


@router.post(
    "/placements",
    response_model=Placement,
    status_code=status.HTTP_201_CREATED,
    summary="Place an instance",
    description=(
        "Place one instance of a registered function using the configured "
        "packing policy and commit its quota."
    ),
    responses={409: {"model": ErrorResponse}, 422: {"model": ErrorResponse}},
)
async def create_placement(body: DeploymentRequest) -> Placement:
    """Place one instance.

    Raises:
        ValidationFailedError: Function not registered (422)
        CapacityExhaustedError: No GPU can host the instance (409)
    """
    return get_placement_service().deploy(body.function_id, body.n_gpus)


@router.delete(
    "/placements/{instance_id}",
    response_model=Placement,
    status_code=status.HTTP_200_OK,
    summary="Release an instance",
    responses={404: {"model": ErrorResponse}},
)
async def delete_placement(instance_id: str) -> Placement:
    return get_placement_service().release(instance_id)


@router.get(
    "/cluster",
    response_model=ClusterSnapshot,
    status_code=status.HTTP_200_OK,
    summary="Cluster state",
    description="Per-GPU request, limit and memory sums for every active GPU.",
)
async def get_cluster() -> ClusterSnapshot:
    return get_placement_service().snapshot()
