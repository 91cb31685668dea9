"""Simulation endpoint.

Runs a scenario to completion inside the request and returns its metrics.
Per-tick grant rows are never recorded for HTTP runs; use the CLI for traces.
"""

import logging

from fastapi import APIRouter, status
from fastapi.concurrency import run_in_threadpool

from src.models.error import ErrorResponse
from src.models.metrics import MetricsReport
from src.models.scenario import Scenario
from src.services.simulator import run_scenario

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/v1", tags=["Simulations"])


@router.post(
    "/simulations",
    response_model=MetricsReport,
    status_code=status.HTTP_200_OK,
    summary="Run a scenario",
    description="Simulate the scenario deterministically and return its metrics report.",
    responses={422: {"model": ErrorResponse}, 500: {"model": ErrorResponse}},
)
async def create_simulation(scenario: Scenario) -> MetricsReport:
    scenario = scenario.model_copy(update={"record_grants": False})
    result = await run_in_threadpool(run_scenario, scenario)
    return result.report
