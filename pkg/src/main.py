"""dilu-sim API - FastAPI application entry point.

HTTP control plane over the simulator: profile models, register functions,
place and release instances, and run whole scenarios.
"""

import logging
import os
from collections.abc import AsyncGenerator
from contextlib import asynccontextmanager
from typing import Any

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from src import __version__
from src.api.v1 import placements, profiles, simulations
from src.middleware.error_handler import handle_exception
from src.middleware.logging import LoggingMiddleware
from src.models.error import SimulationError
from src.services.perfmodel import load_model_catalog

logging.basicConfig(
    level=os.getenv("DILU_SIM_LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncGenerator[None]:
    """Load the model catalog once at startup so a broken asset fails fast.

    Args:
        app: FastAPI application instance

    Yields:
        None during application runtime
    """
    catalog = load_model_catalog()
    logger.info(
        f"Starting dilu-sim API with catalog {catalog.version}",
        extra={"models": len(catalog)},
    )
    yield
    logger.info("Shutting down dilu-sim API...")


app = FastAPI(
    title="dilu-sim API",
    description=(
        "Control plane and simulator for GPU resourcing-on-demand in serverless "
        "deep learning: profiling, affinity-first placement, token-based vertical "
        "scaling and lazy horizontal scaling."
    ),
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)
app.add_middleware(LoggingMiddleware)
app.add_exception_handler(SimulationError, handle_exception)
app.add_exception_handler(ValueError, handle_exception)
app.add_exception_handler(Exception, handle_exception)


@app.get(
    "/health",
    tags=["Health"],
    summary="Health check endpoint",
    description="Returns API health status. Use for monitoring and readiness probes.",
)
async def health_check() -> JSONResponse:
    return JSONResponse(content={"status": "healthy", "service": "dilu-sim"})


def custom_openapi() -> dict[str, Any]:
    """OpenAPI schema annotated with the simulator's error format."""
    if app.openapi_schema:
        return app.openapi_schema  # type: ignore[no-any-return]

    from fastapi.openapi.utils import get_openapi

    openapi_schema = get_openapi(
        title=app.title,
        version=app.version,
        description=app.description,
        routes=app.routes,
    )
    openapi_schema["info"]["x-error-format"] = {
        "fields": ["error_code", "message", "details"],
        "status_codes": {"404": "unknown instance", "409": "capacity", "422": "invalid input"},
    }
    app.openapi_schema = openapi_schema
    return app.openapi_schema  # type: ignore[no-any-return]


app.openapi = custom_openapi  # type: ignore

app.include_router(profiles.router, tags=["Profiles"])
app.include_router(placements.router, tags=["Placements"])
app.include_router(simulations.router, tags=["Simulations"])


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "src.main:app",
        host="0.0.0.0",
        port=8000,
        log_level="info",
    )
