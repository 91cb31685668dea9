"""Pytest configuration and shared fixtures for all tests."""

from collections.abc import Generator

import pytest
from fastapi.testclient import TestClient

from src.models.perf import ModelRef
from src.services.perfmodel import ModelCatalog, load_model_catalog


@pytest.fixture(scope="session")
def catalog() -> ModelCatalog:
    """The packaged model calibration asset."""
    return load_model_catalog()


@pytest.fixture
def roberta(catalog: ModelCatalog) -> ModelRef:
    return catalog.get("roberta-large-like")


@pytest.fixture
def resnet(catalog: ModelCatalog) -> ModelRef:
    return catalog.get("resnet152-like")


@pytest.fixture
def placement_env(monkeypatch: pytest.MonkeyPatch) -> Generator[None]:
    """Fresh process-wide placement service on a 1 x 2 GPU cluster."""
    from src.services.placement import reset_placement_service

    monkeypatch.setenv("DILU_SIM_NODES", "1")
    monkeypatch.setenv("DILU_SIM_GPUS_PER_NODE", "2")
    reset_placement_service()
    yield
    reset_placement_service()


@pytest.fixture
def test_client(placement_env: None) -> TestClient:
    """FastAPI TestClient over the real service layer.

    Returns:
        TestClient instance for making HTTP requests to the API
    """
    from src.main import app

    return TestClient(app)
