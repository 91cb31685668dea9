"""End-to-end profiling checks over every calibrated model profile.

These run the real profiler against the deterministic oracle and compare the
hybrid growth search with the exhaustive traversal of the same grid.
"""

import time

import pytest

from src.services.perfmodel import ModelCatalog, train_throughput

TRIAL_BUDGET = {
    "resnet152-like": 10,
    "roberta-large-like": 8,
    "gpt2-large-like": 8,
    "llama2-7b-like": 11,
}


def test_growth_search_stays_within_trial_budget(catalog: ModelCatalog) -> None:
    """Validates: each model needs few trials and always fewer than the 60-point traversal."""
    from src.services.profiler import Profiler

    profiler = Profiler()
    started = time.perf_counter()

    counts = {}
    for name in catalog.names():
        model = catalog.get(name)
        assert model.slo_ms is not None
        counts[name] = profiler.profile_inference(model, model.slo_ms).trial_count

    assert time.perf_counter() - started < 1.0
    for name, count in counts.items():
        assert count <= TRIAL_BUDGET[name], name
        assert count < 60


def test_growth_search_matches_traversal(catalog: ModelCatalog) -> None:
    """Validates: the search returns the TE maximizer found by the full grid walk."""
    from src.services.profiler import Profiler

    profiler = Profiler()

    for name in catalog.names():
        model = catalog.get(name)
        assert model.slo_ms is not None
        search = profiler.profile_inference(model, model.slo_ms)
        traversal = profiler.profile_inference_traversal(model, model.slo_ms)

        assert search.quota == traversal.quota, name
        assert traversal.trial_count == 60


@pytest.mark.parametrize("name", list(TRIAL_BUDGET))
def test_training_quotas_land_in_band(catalog: ModelCatalog, name: str) -> None:
    """Validates: request gives 80% and limit ~100% of full throughput, within 2%."""
    from src.services.profiler import Profiler

    model = catalog.get(name)
    result = Profiler().profile_training(model)

    sessions = result.session_counts()
    assert sessions["request"] <= 8
    assert sessions["limit"] <= 8

    full = train_throughput(model, 100.0)
    quota = result.quota
    assert train_throughput(model, quota.request_smr) / full == pytest.approx(0.8, abs=0.016)
    assert train_throughput(model, quota.limit_smr) / full >= 0.98
