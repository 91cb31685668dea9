"""Unit tests for training bisection and inference growth search."""

import math

import pytest

from src.models.perf import ModelRef
from src.services.perfmodel import ModelCatalog, PerformanceOracle


def test_throughput_efficacy() -> None:
    from src.services.profiler import throughput_efficacy

    assert throughput_efficacy(4, 25.0, 40.0) == pytest.approx(0.004)
    with pytest.raises(ValueError):
        throughput_efficacy(1, 0.0, 10.0)


def test_training_bisection_resnet(resnet: ModelRef) -> None:
    """Validates:
    - request lands at 80% and limit at 100% of saturated throughput
    - each session starts with the SMR=100 probe and stays within 8 trials
    """
    from src.services.profiler import Profiler

    result = Profiler().profile_training(resnet)

    assert result.method == "bisection"
    assert result.quota.request_smr == pytest.approx(56.25)
    assert result.quota.limit_smr == pytest.approx(68.75)
    assert result.quota.ibs is None
    assert result.session_counts() == {"request": 5, "limit": 5}
    assert [t.smr for t in result.trials if t.trial_index == 1] == [100.0, 100.0]


def test_training_bisection_roberta(roberta: ModelRef) -> None:
    from src.services.perfmodel import train_throughput
    from src.services.profiler import Profiler

    result = Profiler().profile_training(roberta)

    assert result.quota.request_smr == pytest.approx(48.4375)
    assert result.quota.limit_smr == pytest.approx(59.375)
    assert result.session_counts() == {"request": 7, "limit": 6}
    ratio = train_throughput(roberta, result.quota.request_smr) / roberta.t_max
    assert ratio == pytest.approx(0.8, abs=0.016)


def test_training_bisection_rejects_non_monotone_oracle(roberta: ModelRef) -> None:
    """Validates: throughput that falls as SMR grows raises a typed error."""
    from src.models.error import MonotonicityError
    from src.services.profiler import Profiler

    class Decreasing(PerformanceOracle):
        def train_throughput(
            self, model: ModelRef, smr: float, workers: int = 1, comm_idle_frac: float = 0.0
        ) -> float:
            return 100.0 - smr

    with pytest.raises(MonotonicityError):
        Profiler(Decreasing()).profile_training(roberta)


def test_inference_growth_search(roberta: ModelRef, resnet: ModelRef) -> None:
    """Validates: the search finds <IBS, SMR> with few trials under t_exec <= SLO/2."""
    from src.services.perfmodel import infer_exec_time
    from src.services.profiler import Profiler

    profiler = Profiler()
    rob = profiler.profile_inference(roberta, 120.0)
    res = profiler.profile_inference(resnet, 100.0)

    assert (rob.quota.ibs, rob.quota.request_smr) == (2, 20.0)
    assert rob.quota.limit_smr == 40.0
    assert rob.trial_count == 4
    assert (res.quota.ibs, res.quota.request_smr) == (4, 20.0)
    assert res.trial_count == 5
    assert infer_exec_time(roberta, 2, 20.0) <= 60.0


def test_traversal_matches_growth_search(catalog: ModelCatalog) -> None:
    """Validates: for every built-in profile the search returns the grid's TE maximizer."""
    from src.services.profiler import Profiler

    profiler = Profiler()
    for name in catalog.names():
        model = catalog.get(name)
        assert model.slo_ms is not None
        search = profiler.profile_inference(model, model.slo_ms)
        traversal = profiler.profile_inference_traversal(model, model.slo_ms)
        assert traversal.trial_count == 60
        assert search.trial_count < 60
        assert search.quota == traversal.quota


def _unimodal(values: list[float], rel_tol: float = 1e-9) -> bool:
    """True when the values never rise again once they have fallen."""
    fallen = False
    for earlier, later in zip(values, values[1:], strict=False):
        if math.isclose(earlier, later, rel_tol=rel_tol):
            continue
        if later < earlier:
            fallen = True
        elif fallen:
            return False
    return True


def test_te_is_unimodal_along_the_growth_path(catalog: ModelCatalog) -> None:
    """Validates:
    - within one IBS level, TE over the feasible SMR steps never rises after falling
    - the best feasible TE per doubling IBS level does the same
    """
    from src.services.perfmodel import infer_exec_time
    from src.services.profiler import DEFAULT_IBS_MAX, DEFAULT_SMR_STEP, throughput_efficacy

    smr_grid = [DEFAULT_SMR_STEP * i for i in range(1, 11)]
    ibs_levels = [2**i for i in range(int(math.log2(DEFAULT_IBS_MAX)) + 1)]
    for name in catalog.names():
        model = catalog.get(name)
        assert model.slo_ms is not None
        budget = model.slo_ms / 2.0
        level_best = []
        for ibs in ibs_levels:
            feasible = [
                throughput_efficacy(ibs, t, smr)
                for smr in smr_grid
                if (t := infer_exec_time(model, ibs, smr)) <= budget
            ]
            assert _unimodal(feasible), (name, ibs)
            if feasible:
                level_best.append(max(feasible))
        assert len(level_best) >= 3, name
        assert _unimodal(level_best), name


def test_traversal_grid_size_follows_ibs_max(roberta: ModelRef) -> None:
    from src.services.profiler import Profiler

    result = Profiler().profile_inference_traversal(roberta, 120.0, ibs_max=64)
    assert result.trial_count == 70


def test_unattainable_slo(roberta: ModelRef) -> None:
    """Validates: an SLO below the IBS=1 full-GPU latency cannot be profiled."""
    from src.models.error import SloUnattainableError
    from src.services.profiler import Profiler

    with pytest.raises(SloUnattainableError) as exc:
        Profiler().profile_inference(roberta, 10.0)
    assert exc.value.min_latency_ms == pytest.approx(14.0)


def test_profile_function_fills_quota_once(catalog: ModelCatalog) -> None:
    from src.services.profiler import Profiler
    from tests.utils.scenarios import inference_function, quota

    profiler = Profiler()
    profiled = profiler.profile_function(inference_function(), catalog)
    assert profiled.quota is not None
    assert profiled.quota.ibs == 2

    fixed = inference_function(quota=quota())
    assert profiler.profile_function(fixed, catalog) is fixed


def test_profile_request_defaults_slo(catalog: ModelCatalog) -> None:
    """Validates: inference requests without an SLO use the model's calibrated one."""
    from src.models.profiling import ProfileRequest
    from src.services.profiler import profile_request

    entry = profile_request(
        ProfileRequest(model="roberta-large-like", with_traversal=True), catalog
    )

    assert entry.slo_ms == 120.0
    assert entry.result is not None and entry.traversal is not None
    assert entry.result.quota == entry.traversal.quota


def test_profile_request_without_any_slo(roberta: ModelRef) -> None:
    from src.models.error import ValidationFailedError
    from src.models.profiling import ProfileRequest
    from src.services.profiler import profile_request

    bare = ModelCatalog([roberta.model_copy(update={"slo_ms": None})])
    with pytest.raises(ValidationFailedError, match="no slo_ms"):
        profile_request(ProfileRequest(model="roberta-large-like"), bare)


def test_profile_report_continues_after_failures(catalog: ModelCatalog) -> None:
    """Validates: a failing model is recorded with its error and the rest still profile."""
    from src.models.profiling import ProfileRequest
    from src.services.profiler import build_profile_report

    report = build_profile_report(
        [
            ProfileRequest(model="roberta-large-like", slo_ms=10.0),
            ProfileRequest(model="no-such-model"),
            ProfileRequest(model="resnet152-like", kind="training"),
        ],
        catalog,
    )

    assert report.catalog_version == "1.0.0"
    assert [e.error is None for e in report.entries] == [False, False, True]
    assert "SLO unattainable" in (report.entries[0].error or "")
    assert report.entries[2].result is not None
