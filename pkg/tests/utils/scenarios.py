"""Builders for functions and scenarios shared across test modules.

Defaults mirror the built-in model catalog: roberta-like inference with a
120 ms SLO and resnet-like best-effort training.
"""

from typing import Any

from src.models.domain import FunctionSpec, InferenceKind, ResourceQuota, TrainingKind
from src.models.scaling import HscalerConfig
from src.models.scenario import (
    BaselineMode,
    ClusterConfig,
    FleetSpec,
    PoissonPattern,
    Scenario,
    ScenarioFunction,
    WorkloadPattern,
)


def inference_function(
    fid: str = "roberta-infer",
    model: str = "roberta-large-like",
    slo_ms: float = 120.0,
    quota: ResourceQuota | None = None,
    **kwargs: Any,
) -> FunctionSpec:
    return FunctionSpec(
        id=fid, kind=InferenceKind(slo_ms=slo_ms), model=model, quota=quota, **kwargs
    )


def training_function(
    fid: str = "resnet-train",
    model: str = "resnet152-like",
    workers: int = 1,
    quota: ResourceQuota | None = None,
    samples_target: int | None = None,
    comm_idle_frac: float = 0.0,
    **kwargs: Any,
) -> FunctionSpec:
    kind = TrainingKind(
        workers=workers, samples_target=samples_target, comm_idle_frac=comm_idle_frac
    )
    return FunctionSpec(id=fid, kind=kind, model=model, quota=quota, **kwargs)


def quota(
    request: float = 40.0, limit: float = 60.0, mem_gb: float = 2.0, ibs: int | None = 2
) -> ResourceQuota:
    return ResourceQuota(request_smr=request, limit_smr=limit, mem_gb=mem_gb, ibs=ibs)


def serving(
    func: FunctionSpec, workload: WorkloadPattern | None = None, initial: int = 1
) -> ScenarioFunction:
    return ScenarioFunction(function=func, workload=workload, initial_instances=initial)


def make_scenario(
    functions: list[ScenarioFunction],
    duration_s: float = 5.0,
    mode: BaselineMode = BaselineMode.DILU,
    gpus: int = 1,
    seed: int = 7,
    **kwargs: Any,
) -> Scenario:
    return Scenario(
        seed=seed,
        duration_s=duration_s,
        cluster=ClusterConfig(nodes=1, gpus_per_node=gpus),
        functions=functions,
        baseline_mode=mode,
        **kwargs,
    )


def collocation_scenario(
    mode: BaselineMode,
    workload: WorkloadPattern | None = None,
    duration_s: float = 20.0,
    seed: int = 7,
) -> Scenario:
    """resnet training and roberta inference sharing a single GPU."""
    return make_scenario(
        [
            serving(training_function()),
            serving(inference_function(), workload or PoissonPattern(mean_rps=2.0)),
        ],
        duration_s=duration_s,
        mode=mode,
        gpus=1,
        seed=seed,
        hscaler=HscalerConfig(enabled=False),
    )


def inference_only_scenario(
    mode: BaselineMode,
    workload: WorkloadPattern,
    duration_s: float,
    gpus: int = 1,
    seed: int = 7,
    hscaler: HscalerConfig | None = None,
) -> Scenario:
    return make_scenario(
        [serving(inference_function(), workload)],
        duration_s=duration_s,
        mode=mode,
        gpus=gpus,
        seed=seed,
        hscaler=hscaler or HscalerConfig(),
    )


def fleet_scenario(
    mode: BaselineMode = BaselineMode.DILU,
    instances: int = 200,
    nodes: int = 100,
    duration_s: float = 600.0,
    seed: int = 11,
    **kwargs: Any,
) -> Scenario:
    return Scenario(
        seed=seed,
        duration_s=duration_s,
        cluster=ClusterConfig(nodes=nodes, gpus_per_node=4),
        baseline_mode=mode,
        fleet=FleetSpec(instances=instances, sample_s=10.0),
        **kwargs,
    )
