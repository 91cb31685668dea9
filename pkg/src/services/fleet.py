"""Placement-level large-scale fleet runs.

Instances arrive and depart over the run without executing kernels; only the
scheduler is exercised. GPU count and fragmentation are sampled every
``sample_s`` seconds.
"""

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from src.models.domain import FunctionSpec, InferenceKind, TrainingKind
from src.models.error import CapacityExhaustedError
from src.models.perf import ModelRef
from src.models.scenario import FleetSpec, Scenario
from src.services.metrics import RunLog, SimulationResult, compute_metrics
from src.services.perfmodel import ModelCatalog, infer_exec_time, load_model_catalog
from src.services.profiler import Profiler
from src.services.scheduler import Cluster, Scheduler
from src.services.workload import rng_for

logger = logging.getLogger(__name__)

DEPART, ARRIVE = 0, 1


@dataclass(frozen=True, slots=True)
class FleetInstance:
    func: FunctionSpec
    arrive_s: float
    depart_s: float


def _category_counts(spec: FleetSpec) -> tuple[int, int, int]:
    total = sum(spec.ratio)
    training = spec.instances * spec.ratio[0] // total
    llm = spec.instances * spec.ratio[1] // total
    return training, llm, spec.instances - training - llm


def _slo_for(model: ModelRef) -> float:
    if model.slo_ms is not None:
        return model.slo_ms
    return 4.0 * infer_exec_time(model, 1, 100.0)


def generate_fleet(
    spec: FleetSpec, duration_s: float, seed: int, catalog: ModelCatalog
) -> list[FleetInstance]:
    """Draw the fleet's instances from the ``fleet-gen`` sub-stream.

    Quotas are profiled once per distinct (model, kind, SLO, workers) and
    shared by every instance drawn with that configuration.
    """
    rng = rng_for(seed, "fleet-gen")
    profiler = Profiler()
    profiled: dict[tuple[str, str, int], FunctionSpec] = {}
    n_training, n_llm, n_other = _category_counts(spec)
    kinds = ["training"] * n_training + ["llm"] * n_llm + ["inference"] * n_other
    order = rng.permutation(len(kinds))

    fleet: list[FleetInstance] = []
    for i, pick in enumerate(order):
        category = kinds[int(pick)]
        tag: str | None = None
        workers = 1
        if category == "training":
            model_name = str(rng.choice(spec.training_models))
            workers = int(rng.integers(1, spec.max_training_workers + 1))
        else:
            pool = spec.llm_models if category == "llm" else spec.inference_models
            model_name = str(rng.choice(pool))
            tag = f"pattern-{int(rng.integers(spec.pattern_tags))}"
        key = (model_name, category, workers)
        template = profiled.get(key)
        if template is None:
            model = catalog.get(model_name)
            if category == "training":
                kind: TrainingKind | InferenceKind = TrainingKind(workers=workers)
            else:
                kind = InferenceKind(slo_ms=_slo_for(model), is_llm=category == "llm")
            raw = FunctionSpec(id=f"{model_name}-{category}-{workers}", kind=kind, model=model_name)
            template = profiler.profile_function(raw, catalog)
            profiled[key] = template

        arrive = float(rng.uniform(0.0, spec.arrival_window_frac * duration_s))
        lifetime = float(
            rng.uniform(spec.min_lifetime_frac * duration_s, spec.max_lifetime_frac * duration_s)
        )
        func = template.model_copy(update={"id": f"fleet-{i:05d}", "affinity_tag": tag})
        fleet.append(FleetInstance(func=func, arrive_s=arrive, depart_s=arrive + lifetime))
    return fleet


def run_large_scale(scenario: Scenario, catalog: ModelCatalog | None = None) -> SimulationResult:
    """Replay the fleet's arrivals and departures against the scheduler.

    Fragmentation of an active GPU counts the true requested SM share, so
    baselines that charge more than they need show it as SM fragmentation.

    Returns:
        Report and log with per-sample GPU counts
    """
    spec = scenario.fleet or FleetSpec()
    catalog = (catalog or load_model_catalog()).with_overrides(scenario.models)
    duration = scenario.duration_s
    fleet = generate_fleet(spec, duration, scenario.seed, catalog)

    cluster = Cluster(
        scenario.cluster.nodes, scenario.cluster.gpus_per_node, scenario.cluster.gpu_mem_gb
    )
    scheduler = Scheduler(cluster, scenario.scheduler, scenario.baseline_mode)
    true_request = np.zeros(cluster.size)

    events = sorted(
        [(inst.arrive_s, ARRIVE, i) for i, inst in enumerate(fleet)]
        + [(inst.depart_s, DEPART, i) for i, inst in enumerate(fleet)]
    )
    log = RunLog(
        mode=scenario.baseline_mode,
        seed=scenario.seed,
        duration_s=duration,
        period_ms=spec.sample_s * 1000.0,
        gpu_count_interval_s=spec.sample_s,
    )
    placed: dict[int, tuple[list[int], float, int]] = {}
    exclusive_gpus = 0
    decision_s = 0.0
    cursor = 0
    n_samples = max(1, math.ceil(duration / spec.sample_s - 1e-9))

    for sample in range(n_samples):
        now = sample * spec.sample_s
        while cursor < len(events) and events[cursor][0] <= now:
            _, action, i = events[cursor]
            cursor += 1
            inst = fleet[i]
            if action == DEPART:
                if i in placed:
                    gpus, request, n_excl = placed.pop(i)
                    scheduler.release_instance(f"{inst.func.id}#0000")
                    np.subtract.at(true_request, gpus, request)
                    exclusive_gpus -= n_excl
                continue
            started = time.perf_counter()
            try:
                placement = scheduler.schedule_instances(inst.func, f"{inst.func.id}#0000")
            except CapacityExhaustedError:
                log.placement_failures += 1
                continue
            finally:
                decision_s += time.perf_counter() - started
            quota = inst.func.quota
            assert quota is not None
            model = catalog.get(inst.func.model)
            stages = max(1, math.ceil(model.mem_gb / scenario.cluster.gpu_mem_gb - 1e-9))
            n_excl = inst.func.n_gpus * stages
            placed[i] = (list(placement.gpu_ids), quota.request_frac, n_excl)
            np.add.at(true_request, placement.gpu_ids, quota.request_frac)
            exclusive_gpus += n_excl
            log.instances_placed += 1

        active = cluster.resident_count > 0
        true_request[~active] = 0.0
        n_active = int(np.count_nonzero(active))
        log.gpu_counts.append(n_active)
        log.active_gpu_ticks += n_active
        log.exclusive_gpu_ticks += exclusive_gpus
        if n_active:
            used = np.minimum(1.0, true_request[active])
            log.sm_frag_sum += float(np.sum(1.0 - used))
            log.mem_frag_sum += float(
                np.sum(1.0 - cluster.mem_used[active] / cluster.mem_total[active])
            )

    logger.info(
        f"Fleet run placed {log.instances_placed} instances in {decision_s:.3f}s",
        extra={
            "mode": scenario.baseline_mode,
            "instances": len(fleet),
            "failures": log.placement_failures,
            "peak_gpus": max(log.gpu_counts, default=0),
        },
    )
    return SimulationResult(report=compute_metrics(log, catalog), log=log)
