"""Randomized placement checks against brute-force and reference packers.

Request fractions are multiples of 1/8 so every sum the scheduler forms is
exact and ties break by GPU id on both sides of a comparison.
"""

import numpy as np
import pytest

from src.models.domain import FunctionSpec, InferenceKind
from src.models.error import CapacityExhaustedError
from src.models.scenario import BaselineMode
from src.models.scheduling import SchedulerConfig
from src.services.scheduler import Cluster, Scheduler
from tests.utils.scenarios import inference_function, quota, training_function

EIGHTHS = [12.5, 25.0, 37.5, 50.0, 62.5]


def _single(fid: str, request: float, mem_gb: float = 1.0) -> FunctionSpec:
    return inference_function(fid, quota=quota(request, request, mem_gb))


def _optimal_gpu_count(requests: list[float], omega: float = 1.0) -> int:
    """Fewest GPUs holding every request, by enumerating all assignments."""
    best = len(requests)

    def assign(i: int, loads: list[float]) -> None:
        nonlocal best
        if len(loads) >= best:
            return
        if i == len(requests):
            best = len(loads)
            return
        for g in range(len(loads)):
            if loads[g] + requests[i] <= omega + 1e-9:
                loads[g] += requests[i]
                assign(i + 1, loads)
                loads[g] -= requests[i]
        assign(i + 1, [*loads, requests[i]])

    assign(0, [])
    return best


def _greedy_gpu_count(requests: list[float], gpus: int = 4) -> int:
    scheduler = Scheduler(Cluster(1, gpus), SchedulerConfig(), BaselineMode.DILU)
    for n, request in enumerate(requests):
        scheduler.schedule_instances(_single(f"f{n}", request * 100.0), f"f{n}#0000")
    return scheduler.cluster.active_count


def test_six_instance_batch_is_within_one_of_optimal() -> None:
    """Validates: a batch that packs into 3 GPUs never needs more than 4."""
    requests = [0.6, 0.4, 0.5, 0.5, 0.7, 0.3]

    optimal = _optimal_gpu_count(requests)

    assert optimal == 3
    assert _greedy_gpu_count(requests) <= optimal + 1


@pytest.mark.parametrize("seed", range(25))
def test_random_batches_are_within_one_of_optimal(seed: int) -> None:
    """Validates: up to 8 single-GPU instances on 4 GPUs use at most optimal + 1 GPUs."""
    rng = np.random.default_rng(seed)
    requests = [float(rng.choice(EIGHTHS)) / 100.0 for _ in range(int(rng.integers(3, 9)))]
    # a total of at most 2 GPUs keeps any-fit packing inside the 4-GPU cluster
    while sum(requests) > 2.0:
        requests.pop()

    assert _greedy_gpu_count(requests) <= _optimal_gpu_count(requests) + 1


class _BestFit:
    """One-dimensional best-fit over request fractions."""

    def __init__(self, gpus: int) -> None:
        self.loads = [0.0] * gpus

    def place(self, request: float) -> int | None:
        fits = [g for g, load in enumerate(self.loads) if load > 0 and load + request <= 1.0]
        if fits:
            gpu = max(fits, key=lambda g: (self.loads[g], -g))
        elif 0.0 in self.loads:
            gpu = self.loads.index(0.0)
        else:
            return None
        self.loads[gpu] += request
        return gpu

    def release(self, gpu: int, request: float) -> None:
        self.loads[gpu] -= request


@pytest.mark.parametrize("seed", range(10))
def test_sm_only_weights_match_one_dimensional_best_fit(seed: int) -> None:
    """Validates: with alpha=1 and beta=0 every choice equals 1-D best fit on requests."""
    rng = np.random.default_rng(seed)
    gpus = 8
    scheduler = Scheduler(
        Cluster(1, gpus), SchedulerConfig(alpha=1.0, beta=0.0), BaselineMode.DILU
    )
    reference = _BestFit(gpus)
    placed: dict[str, tuple[int, float]] = {}

    for n in range(40):
        if placed and rng.random() < 0.3:
            iid = sorted(placed)[int(rng.integers(len(placed)))]
            gpu, request = placed.pop(iid)
            scheduler.release_instance(iid)
            reference.release(gpu, request)
            continue
        request = float(rng.choice(EIGHTHS))
        iid = f"f{n}#0000"
        expected = reference.place(request / 100.0)
        if expected is None:
            with pytest.raises(CapacityExhaustedError):
                scheduler.schedule_instances(_single(f"f{n}", request), iid)
            continue
        placement = scheduler.schedule_instances(_single(f"f{n}", request), iid)
        assert placement.gpu_ids == [expected], (n, reference.loads)
        placed[iid] = (expected, request / 100.0)


def _random_function(rng: np.random.Generator, n: int) -> FunctionSpec:
    request = float(rng.integers(2, 13)) * 5.0
    limit = min(100.0, request * float(rng.uniform(1.0, 2.0)))
    mem_gb = float(rng.uniform(1.0, 8.0))
    match int(rng.integers(3)):
        case 0:
            return inference_function(f"infer-{n}", quota=quota(request, limit, mem_gb))
        case 1:
            workers = int(rng.integers(1, 3))
            return training_function(
                f"train-{n}", workers=workers, quota=quota(request, limit, mem_gb, ibs=None)
            )
        case _:
            return FunctionSpec(
                id=f"llm-{n}",
                kind=InferenceKind(slo_ms=360.0, is_llm=True),
                model="llama2-7b-like",
                quota=quota(request, limit, 14.0, 4),
            )


def _assert_consistent(scheduler: Scheduler) -> None:
    c = scheduler.cluster
    req = np.zeros(c.size)
    lim = np.zeros(c.size)
    mem = np.zeros(c.size)
    residents = np.zeros(c.size, dtype=int)
    for placement in scheduler.placements.values():
        for gpu, split in zip(placement.gpu_ids, placement.mem_split_gb, strict=True):
            req[gpu] += placement.request_frac
            lim[gpu] += placement.limit_frac
            mem[gpu] += split
            residents[gpu] += 1
    assert c.req_sum == pytest.approx(req, abs=1e-9)
    assert c.lim_sum == pytest.approx(lim, abs=1e-9)
    assert c.mem_used == pytest.approx(mem, abs=1e-9)
    assert c.resident_count.tolist() == residents.tolist()
    assert c.violations(scheduler.cfg) == []


@pytest.mark.parametrize("seed", range(15))
def test_random_place_and_release_keep_caps(seed: int) -> None:
    """Validates:
    - per-GPU sums always equal the sums of the residents' charges
    - omega, gamma and memory caps hold after every operation, failed ones included
    """
    rng = np.random.default_rng(seed)
    cfg = SchedulerConfig(
        omega=float(rng.choice([0.8, 1.0])), gamma=float(rng.choice([1.0, 1.5, 2.0]))
    )
    mode = [BaselineMode.DILU, BaselineMode.STATIC_LIMIT, BaselineMode.STATIC_REQUEST][
        int(rng.integers(3))
    ]
    scheduler = Scheduler(Cluster(2, 3, mem_total_gb=16.0), cfg, mode)

    for n in range(60):
        placed = sorted(scheduler.placements)
        if placed and rng.random() < 0.35:
            scheduler.release_instance(placed[int(rng.integers(len(placed)))])
        else:
            try:
                scheduler.schedule_instances(_random_function(rng, n), f"op-{n}#0000")
            except CapacityExhaustedError:
                pass
        _assert_consistent(scheduler)
