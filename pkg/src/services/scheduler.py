"""Cluster-level placement of function instances onto GPUs.

Per-GPU state lives in numpy arrays so one placement decision is a handful of
vectorized operations over the whole fleet. Placement follows workload
affinity first, then best-fit over active GPUs, then a fresh GPU. Oversized
LLM instances fall back to a memory worst-fit split over several GPUs.
"""

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from src.models.domain import FunctionSpec, GpuState
from src.models.error import (
    CapacityExhaustedError,
    DuplicateInstanceError,
    UnknownInstanceError,
    UnprofiledFunctionError,
)
from src.models.scenario import BaselineMode
from src.models.scheduling import ClusterSnapshot, Placement, SchedulerConfig

logger = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class Charge:
    """What one worker of an instance commits on each GPU it lands on."""

    request: float
    limit: float
    mem_gb: float


class Cluster:
    """Struct-of-arrays view of every GPU's committed quotas and residents."""

    def __init__(self, nodes: int, gpus_per_node: int, mem_total_gb: float = 40.0) -> None:
        n = nodes * gpus_per_node
        self.gpus_per_node = gpus_per_node
        self.req_sum = np.zeros(n)
        self.lim_sum = np.zeros(n)
        self.mem_used = np.zeros(n)
        self.mem_total = np.full(n, float(mem_total_gb))
        self.resident_count = np.zeros(n, dtype=np.int64)
        self.residents: list[set[str]] = [set() for _ in range(n)]

    @property
    def size(self) -> int:
        return int(self.req_sum.size)

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.resident_count))

    def active_ids(self) -> np.ndarray:
        return np.flatnonzero(self.resident_count > 0)

    def first_inactive(self, exclude: list[int] | None = None) -> int | None:
        free = self.resident_count == 0
        if exclude:
            free[exclude] = False
        hits = np.flatnonzero(free)
        return int(hits[0]) if hits.size else None

    def commit(
        self, gpu_id: int, instance_id: str, request: float, limit: float, mem: float
    ) -> None:
        self.req_sum[gpu_id] += request
        self.lim_sum[gpu_id] += limit
        self.mem_used[gpu_id] += mem
        self.resident_count[gpu_id] += 1
        self.residents[gpu_id].add(instance_id)

    def uncommit(
        self, gpu_id: int, instance_id: str, request: float, limit: float, mem: float
    ) -> None:
        self.residents[gpu_id].discard(instance_id)
        self.resident_count[gpu_id] -= 1
        if self.resident_count[gpu_id] == 0:
            self.req_sum[gpu_id] = 0.0
            self.lim_sum[gpu_id] = 0.0
            self.mem_used[gpu_id] = 0.0
        else:
            self.req_sum[gpu_id] -= request
            self.lim_sum[gpu_id] -= limit
            self.mem_used[gpu_id] -= mem

    def gpu_state(self, gpu_id: int) -> GpuState:
        return GpuState(
            gpu_id=gpu_id,
            node_id=gpu_id // self.gpus_per_node,
            mem_total_gb=float(self.mem_total[gpu_id]),
            req_sum=float(self.req_sum[gpu_id]),
            lim_sum=float(self.lim_sum[gpu_id]),
            mem_used_gb=float(self.mem_used[gpu_id]),
            residents=sorted(self.residents[gpu_id]),
            active=bool(self.resident_count[gpu_id] > 0),
        )

    def snapshot(self) -> ClusterSnapshot:
        active = self.active_ids()
        return ClusterSnapshot(
            total_gpus=self.size,
            active_gpus=int(active.size),
            gpus=[self.gpu_state(int(g)) for g in active],
        )

    def violations(self, cfg: SchedulerConfig) -> list[str]:
        """Per-GPU cap and residency violations; empty when consistent."""
        problems = []
        for g in np.flatnonzero(self.req_sum > cfg.omega + _EPS):
            problems.append(f"GPU {g} req_sum {self.req_sum[g]:.4f} exceeds omega {cfg.omega}")
        for g in np.flatnonzero(self.lim_sum > cfg.gamma + _EPS):
            problems.append(f"GPU {g} lim_sum {self.lim_sum[g]:.4f} exceeds gamma {cfg.gamma}")
        for g in np.flatnonzero(self.mem_used > self.mem_total + _EPS):
            problems.append(f"GPU {g} memory {self.mem_used[g]:.2f} GB exceeds capacity")
        for g in np.flatnonzero(self.resident_count < 0):
            problems.append(f"GPU {g} has a negative resident count")
        return problems


@dataclass(frozen=True, slots=True)
class _Record:
    placement: Placement
    charge: Charge
    affinity_class: tuple[str, str] | None


class Scheduler:
    """Places and releases instances on a :class:`Cluster`.

    The baseline mode decides which quota is charged:
    DILU <request, limit>, STATIC_LIMIT and EAGER_HORIZONTAL <limit, limit>,
    STATIC_REQUEST <request, request>, EXCLUSIVE a whole fresh GPU per worker.
    """

    def __init__(
        self,
        cluster: Cluster,
        cfg: SchedulerConfig | None = None,
        mode: BaselineMode = BaselineMode.DILU,
    ) -> None:
        self.cluster = cluster
        self.cfg = cfg or SchedulerConfig()
        self.mode = mode
        self._records: dict[str, _Record] = {}
        self._function_gpus: dict[str, Counter[int]] = {}
        self._class_gpus: dict[tuple[str, str], np.ndarray] = {}

    @property
    def placements(self) -> dict[str, Placement]:
        return {iid: rec.placement for iid, rec in self._records.items()}

    def charge_for(self, func: FunctionSpec) -> Charge:
        """Quota one worker of ``func`` commits per GPU under the current mode."""
        if func.quota is None:
            raise UnprofiledFunctionError(func.id)
        q = func.quota
        match self.mode:
            case BaselineMode.DILU:
                return Charge(q.request_frac, q.limit_frac, q.mem_gb)
            case BaselineMode.STATIC_LIMIT | BaselineMode.EAGER_HORIZONTAL:
                return Charge(q.limit_frac, q.limit_frac, q.mem_gb)
            case BaselineMode.STATIC_REQUEST:
                return Charge(q.request_frac, q.request_frac, q.mem_gb)
            case BaselineMode.EXCLUSIVE:
                return Charge(1.0, 1.0, q.mem_gb)
        raise ValueError(f"unsupported mode {self.mode}")

    def select_opt_gpu(self, candidates: np.ndarray, charge: Charge) -> int | None:
        """Best-fit GPU among ``candidates`` for ``charge``, or None.

        Feasible GPUs keep request sum <= omega, limit sum <= gamma and memory
        within capacity. The winner minimizes
        ``alpha * (1 - new_req) + beta * (1 - new_mem / mem_total)``; ties go
        to the lowest GPU id.
        """
        if candidates.size == 0:
            return None
        c = self.cluster
        new_req = c.req_sum[candidates] + charge.request
        new_lim = c.lim_sum[candidates] + charge.limit
        new_mem = c.mem_used[candidates] + charge.mem_gb
        mem_total = c.mem_total[candidates]
        feasible = (
            (new_req <= self.cfg.omega + _EPS)
            & (new_lim <= self.cfg.gamma + _EPS)
            & (new_mem <= mem_total + _EPS)
        )
        if not feasible.any():
            return None
        score = self.cfg.alpha * (1.0 - new_req) + self.cfg.beta * (1.0 - new_mem / mem_total)
        score = np.where(feasible, score, np.inf)
        return int(candidates[int(np.argmin(score))])

    def affinity_candidates(self, func: FunctionSpec) -> np.ndarray:
        """GPUs hosting the same function or the same (kind, tag) affinity class."""
        mask = np.zeros(self.cluster.size, dtype=bool)
        cls = func.affinity_class
        if cls is not None and cls in self._class_gpus:
            mask |= self._class_gpus[cls] > 0
        for gpu_id, count in self._function_gpus.get(func.id, Counter()).items():
            if count > 0:
                mask[gpu_id] = True
        return np.flatnonzero(mask)

    def schedule_instances(
        self, func: FunctionSpec, instance_id: str, n_gpus: int | None = None
    ) -> Placement:
        """Place one instance of ``func`` and commit its quota.

        Args:
            func: Profiled function spec
            instance_id: Unique id for the new instance
            n_gpus: Worker count override; defaults to the function's n_j

        Returns:
            The committed placement

        Raises:
            UnprofiledFunctionError: If ``func`` has no quota
            CapacityExhaustedError: If no GPU can host a worker
            DuplicateInstanceError: If ``instance_id`` is already placed
        """
        self._check_new(instance_id)
        charge = self.charge_for(func)
        workers = n_gpus or func.n_gpus
        if self.mode is BaselineMode.EXCLUSIVE:
            placement = self._place_exclusive(func, instance_id, charge, workers)
        elif func.is_llm and workers == 1:
            placement = self._place_llm_instance(func, instance_id, charge)
        else:
            placement = self._place_workers(func, instance_id, charge, workers)
        logger.debug(
            f"Placed {instance_id} on GPUs {placement.gpu_ids}",
            extra={"instance_id": instance_id, "function_id": func.id, "mode": self.mode},
        )
        return placement

    def _place_workers(
        self, func: FunctionSpec, instance_id: str, charge: Charge, workers: int
    ) -> Placement:
        chosen: list[int] = []
        for _ in range(workers):
            gpu = self._select_single(func, charge, exclude=chosen)
            if gpu is None:
                self._rollback(func, instance_id, charge, chosen)
                raise CapacityExhaustedError(func.id, workers)
            self._commit(func, instance_id, gpu, charge, charge.mem_gb)
            chosen.append(gpu)
        return self._record(func, instance_id, chosen, [charge.mem_gb] * len(chosen), charge)

    def _select_single(self, func: FunctionSpec, charge: Charge, exclude: list[int]) -> int | None:
        # affinity first, then any active GPU, then the lowest-numbered empty one
        affine = self._without(self.affinity_candidates(func), exclude)
        gpu = self.select_opt_gpu(affine, charge)
        if gpu is None:
            gpu = self.select_opt_gpu(self._without(self.cluster.active_ids(), exclude), charge)
        if gpu is None:
            fresh = self.cluster.first_inactive(exclude)
            if fresh is not None and self._fits_empty(fresh, charge):
                gpu = fresh
        return gpu

    def _fits_empty(self, gpu: int, charge: Charge) -> bool:
        """Whether one instance alone on an empty GPU stays inside memory and both caps."""
        return (
            charge.mem_gb <= self.cluster.mem_total[gpu] + _EPS
            and charge.request <= self.cfg.omega + _EPS
            and charge.limit <= self.cfg.gamma + _EPS
        )

    def _check_new(self, instance_id: str) -> None:
        if instance_id in self._records:
            raise DuplicateInstanceError(instance_id)

    def _place_llm_instance(
        self, func: FunctionSpec, instance_id: str, charge: Charge
    ) -> Placement:
        """Whole-GPU best fit for an LLM, else a split over active GPUs, else a fresh GPU.

        Raises:
            CapacityExhaustedError: If no combination of GPUs can hold the model
        """
        affine = self.affinity_candidates(func)
        gpu = self.select_opt_gpu(affine, charge)
        if gpu is None:
            gpu = self.select_opt_gpu(self.cluster.active_ids(), charge)
        if gpu is not None:
            self._commit(func, instance_id, gpu, charge, charge.mem_gb)
            return self._record(func, instance_id, [gpu], [charge.mem_gb], charge)
        try:
            return self.place_llm(func, instance_id)
        except CapacityExhaustedError:
            # worst fit over every GPU only when an empty one cannot take it whole
            fresh = self.cluster.first_inactive()
            if fresh is not None and self._fits_empty(fresh, charge):
                self._commit(func, instance_id, fresh, charge, charge.mem_gb)
                return self._record(func, instance_id, [fresh], [charge.mem_gb], charge)
            return self.place_llm(func, instance_id, include_inactive=True)

    def place_llm(
        self, func: FunctionSpec, instance_id: str, include_inactive: bool = False
    ) -> Placement:
        """Split an LLM instance over the GPUs with the most free memory.

        GPUs are taken in descending free-memory order until their combined
        free memory covers the model, using at most ``max_pipeline_stages``.
        Memory is split in proportion to each picked GPU's free memory; every
        stage is charged the full request and limit.

        Raises:
            CapacityExhaustedError: If free memory cannot cover the model
            DuplicateInstanceError: If ``instance_id`` is already placed
        """
        self._check_new(instance_id)
        charge = self.charge_for(func)
        c = self.cluster
        pool = np.arange(c.size) if include_inactive else c.active_ids()
        free = c.mem_total[pool] - c.mem_used[pool]
        ok = (
            (c.req_sum[pool] + charge.request <= self.cfg.omega + _EPS)
            & (c.lim_sum[pool] + charge.limit <= self.cfg.gamma + _EPS)
            & (free > _EPS)
        )
        pool, free = pool[ok], free[ok]
        if free.sum() + _EPS < charge.mem_gb:
            raise CapacityExhaustedError(func.id, 1)
        order = np.lexsort((pool, -free))
        picked: list[int] = []
        picked_free: list[float] = []
        for idx in order[: self.cfg.max_pipeline_stages]:
            picked.append(int(pool[idx]))
            picked_free.append(float(free[idx]))
            if sum(picked_free) + _EPS >= charge.mem_gb:
                break
        total_free = sum(picked_free)
        if total_free + _EPS < charge.mem_gb:
            raise CapacityExhaustedError(func.id, 1)
        split = [charge.mem_gb * f / total_free for f in picked_free]
        for gpu, mem in zip(picked, split, strict=True):
            self._commit(func, instance_id, gpu, charge, mem)
        if len(picked) > 1:
            logger.info(
                f"Split {instance_id} across {len(picked)} GPUs",
                extra={"instance_id": instance_id, "gpu_ids": picked},
            )
        return self._record(func, instance_id, picked, split, charge)

    def _place_exclusive(
        self, func: FunctionSpec, instance_id: str, charge: Charge, workers: int
    ) -> Placement:
        gpu_mem = float(self.cluster.mem_total[0])
        stages = max(1, int(np.ceil(charge.mem_gb / gpu_mem - _EPS)))
        needed = workers * stages
        chosen: list[int] = []
        for _ in range(needed):
            fresh = self.cluster.first_inactive(chosen)
            if fresh is None:
                self._rollback(func, instance_id, charge, chosen, charge.mem_gb / stages)
                raise CapacityExhaustedError(func.id, needed)
            self._commit(func, instance_id, fresh, charge, charge.mem_gb / stages)
            chosen.append(fresh)
        return self._record(func, instance_id, chosen, [charge.mem_gb / stages] * needed, charge)

    def release_instance(self, instance_id: str) -> Placement:
        """Remove an instance and undo its charges on every GPU it used.

        Raises:
            UnknownInstanceError: If the instance is not placed
        """
        record = self._records.pop(instance_id, None)
        if record is None:
            raise UnknownInstanceError(instance_id)
        placement = record.placement
        for gpu, mem in zip(placement.gpu_ids, placement.mem_split_gb, strict=True):
            self.cluster.uncommit(
                gpu, instance_id, record.charge.request, record.charge.limit, mem
            )
            self._forget(placement.function_id, record.affinity_class, gpu)
        return placement

    def _commit(
        self, func: FunctionSpec, instance_id: str, gpu: int, charge: Charge, mem: float
    ) -> None:
        self.cluster.commit(gpu, instance_id, charge.request, charge.limit, mem)
        self._function_gpus.setdefault(func.id, Counter())[gpu] += 1
        cls = func.affinity_class
        if cls is not None:
            counts = self._class_gpus.setdefault(
                cls, np.zeros(self.cluster.size, dtype=np.int64)
            )
            counts[gpu] += 1

    def _forget(self, function_id: str, cls: tuple[str, str] | None, gpu: int) -> None:
        counter = self._function_gpus.get(function_id)
        if counter is not None:
            counter[gpu] -= 1
            if counter[gpu] <= 0:
                del counter[gpu]
            if not counter:
                del self._function_gpus[function_id]
        if cls is not None and cls in self._class_gpus:
            self._class_gpus[cls][gpu] -= 1

    def _rollback(
        self,
        func: FunctionSpec,
        instance_id: str,
        charge: Charge,
        gpus: list[int],
        mem: float | None = None,
    ) -> None:
        for gpu in gpus:
            self.cluster.uncommit(
                gpu,
                instance_id,
                charge.request,
                charge.limit,
                charge.mem_gb if mem is None else mem,
            )
            self._forget(func.id, func.affinity_class, gpu)

    def _record(
        self,
        func: FunctionSpec,
        instance_id: str,
        gpus: list[int],
        split: list[float],
        charge: Charge,
    ) -> Placement:
        placement = Placement(
            instance_id=instance_id,
            function_id=func.id,
            gpu_ids=gpus,
            mem_split_gb=split,
            request_frac=charge.request,
            limit_frac=charge.limit,
        )
        self._records[instance_id] = _Record(placement, charge, func.affinity_class)
        return placement

    @staticmethod
    def _without(candidates: np.ndarray, exclude: list[int]) -> np.ndarray:
        if not exclude or candidates.size == 0:
            return candidates
        return candidates[~np.isin(candidates, exclude)]
