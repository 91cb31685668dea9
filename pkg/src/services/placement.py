"""In-memory placement service behind the HTTP control plane.

Holds one cluster and scheduler for the lifetime of the process. Functions
are profiled on registration so deployments only need their id.
"""

import logging
import os
import threading

from src.models.domain import FunctionSpec, validate_spec
from src.models.error import ValidationFailedError
from src.models.scenario import BaselineMode
from src.models.scheduling import ClusterSnapshot, Placement, SchedulerConfig
from src.services.perfmodel import ModelCatalog, load_model_catalog
from src.services.profiler import Profiler
from src.services.scheduler import Cluster, Scheduler

logger = logging.getLogger(__name__)


class PlacementService:
    """Registers functions and places or releases their instances."""

    def __init__(
        self,
        nodes: int = 1,
        gpus_per_node: int = 4,
        cfg: SchedulerConfig | None = None,
        mode: BaselineMode = BaselineMode.DILU,
        catalog: ModelCatalog | None = None,
    ) -> None:
        self.catalog = catalog or load_model_catalog()
        self.cluster = Cluster(nodes, gpus_per_node)
        self.scheduler = Scheduler(self.cluster, cfg, mode)
        self.functions: dict[str, FunctionSpec] = {}
        self._profiler = Profiler()
        self._counters: dict[str, int] = {}
        self._lock = threading.Lock()

    def register(self, func: FunctionSpec) -> FunctionSpec:
        """Profile (when needed) and remember ``func``; re-registering replaces it.

        Raises:
            ValidationFailedError: If the spec is invalid or its model unknown
        """
        violations = validate_spec(func)
        if violations:
            raise ValidationFailedError(violations, subject=f"function {func.id}")
        profiled = self._profiler.profile_function(func, self.catalog)
        with self._lock:
            self.functions[func.id] = profiled
        logger.info(
            f"Registered function {func.id}",
            extra={"function_id": func.id, "quota": profiled.quota},
        )
        return profiled

    def deploy(self, function_id: str, n_gpus: int | None = None) -> Placement:
        """Place one new instance of a registered function.

        Raises:
            ValidationFailedError: If the function is not registered
            CapacityExhaustedError: If the cluster cannot host it
        """
        with self._lock:
            func = self.functions.get(function_id)
            if func is None:
                raise ValidationFailedError(
                    [f"function {function_id!r} is not registered"], subject="deployment"
                )
            index = self._counters.get(function_id, 0)
            self._counters[function_id] = index + 1
            return self.scheduler.schedule_instances(func, f"{function_id}#{index:04d}", n_gpus)

    def release(self, instance_id: str) -> Placement:
        """Release a placed instance and free its charges.

        Args:
            instance_id: Id returned by :meth:`deploy`

        Returns:
            The placement that was released

        Raises:
            UnknownInstanceError: If no such instance is placed
        """
        with self._lock:
            return self.scheduler.release_instance(instance_id)

    def snapshot(self) -> ClusterSnapshot:
        with self._lock:
            return self.cluster.snapshot()


_service: PlacementService | None = None


def get_placement_service() -> PlacementService:
    """Process-wide placement service sized by ``DILU_SIM_NODES`` x ``DILU_SIM_GPUS_PER_NODE``."""
    global _service
    if _service is None:
        _service = PlacementService(
            nodes=int(os.getenv("DILU_SIM_NODES", "1")),
            gpus_per_node=int(os.getenv("DILU_SIM_GPUS_PER_NODE", "4")),
        )
    return _service


def reset_placement_service() -> None:
    global _service
    _service = None
