"""Quota profiling against the performance oracle.

Training functions get their <request, limit> SMR pair from a bisection on
throughput. Inference functions get <IBS, SMR> from a growth search over the
batch/SMR grid that maximizes throughput efficacy (TE) under ``t_exec <= SLO/2``.
"""

import logging
import math
from dataclasses import dataclass

from src.models.domain import FunctionSpec, InferenceKind, ResourceQuota, TrainingKind
from src.models.error import MonotonicityError, SloUnattainableError, ValidationFailedError
from src.models.perf import ModelRef
from src.models.profiling import (
    ProfileEntry,
    ProfileReport,
    ProfileRequest,
    ProfileResult,
    ProfileTrial,
    TrainingProfileParams,
)
from src.services.perfmodel import ModelCatalog, PerformanceOracle

logger = logging.getLogger(__name__)

TE_REL_TOL = 1e-9
DEFAULT_IBS_MAX = 32
DEFAULT_SMR_STEP = 10.0


def throughput_efficacy(ibs: int, t_exec_ms: float, smr: float) -> float:
    """TE = ibs / (t_exec * smr), in samples per (ms * SMR unit).

    Raises:
        ValueError: If ``t_exec_ms`` or ``smr`` is not positive

    Examples:
        >>> throughput_efficacy(4, 25.0, 40.0)
        0.004
    """
    if t_exec_ms <= 0 or smr <= 0:
        raise ValueError("throughput efficacy needs positive t_exec and smr")
    return ibs / (t_exec_ms * smr)


@dataclass(frozen=True, slots=True)
class _GridPoint:
    ibs: int
    smr: float
    t_exec_ms: float
    te: float


def _beats(candidate: _GridPoint, incumbent: _GridPoint | None) -> bool:
    """Higher TE wins; near-equal TE prefers lower SMR, then lower IBS."""
    if incumbent is None:
        return True
    if not math.isclose(candidate.te, incumbent.te, rel_tol=TE_REL_TOL):
        return candidate.te > incumbent.te
    return (candidate.smr, candidate.ibs) < (incumbent.smr, incumbent.ibs)


def _te_can_beat(bound: float, incumbent: _GridPoint) -> bool:
    return bound > incumbent.te and not math.isclose(bound, incumbent.te, rel_tol=TE_REL_TOL)


def _smr_grid(smr_step: float) -> list[float]:
    steps = int(math.floor(100.0 / smr_step + 1e-9))
    grid = [smr_step * i for i in range(1, steps + 1)]
    if not grid or grid[-1] < 100.0 - 1e-9:
        grid.append(100.0)
    return grid


def _ibs_levels(ibs_max: int) -> list[int]:
    levels = []
    ibs = 1
    while ibs <= ibs_max:
        levels.append(ibs)
        ibs *= 2
    return levels


class Profiler:
    """Runs profiling sessions; each session is sequential and independent."""

    def __init__(self, oracle: PerformanceOracle | None = None) -> None:
        self.oracle = oracle or PerformanceOracle()

    def profile_training(
        self,
        model: ModelRef,
        workers: int = 1,
        params: TrainingProfileParams | None = None,
        comm_idle_frac: float = 0.0,
    ) -> ProfileResult:
        """Bisect SMR for the request and limit throughput fractions.

        Args:
            model: Model profile
            workers: Data-parallel worker count
            params: Target fractions and tolerance
            comm_idle_frac: Communication idle share of an iteration

        Returns:
            Quota with real-valued request/limit SMRs and the trial log

        Raises:
            MonotonicityError: If a probe shows throughput falling as SMR rises
        """
        params = params or TrainingProfileParams()
        request, request_trials = self._bisect(
            model, workers, comm_idle_frac, params.p_request, params, "request"
        )
        limit, limit_trials = self._bisect(
            model, workers, comm_idle_frac, params.p_limit, params, "limit"
        )
        quota = ResourceQuota(
            request_smr=min(request, limit), limit_smr=limit, mem_gb=model.mem_gb
        )
        logger.info(
            f"Profiled training quota for {model.name}",
            extra={
                "model": model.name,
                "request_smr": quota.request_smr,
                "limit_smr": quota.limit_smr,
                "trials": len(request_trials) + len(limit_trials),
            },
        )
        return ProfileResult(
            model=model.name,
            kind="training",
            method="bisection",
            quota=quota,
            trials=request_trials + limit_trials,
        )

    def _bisect(
        self,
        model: ModelRef,
        workers: int,
        comm_idle_frac: float,
        p: float,
        params: TrainingProfileParams,
        session: str,
    ) -> tuple[float, list[ProfileTrial]]:
        trials: list[ProfileTrial] = []
        probes: list[tuple[float, float]] = []

        def probe(smr: float) -> float:
            tput = self.oracle.train_throughput(model, smr, workers, comm_idle_frac)
            for seen_smr, seen_tput in probes:
                lower, higher = (seen_tput, tput) if seen_smr < smr else (tput, seen_tput)
                if higher < lower * (1.0 - params.tolerance):
                    raise MonotonicityError(model.name, min(seen_smr, smr), max(seen_smr, smr))
            probes.append((smr, tput))
            trials.append(
                ProfileTrial(
                    trial_index=len(trials) + 1, session=session, smr=smr, measured=tput
                )
            )
            return tput

        t1 = probe(100.0)
        target = t1 * p
        low, high = 0.0, 100.0
        while len(trials) < params.max_trials:
            mid = (low + high) / 2.0
            tput = probe(mid)
            if abs(tput - target) <= target * params.tolerance and tput < t1:
                return mid, trials
            if tput < target:
                low = mid
            else:
                high = mid
            if high - low < params.smr_floor:
                break
        return high, trials

    def profile_inference(
        self,
        model: ModelRef,
        slo_ms: float,
        smr_step: float = DEFAULT_SMR_STEP,
        ibs_max: int = DEFAULT_IBS_MAX,
    ) -> ProfileResult:
        """Hybrid growth search over the <IBS, SMR> grid.

        IBS doubles level by level; at each level SMR climbs in ``smr_step``
        increments starting from the previous level's SMR. The first feasible
        SMR of a level is its best point. A climb is abandoned once the TE
        bound of an infeasible probe cannot beat the incumbent, and the search
        stops after a level that is blocked or does not improve TE.

        Raises:
            SloUnattainableError: If IBS=1 is infeasible even at SMR=100
        """
        budget = slo_ms / 2.0
        grid = _smr_grid(smr_step)
        trials: list[ProfileTrial] = []
        best: _GridPoint | None = None
        start = 0

        for ibs in _ibs_levels(ibs_max):
            level_best: _GridPoint | None = None
            for index in range(start, len(grid)):
                smr = grid[index]
                t_exec = self.oracle.infer_exec_time(model, ibs, smr)
                feasible = t_exec <= budget
                trials.append(
                    ProfileTrial(
                        trial_index=len(trials) + 1,
                        session="search",
                        smr=smr,
                        ibs=ibs,
                        measured=t_exec,
                        feasible=feasible,
                    )
                )
                point = _GridPoint(ibs, smr, t_exec, throughput_efficacy(ibs, t_exec, smr))
                if feasible:
                    level_best = point
                    start = index
                    break
                if best is not None and not _te_can_beat(point.te, best):
                    break
            if level_best is None:
                if best is None:
                    raise SloUnattainableError(
                        model.name, slo_ms, self.oracle.infer_exec_time(model, 1, 100.0)
                    )
                break
            if not _beats(level_best, best):
                break
            best = level_best

        assert best is not None
        return self._inference_result(model, best, trials, "hybrid_growth", slo_ms)

    def profile_inference_traversal(
        self,
        model: ModelRef,
        slo_ms: float,
        smr_step: float = DEFAULT_SMR_STEP,
        ibs_max: int = DEFAULT_IBS_MAX,
    ) -> ProfileResult:
        """Evaluate every grid point and return the feasible TE maximizer."""
        budget = slo_ms / 2.0
        trials: list[ProfileTrial] = []
        best: _GridPoint | None = None
        for ibs in _ibs_levels(ibs_max):
            for smr in _smr_grid(smr_step):
                t_exec = self.oracle.infer_exec_time(model, ibs, smr)
                feasible = t_exec <= budget
                trials.append(
                    ProfileTrial(
                        trial_index=len(trials) + 1,
                        session="traversal",
                        smr=smr,
                        ibs=ibs,
                        measured=t_exec,
                        feasible=feasible,
                    )
                )
                point = _GridPoint(ibs, smr, t_exec, throughput_efficacy(ibs, t_exec, smr))
                if feasible and _beats(point, best):
                    best = point
        if best is None:
            raise SloUnattainableError(
                model.name, slo_ms, self.oracle.infer_exec_time(model, 1, 100.0)
            )
        return self._inference_result(model, best, trials, "traversal", slo_ms)

    @staticmethod
    def _inference_result(
        model: ModelRef,
        best: _GridPoint,
        trials: list[ProfileTrial],
        method: str,
        slo_ms: float,
    ) -> ProfileResult:
        quota = ResourceQuota(
            request_smr=best.smr,
            limit_smr=min(100.0, 2.0 * best.smr),
            mem_gb=model.mem_gb,
            ibs=best.ibs,
        )
        logger.info(
            f"Profiled inference quota for {model.name} via {method}",
            extra={
                "model": model.name,
                "slo_ms": slo_ms,
                "ibs": best.ibs,
                "request_smr": best.smr,
                "trials": len(trials),
            },
        )
        return ProfileResult(
            model=model.name,
            kind="inference",
            method=method,  # type: ignore[arg-type]
            quota=quota,
            trials=trials,
        )

    def profile_function(self, spec: FunctionSpec, catalog: ModelCatalog) -> FunctionSpec:
        """Return ``spec`` with its quota filled in; profiled specs pass through."""
        if spec.quota is not None:
            return spec
        model = catalog.get(spec.model)
        if isinstance(spec.kind, TrainingKind):
            result = self.profile_training(
                model,
                workers=max(1, spec.kind.workers),
                comm_idle_frac=spec.kind.comm_idle_frac,
            )
        else:
            assert isinstance(spec.kind, InferenceKind)
            result = self.profile_inference(model, spec.kind.slo_ms)
        return spec.model_copy(update={"quota": result.quota})


def profile_request(
    request: ProfileRequest, catalog: ModelCatalog, profiler: Profiler | None = None
) -> ProfileEntry:
    """Profile one model as described by ``request``.

    Inference requests without an SLO use the model's calibrated SLO.

    Raises:
        ValidationFailedError: If the model is unknown or has no SLO to use
        SloUnattainableError: If no grid point meets the SLO
        MonotonicityError: If training throughput is not monotone in SMR
    """
    profiler = profiler or Profiler()
    model = catalog.get(request.model)
    if request.kind == "training":
        result = profiler.profile_training(
            model, workers=request.workers, comm_idle_frac=request.comm_idle_frac
        )
        return ProfileEntry(model=model.name, kind="training", result=result)

    slo_ms = request.slo_ms or model.slo_ms
    if slo_ms is None:
        raise ValidationFailedError(
            [f"no slo_ms given and {model.name} has no calibrated SLO"], subject="profile request"
        )
    result = profiler.profile_inference(model, slo_ms, request.smr_step, request.ibs_max)
    traversal = None
    if request.with_traversal:
        traversal = profiler.profile_inference_traversal(
            model, slo_ms, request.smr_step, request.ibs_max
        )
    return ProfileEntry(
        model=model.name, kind="inference", slo_ms=slo_ms, result=result, traversal=traversal
    )


def build_profile_report(requests: list[ProfileRequest], catalog: ModelCatalog) -> ProfileReport:
    """Profile every request; a failing model is recorded and the rest continue."""
    profiler = Profiler()
    entries = []
    for request in requests:
        try:
            entries.append(profile_request(request, catalog, profiler))
        except (SloUnattainableError, MonotonicityError, ValidationFailedError) as e:
            logger.warning(
                f"Profiling failed for {request.model}: {e.message}",
                extra={"model": request.model, "error_code": e.error_code},
            )
            entries.append(
                ProfileEntry(
                    model=request.model, kind=request.kind, slo_ms=request.slo_ms, error=e.message
                )
            )
    return ProfileReport(catalog_version=catalog.version, entries=entries)
