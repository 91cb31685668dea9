"""Deterministic tick-driven simulation of a serverless GPU cluster.

One tick is one arbiter period. Every tick runs, in order: admission and
dispatch of arriving requests, batch and iteration starts with kernel-block
launches, per-GPU token arbitration, completions and cold-start progress, the
once-per-second horizontal scaling pass, and (optionally) invariant checks.

Runs are single-threaded and draw all randomness from named sub-streams of
the scenario seed, so equal scenarios give byte-identical reports.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from src.models.domain import FunctionSpec, InstanceState, Phase, Request, TrainingKind
from src.models.error import CapacityExhaustedError, InvariantViolationError
from src.models.scaling import Branch, LaunchCause, ScaleAction, ShareKind
from src.models.scenario import BaselineMode, Scenario
from src.models.scheduling import Placement
from src.services.fleet import run_large_scale
from src.services.gateway import BatchQueue, dispatch
from src.services.hscaler import HorizontalScaler
from src.services.metrics import RunLog, SimulationResult, compute_metrics
from src.services.perfmodel import (
    ModelCatalog,
    batch_block_cap,
    batch_blocks,
    cold_start_time,
    iteration_block_cap,
    kernel_blocks,
    load_model_catalog,
)
from src.services.profiler import Profiler
from src.services.scheduler import Cluster, Scheduler
from src.services.vscaler import GpuArbiter, GrantPolicy, PeriodOutcome
from src.services.workload import generate_trace
from src.utils.validators import require_valid_scenario, ticks_per_second

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class _Cycle:
    """One inference batch or training iteration in flight.

    Pipelined cycles (multi-GPU LLM instances) run their stages one GPU after
    another; otherwise every GPU of the instance works concurrently.
    """

    started_tick: int
    ideal_ticks: int
    reference_ms: float
    cap: int
    gpus: list[int]
    unlaunched: dict[int, int]
    pipelined: bool = False
    stage: int = 0
    batch: list[Request] = field(default_factory=list)

    def active_gpus(self) -> list[int]:
        if self.pipelined:
            return [self.gpus[self.stage]] if self.stage < len(self.gpus) else []
        return self.gpus


@dataclass(slots=True)
class _Live:
    state: InstanceState
    func: FunctionSpec
    placement: Placement
    exclusive_gpus: int
    queue: BatchQueue = field(default_factory=BatchQueue)
    cycle: _Cycle | None = None
    attached: bool = False
    gap_ticks: int = 0
    samples: int = 0
    carry: dict[int, int] = field(default_factory=dict)

    @property
    def instance_id(self) -> str:
        return self.state.instance_id

    @property
    def phase(self) -> Phase:
        return self.state.phase

    @property
    def outstanding(self) -> int:
        return self.queue.outstanding


class Simulation:
    """A single run of one scenario.

    Args:
        scenario: Validated scenario
        catalog: Base model profiles; the packaged asset when omitted

    Raises:
        ValidationFailedError: If the scenario fails cross-field validation
        SloUnattainableError: If an inference function cannot meet its SLO
    """

    def __init__(self, scenario: Scenario, catalog: ModelCatalog | None = None) -> None:
        self.scenario = scenario
        self.catalog = (catalog or load_model_catalog()).with_overrides(scenario.models)
        require_valid_scenario(scenario, self.catalog)

        self.mode = scenario.baseline_mode
        self.vcfg = scenario.vscaler
        self.period_ms = self.vcfg.period_ms
        self.tps = ticks_per_second(self.period_ms)
        self.total_ticks = math.ceil(scenario.duration_s * 1000.0 / self.period_ms - 1e-9)
        self.policy = (
            GrantPolicy.ARBITRATED if self.mode is BaselineMode.DILU else GrantPolicy.STATIC
        )
        self.eager = self.mode is BaselineMode.EAGER_HORIZONTAL

        cluster_cfg = scenario.cluster
        self.cluster = Cluster(cluster_cfg.nodes, cluster_cfg.gpus_per_node, cluster_cfg.gpu_mem_gb)
        self.scheduler = Scheduler(self.cluster, scenario.scheduler, self.mode)
        hcfg = scenario.hscaler
        if self.eager:
            # any overloaded second scales out
            hcfg = hcfg.model_copy(update={"phi_out": 1})
        self.hscaler = HorizontalScaler(hcfg, self.catalog)

        profiler = Profiler()
        self.functions: dict[str, FunctionSpec] = {}
        self.arrivals: dict[str, np.ndarray] = {}
        for entry in scenario.functions:
            spec = profiler.profile_function(entry.function, self.catalog)
            self.functions[spec.id] = spec
            self.hscaler.register(spec)
            if entry.workload is not None and not spec.is_training:
                self.arrivals[spec.id] = generate_trace(
                    entry.workload, scenario.duration_s, scenario.seed, stream=spec.id
                )
        self.inference_ids = sorted(self.arrivals)

        self.log = RunLog(
            mode=self.mode,
            seed=scenario.seed,
            duration_s=scenario.duration_s,
            period_ms=self.period_ms,
            functions=list(self.functions.values()),
            requests={fid: [] for fid in self.inference_ids},
            csc={fid: 0 for fid in self.functions},
            samples={fid: 0 for fid in self.functions if self.functions[fid].is_training},
        )
        self.instances: dict[str, _Live] = {}
        self.arbiters: dict[int, GpuArbiter] = {}
        self.tick = 0
        self._cursor = {fid: 0 for fid in self.inference_ids}
        self._second_counts = {fid: 0 for fid in self.inference_ids}
        self._last_arrival_ms = {fid: 0.0 for fid in self.inference_ids}
        self._completed = {fid: 0 for fid in self.inference_ids}
        self._backlog: dict[str, deque[Request]] = {fid: deque() for fid in self.inference_ids}
        self._pending: list[tuple[str, LaunchCause]] = []
        self._next_index: dict[str, int] = {}
        self._finished: set[str] = set()
        self._exclusive_gpus = 0
        self._request_seq = 0
        self._batch_seq = 0
        self._executed: dict[int, int] = {}
        self._client_executed: dict[tuple[int, str], int] = {}

        for entry in scenario.functions:
            for _ in range(entry.initial_instances):
                if self._launch(entry.function.id, LaunchCause.INITIAL) is None:
                    self._pending.append((entry.function.id, LaunchCause.SCALE_OUT))

    # instance lifecycle

    def _arbiter(self, gpu_id: int) -> GpuArbiter:
        arbiter = self.arbiters.get(gpu_id)
        if arbiter is None:
            arbiter = GpuArbiter(gpu_id, self.vcfg, self.policy)
            self.arbiters[gpu_id] = arbiter
        return arbiter

    def _launch(self, function_id: str, cause: LaunchCause) -> _Live | None:
        """Place and start one instance of ``function_id``.

        Initial instances start warm. A demand launch always counts as a cold start;
        a scale-out launch counts only when the model has a cold-start delay.

        Returns:
            The new instance, or None when no GPU can take it
        """
        func = self.functions[function_id]
        index = self._next_index.get(function_id, 0)
        self._next_index[function_id] = index + 1
        instance_id = f"{function_id}#{index:04d}"
        try:
            placement = self.scheduler.schedule_instances(func, instance_id)
        except CapacityExhaustedError:
            self.log.placement_failures += 1
            logger.warning(
                f"No capacity for {instance_id}",
                extra={"function_id": function_id, "tick": self.tick},
            )
            return None

        model = self.catalog.get(func.model)
        stages = max(1, math.ceil(model.mem_gb / self.scenario.cluster.gpu_mem_gb - 1e-9))
        live = _Live(
            state=InstanceState(
                instance_id=instance_id,
                function_id=function_id,
                gpu_ids=list(placement.gpu_ids),
                started_at=self.tick,
            ),
            func=func,
            placement=placement,
            exclusive_gpus=func.n_gpus * stages,
        )
        self.instances[instance_id] = live
        self._exclusive_gpus += live.exclusive_gpus
        self.log.instances_placed += 1
        cold_ms = cold_start_time(model)
        cold = cold_ms > 0
        if cause is LaunchCause.DEMAND or (cause is LaunchCause.SCALE_OUT and cold):
            self.log.csc[function_id] += 1
        if cause is LaunchCause.INITIAL or not cold:
            self._warm(live)
        else:
            live.state.cold_remaining_ms = cold_ms
        logger.info(
            f"Launched {instance_id} on GPUs {placement.gpu_ids}",
            extra={"instance_id": instance_id, "tick": self.tick, "warm": live.attached},
        )
        return live

    def _warm(self, live: _Live) -> None:
        live.state.advance(Phase.WARM)
        for i, gpu in enumerate(live.placement.gpu_ids):
            self._arbiter(gpu).attach(
                live.instance_id,
                live.func.priority,  # type: ignore[arg-type]
                live.placement.request_frac,
                live.placement.limit_frac,
                token=live.state.token if i == 0 else None,
            )
        live.attached = True

    def _terminate(self, live: _Live) -> None:
        if live.attached:
            for gpu in live.placement.gpu_ids:
                self.arbiters[gpu].detach(live.instance_id)
            live.attached = False
        if live.phase is Phase.WARM:
            live.state.advance(Phase.DRAINING)
        live.state.advance(Phase.TERMINATED)
        self.scheduler.release_instance(live.instance_id)
        self._exclusive_gpus -= live.exclusive_gpus
        del self.instances[live.instance_id]
        logger.info(
            f"Terminated {live.instance_id}",
            extra={"instance_id": live.instance_id, "tick": self.tick},
        )

    def _serving(self, function_id: str) -> list[_Live]:
        return [
            live
            for iid, live in sorted(self.instances.items())
            if live.func.id == function_id and live.phase in (Phase.COLD_STARTING, Phase.WARM)
        ]

    # step 1: admission

    def _route(self, request: Request) -> None:
        fid = request.function_id
        func = self.functions[fid]
        ibs = func.quota.ibs or 1  # type: ignore[union-attr]
        targets = self._serving(fid)
        choice = dispatch(targets, ibs, eager=self.eager)
        target: _Live | None = None
        if choice.launch:
            target = self._launch(fid, LaunchCause.DEMAND)
            if target is None and targets:
                target = min(targets, key=lambda t: (t.outstanding, t.instance_id))
        elif choice.target is not None:
            target = self.instances[choice.target]
        if target is None:
            self._backlog[fid].append(request)
            if all(pending != fid for pending, _ in self._pending):
                self._pending.append((fid, LaunchCause.DEMAND))
            return
        target.queue.enqueue(request)

    def _admit(self, now_end: float) -> None:
        for fid in self.inference_ids:
            backlog = self._backlog[fid]
            if backlog and self._serving(fid):
                waiting = list(backlog)
                backlog.clear()
                for request in waiting:
                    self._route(request)

            arrivals = self.arrivals[fid]
            slo = self.functions[fid].slo_ms or 0.0
            i = self._cursor[fid]
            while i < arrivals.size and arrivals[i] < now_end:
                arrival = float(arrivals[i])
                request = Request(
                    request_id=self._request_seq,
                    function_id=fid,
                    arrival_ms=arrival,
                    deadline_ms=arrival + slo,
                )
                self._request_seq += 1
                self.log.requests[fid].append(request)
                self._second_counts[fid] += 1
                self._last_arrival_ms[fid] = arrival
                self._route(request)
                i += 1
            self._cursor[fid] = i

    # step 2: work starts and kernel launches

    def _start_batch(self, live: _Live, now_end: float) -> None:
        func = live.func
        ibs = func.quota.ibs or 1  # type: ignore[union-attr]
        slo = func.slo_ms or 0.0
        if not live.queue.ready(now_end, ibs, slo / 2.0):
            return
        batch = live.queue.take(ibs, self._batch_seq)
        self._batch_seq += 1
        model = self.catalog.get(func.model)
        bpp = self.vcfg.capacity
        gpus = live.placement.gpu_ids
        per_stage = math.ceil(batch_blocks(model, len(batch), bpp, self.period_ms) / len(gpus))
        cap = batch_block_cap(model, len(batch), bpp)
        full_stage = math.ceil(batch_blocks(model, ibs, bpp, self.period_ms) / len(gpus))
        full_cap = batch_block_cap(model, ibs, bpp)
        live.cycle = _Cycle(
            started_tick=self.tick,
            ideal_ticks=len(gpus) * math.ceil(per_stage / cap),
            reference_ms=len(gpus) * math.ceil(full_stage / full_cap) * self.period_ms,
            cap=cap,
            gpus=list(gpus),
            unlaunched={g: per_stage for g in gpus},
            pipelined=len(gpus) > 1,
            batch=batch,
        )

    def _start_iteration(self, live: _Live) -> None:
        if live.func.id in self._finished:
            return
        if live.gap_ticks > 0:
            live.gap_ticks -= 1
            return
        kind = live.func.kind
        assert isinstance(kind, TrainingKind)
        model = self.catalog.get(live.func.model)
        blocks = kernel_blocks(model, kind.batch_size)
        cap = iteration_block_cap(model, self.vcfg.capacity)
        ideal = math.ceil(blocks / cap)
        live.cycle = _Cycle(
            started_tick=self.tick,
            ideal_ticks=ideal,
            reference_ms=ideal * self.period_ms,
            cap=cap,
            gpus=list(live.placement.gpu_ids),
            unlaunched={
                g: max(0, blocks - live.carry.get(g, 0)) for g in live.placement.gpu_ids
            },
        )
        live.carry = {}

    def _launch_blocks(self, live: _Live, now_end: float) -> None:
        cycle = live.cycle
        assert cycle is not None
        for gpu in cycle.active_gpus():
            arbiter = self.arbiters[gpu]
            client = arbiter.clients[live.instance_id]
            client.batch_cap = cycle.cap
            room = cycle.cap - client.token.pending_blocks
            blocks = min(cycle.unlaunched[gpu], room)
            if blocks > 0:
                arbiter.report_kernels(live.instance_id, blocks, now_end)
                cycle.unlaunched[gpu] -= blocks

    def _start_work(self, now_end: float) -> None:
        for _, live in sorted(self.instances.items()):
            if not live.attached:
                continue
            if live.cycle is None:
                if live.func.is_training:
                    self._start_iteration(live)
                else:
                    self._start_batch(live, now_end)
            if live.cycle is not None:
                self._launch_blocks(live, now_end)

    # step 3: arbitration

    def _arbitrate(self) -> None:
        self._executed = {}
        self._client_executed = {}
        for gpu in sorted(self.arbiters):
            arbiter = self.arbiters[gpu]
            if not arbiter.clients:
                continue
            outcome = arbiter.arbitrate(self.tick)
            self._executed[gpu] = outcome.total_executed
            for iid, n in outcome.executed.items():
                self._client_executed[(gpu, iid)] = n
            if self.scenario.record_grants:
                for iid in sorted(outcome.grants):
                    self.log.grant_rows.append(
                        (
                            self.tick,
                            gpu,
                            iid,
                            outcome.state.kind.value,
                            outcome.grants[iid],
                            outcome.executed[iid],
                        )
                    )
            if self.scenario.check_invariants:
                self._check_arbiter(arbiter, outcome)

    # step 4: completions and cold starts

    def _cycle_done(self, live: _Live, cycle: _Cycle) -> bool:
        def drained(gpu: int) -> bool:
            pending = self.arbiters[gpu].clients[live.instance_id].token.pending_blocks
            return cycle.unlaunched[gpu] == 0 and pending == 0

        if cycle.pipelined:
            if not drained(cycle.gpus[cycle.stage]):
                return False
            # the next stage launches on a later tick
            cycle.stage += 1
            return cycle.stage >= len(cycle.gpus)
        return all(drained(g) for g in cycle.gpus)

    def _spare_blocks(self, live: _Live, gpu: int, cap: int) -> int:
        """Blocks of the next iteration that fit in the rest of this tick's grant."""
        grant = self.arbiters[gpu].clients[live.instance_id].token.r_issue
        used = self._client_executed.get((gpu, live.instance_id), 0)
        free = self.vcfg.capacity - self._executed.get(gpu, 0)
        spare = max(0, min(min(grant, cap) - used, free))
        if spare:
            self._executed[gpu] = self._executed.get(gpu, 0) + spare
            self.log.sm_frag_sum -= spare / self.vcfg.capacity
        return spare

    def _finish_cycle(self, live: _Live, cycle: _Cycle, now_end: float) -> None:
        span_ticks = self.tick - cycle.started_tick + 1
        span_ms = span_ticks / cycle.ideal_ticks * cycle.reference_ms
        for gpu in cycle.gpus:
            self.arbiters[gpu].update_klc(live.instance_id, span_ms, self.tick)
        live.cycle = None

        fid = live.func.id
        kind = live.func.kind
        if isinstance(kind, TrainingKind):
            trained = kind.batch_size * live.func.n_gpus
            live.samples += trained
            self.log.samples[fid] += trained
            idle = kind.comm_idle_frac
            live.gap_ticks = round(span_ticks * idle / (1.0 - idle))
            if kind.samples_target is not None and self.log.samples[fid] >= kind.samples_target:
                started_ms = live.state.started_at * self.period_ms
                self.log.jct_s[fid] = (now_end - started_ms) / 1000.0
                self._finished.add(fid)
                logger.info(
                    f"Training job {fid} reached {kind.samples_target} samples",
                    extra={"function_id": fid, "jct_s": self.log.jct_s[fid]},
                )
                self._terminate(live)
            elif live.gap_ticks == 0:
                live.carry = {g: self._spare_blocks(live, g, cycle.cap) for g in cycle.gpus}
        else:
            done = live.queue.finish(now_end)
            self._completed[fid] += len(done)

    def _progress(self, now_end: float) -> None:
        for _, live in sorted(self.instances.items()):
            cycle = live.cycle
            if cycle is not None and self._cycle_done(live, cycle):
                self._finish_cycle(live, cycle, now_end)

        for _, live in sorted(self.instances.items()):
            if live.phase is Phase.COLD_STARTING:
                live.state.cold_remaining_ms -= self.period_ms
                if live.state.cold_remaining_ms <= 1e-9:
                    live.state.cold_remaining_ms = 0.0
                    self._warm(live)
            elif live.phase is Phase.DRAINING and live.cycle is None and not live.outstanding:
                self._terminate(live)

    # step 5: once per second

    def _scale_in(self, function_id: str) -> bool:
        warm = [live for live in self._serving(function_id) if live.phase is Phase.WARM]
        if not warm:
            return False
        warm.sort(key=lambda live: live.instance_id, reverse=True)
        victim = min(warm, key=lambda live: live.outstanding)
        victim.state.advance(Phase.DRAINING)
        return True

    def _on_second(self, second: int) -> None:
        hcfg = self.hscaler.cfg
        for fid in self.inference_ids:
            self.hscaler.record_rps(fid, second, self._second_counts[fid])
            self._second_counts[fid] = 0
            serving = self._serving(fid)
            n_before = len(serving)
            decision = self.hscaler.decide(fid, n_before)
            n_after = n_before
            if decision.action is ScaleAction.OUT:
                for _ in range(decision.count):
                    if self._launch(fid, LaunchCause.SCALE_OUT) is not None:
                        n_after += 1
                    else:
                        self._pending.append((fid, LaunchCause.SCALE_OUT))
            elif decision.action is ScaleAction.IN and self._scale_in(fid):
                n_after -= 1
            if decision.action is not ScaleAction.HOLD:
                row = (second, fid, decision.action.value, n_before, n_after)
                self.log.scaling_rows.append(row)

            # scale to zero only when the window would not bring the instances straight back
            idle_s = hcfg.idle_terminate_s
            if (
                idle_s is not None
                and serving
                and decision.action is not ScaleAction.OUT
                and not self.hscaler.would_relaunch(fid)
            ):
                silent_ms = (second + 1) * 1000.0 - self._last_arrival_ms[fid]
                if silent_ms >= idle_s * 1000.0 and not self._backlog[fid]:
                    idle = [
                        live
                        for live in self._serving(fid)
                        if live.phase is Phase.WARM and not live.outstanding
                    ]
                    for live in idle:
                        live.state.advance(Phase.DRAINING)
                    if idle:
                        row = (second, fid, "scale_to_zero", n_after, n_after - len(idle))
                        self.log.scaling_rows.append(row)

        retry, self._pending = self._pending, []
        for fid, cause in retry:
            if self._launch(fid, cause) is None:
                self._pending.append((fid, cause))
        self.log.gpu_counts.append(self.cluster.active_count)

    # accounting and invariants

    def _account(self) -> None:
        c = self.cluster
        active = c.resident_count > 0
        n_active = int(np.count_nonzero(active))
        self.log.active_gpu_ticks += n_active
        self.log.exclusive_gpu_ticks += self._exclusive_gpus
        if n_active:
            executed = sum(self._executed.values())
            self.log.sm_frag_sum += n_active - executed / self.vcfg.capacity
            self.log.mem_frag_sum += float(
                np.sum(1.0 - c.mem_used[active] / c.mem_total[active])
            )

    def _check_arbiter(self, arbiter: GpuArbiter, outcome: PeriodOutcome) -> None:
        problems = []
        gpu = arbiter.gpu_id
        for iid, grant in outcome.grants.items():
            client = arbiter.clients[iid]
            if grant < 0 or grant > client.limit_tokens:
                problems.append(f"GPU {gpu}: grant {grant} to {iid} outside [0, limit]")
        if outcome.total_executed > arbiter.cfg.capacity:
            problems.append(f"GPU {gpu}: executed {outcome.total_executed} blocks over capacity")
        state = outcome.state
        if state.kind is ShareKind.CONTENTION:
            for iid, client in arbiter.clients.items():
                if client.slo_sensitive and outcome.grants[iid] < client.request_tokens:
                    problems.append(f"GPU {gpu}: {iid} granted below request under contention")
        if state.kind is ShareKind.EMERGENCY:
            owner = state.owner
            if owner not in arbiter.clients:
                problems.append(f"GPU {gpu}: EMERGENCY owner {owner} is not resident")
            elif outcome.grants[owner] != arbiter.clients[owner].limit_tokens:
                problems.append(f"GPU {gpu}: EMERGENCY owner {owner} not granted its limit")
        previous = outcome.previous
        if previous.kind is ShareKind.EMERGENCY and state.kind is not ShareKind.EMERGENCY:
            if outcome.branches.get(previous.owner or "") is Branch.PROTECT:
                problems.append(f"GPU {gpu}: left EMERGENCY while {previous.owner} still trips")
        if problems:
            self._abort(problems)

    def _check_tick(self) -> None:
        problems = self.cluster.violations(self.scheduler.cfg)
        for gpu, arbiter in sorted(self.arbiters.items()):
            stray = set(arbiter.clients) - self.cluster.residents[gpu]
            if stray:
                problems.append(f"GPU {gpu}: arbiter clients {sorted(stray)} not placed there")
        outstanding = {fid: len(self._backlog[fid]) for fid in self.inference_ids}
        for live in self.instances.values():
            if live.func.id in outstanding:
                outstanding[live.func.id] += live.outstanding
        for fid in self.inference_ids:
            admitted = len(self.log.requests[fid])
            if admitted != self._completed[fid] + outstanding[fid]:
                problems.append(
                    f"{fid}: admitted {admitted} != completed {self._completed[fid]} "
                    f"+ outstanding {outstanding[fid]}"
                )
        if problems:
            self._abort(problems)

    def _abort(self, problems: list[str]) -> None:
        diagnostic = "; ".join(problems)
        logger.error(
            f"Invariant violation at tick {self.tick}: {diagnostic}",
            extra={"tick": self.tick, "mode": self.mode},
        )
        raise InvariantViolationError(self.tick, diagnostic)

    # driver

    def step(self) -> None:
        """Advance the world by one tick."""
        now_end = (self.tick + 1) * self.period_ms
        self._admit(now_end)
        self._start_work(now_end)
        self._arbitrate()
        self._account()
        self._progress(now_end)
        if (self.tick + 1) % self.tps == 0:
            self._on_second((self.tick + 1) // self.tps - 1)
        if self.scenario.check_invariants:
            self._check_tick()
        for gpu in sorted(self.arbiters):
            self.arbiters[gpu].end_period()
        self.tick += 1

    def run(self) -> SimulationResult:
        logger.info(
            f"Starting {self.mode} run for {self.scenario.duration_s}s",
            extra={"mode": self.mode, "seed": self.scenario.seed, "ticks": self.total_ticks},
        )
        while self.tick < self.total_ticks:
            self.step()
        report = compute_metrics(self.log, self.catalog)
        logger.info(
            f"Finished {self.mode} run",
            extra={"mode": self.mode, "total_csc": report.total_csc, "svr": report.overall_svr},
        )
        return SimulationResult(report=report, log=self.log)


def run_scenario(scenario: Scenario, catalog: ModelCatalog | None = None) -> SimulationResult:
    """Run ``scenario`` to completion; fleet scenarios use the placement-level engine."""
    if scenario.fleet is not None:
        return run_large_scale(scenario, catalog)
    return Simulation(scenario, catalog).run()
