"""Cross-field checks on scenarios that pydantic field validation cannot express.

Each check returns human-readable violations instead of raising, so callers
can report every problem at once (``ValidationFailedError`` carries the list).
"""

import math

from src.models.domain import validate_spec
from src.models.error import ValidationFailedError
from src.models.scenario import Scenario
from src.services.perfmodel import ModelCatalog


def ticks_per_second(period_ms: float) -> int:
    """Whole number of arbiter periods in one second.

    Raises:
        ValidationFailedError: If the period does not divide one second

    Examples:
        >>> ticks_per_second(5.0)
        200
    """
    ticks = 1000.0 / period_ms
    if not math.isclose(ticks, round(ticks), abs_tol=1e-9):
        raise ValidationFailedError(
            [f"period_ms {period_ms} must divide 1000 ms"], subject="vscaler config"
        )
    return round(ticks)


def validate_scenario(scenario: Scenario, catalog: ModelCatalog) -> list[str]:
    """Return every violation in ``scenario``; an empty list means runnable.

    Args:
        scenario: Parsed scenario
        catalog: Model profiles, already merged with the scenario's overrides

    Returns:
        Violation messages, prefixed with the offending function id
    """
    violations: list[str] = []
    try:
        ticks_per_second(scenario.vscaler.period_ms)
    except ValidationFailedError as e:
        violations.extend(e.details["violations"])

    gpu_mem = scenario.cluster.gpu_mem_gb
    total_gpus = scenario.cluster.total_gpus
    seen: set[str] = set()
    for entry in scenario.functions:
        func = entry.function
        if func.id in seen:
            violations.append(f"{func.id}: duplicate function id")
        seen.add(func.id)
        violations.extend(f"{func.id}: {v}" for v in validate_spec(func))

        if func.model not in catalog:
            violations.append(f"{func.id}: unknown model {func.model!r}")
            continue
        model = catalog.get(func.model)
        if func.is_llm:
            max_mem = gpu_mem * scenario.scheduler.max_pipeline_stages
            if model.mem_gb > max_mem:
                violations.append(
                    f"{func.id}: model needs {model.mem_gb} GB, more than {max_mem} GB "
                    f"across {scenario.scheduler.max_pipeline_stages} pipeline stages"
                )
        elif model.mem_gb > gpu_mem:
            violations.append(f"{func.id}: model needs {model.mem_gb} GB, GPUs have {gpu_mem} GB")

        if func.is_training:
            if entry.workload is not None:
                violations.append(f"{func.id}: training functions take no workload")
            if func.n_gpus > total_gpus:
                violations.append(
                    f"{func.id}: {func.n_gpus} workers exceed the cluster's {total_gpus} GPUs"
                )
        elif entry.workload is None:
            violations.append(f"{func.id}: inference functions need a workload")
    return violations


def require_valid_scenario(scenario: Scenario, catalog: ModelCatalog) -> None:
    """Raise if :func:`validate_scenario` finds anything.

    Raises:
        ValidationFailedError: With every violation found
    """
    violations = validate_scenario(scenario, catalog)
    if violations:
        raise ValidationFailedError(violations, subject="scenario")
