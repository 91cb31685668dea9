"""Lightweight stand-ins for simulator internals."""

from dataclasses import dataclass

from src.models.domain import Phase


@dataclass(frozen=True)
class FakeTarget:
    """Satisfies the gateway's dispatch target protocol."""

    instance_id: str
    phase: Phase
    outstanding: int = 0
