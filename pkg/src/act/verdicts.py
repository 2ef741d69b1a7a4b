"""The universal oracle output: a pass/fail outcome with measured values and reasons."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Outcome(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"
    ERROR = "error"


@dataclass
class TestVerdict:
    """Outcome of one test case.

    ``measured`` holds kind-specific scalar results; bulky series (deviation or
    RPM traces) ride in ``traces`` and are only emitted to plot CSVs, never to
    the JSON/XML reports.
    """

    case_id: str
    kind: str
    outcome: Outcome
    measured: dict = field(default_factory=dict)
    reason_log: list[str] = field(default_factory=list)
    attempts: int = 1
    duration_s: float = 0.0
    traces: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.attempts < 1:
            raise ValueError(f"attempts must be >= 1, got {self.attempts}")
        if self.outcome is Outcome.ERROR and not self.reason_log:
            raise ValueError("an ERROR verdict must carry at least one reason")
