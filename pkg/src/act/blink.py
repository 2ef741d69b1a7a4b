"""LED blink-period estimation from a thresholded active-pixel stream.

The estimator counts rising edges (OFF to ON transitions of the thresholded
signal) and measures the period edge-to-edge: the first edge only anchors the
phase, so the estimate is (last_edge - first_edge) / (edges - 1) and is
independent of the LED duty cycle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidConfig, NonMonotonicTimestamp
from .verdicts import Outcome, TestVerdict


@dataclass(frozen=True)
class BlinkPolicy:
    """Thresholds governing blink measurement and its verdict."""

    active_pixel_threshold: int = 5
    tolerance_fraction: float = 0.005
    min_blinks: int = 20
    max_flake_probability: float = 0.01
    max_observation_s: float = 30.0

    def __post_init__(self) -> None:
        if self.active_pixel_threshold < 1:
            raise InvalidConfig("active_pixel_threshold must be >= 1")
        if not 0.0 < self.tolerance_fraction < 1.0:
            raise InvalidConfig("tolerance_fraction must be in (0, 1)")
        if self.min_blinks < 2:
            raise InvalidConfig("min_blinks must be >= 2")


class BlinkEstimate:
    """Single-writer estimator state; ingest frames in timestamp order.

    When ``expected_period_s`` is given, every update after the second edge
    appends (elapsed, |deviation|/expected) to ``deviation_trace``, which is
    the convergence curve the harness can plot.
    """

    def __init__(
        self,
        policy: BlinkPolicy | None = None,
        expected_period_s: float | None = None,
    ) -> None:
        self.policy = policy or BlinkPolicy()
        self.expected_period_s = expected_period_s
        self.rising_edges = 0
        self.first_edge_t: float | None = None
        self.last_edge_t: float | None = None
        self.elapsed = 0.0
        self.deviation_trace: list[tuple[float, float]] = []
        self._last_t: float | None = None
        self._prev_on: bool | None = None  # None until the first frame fixes the phase

    def ingest(self, active_count: int, t: float) -> None:
        """Feed one (active pixel count, timestamp) observation."""
        if self._last_t is not None and t <= self._last_t:
            raise NonMonotonicTimestamp(f"t={t} not after previous t={self._last_t}")
        self._last_t = t
        self.elapsed = t
        on = active_count >= self.policy.active_pixel_threshold
        # A stream that starts mid-ON-run has no observable edge; only a true
        # OFF->ON transition counts.
        if self._prev_on is False and on:
            self.rising_edges += 1
            if self.first_edge_t is None:
                self.first_edge_t = t
            self.last_edge_t = t
        self._prev_on = on
        if self.expected_period_s is not None and self.period_estimate is not None:
            dev = abs(self.period_estimate - self.expected_period_s) / self.expected_period_s
            self.deviation_trace.append((t, dev))

    @property
    def period_estimate(self) -> float | None:
        if self.rising_edges < 2:
            return None
        return (self.last_edge_t - self.first_edge_t) / (self.rising_edges - 1)

    @property
    def frequency_estimate(self) -> float | None:
        period = self.period_estimate
        return None if period is None else 1.0 / period


def ingest_stream(
    counts: list[tuple[float, int]],
    policy: BlinkPolicy | None = None,
    expected_period_s: float | None = None,
) -> BlinkEstimate:
    """Run a whole (t, active_count) stream through a fresh estimator."""
    est = BlinkEstimate(policy, expected_period_s)
    for t, count in counts:
        est.ingest(count, t)
    return est


def blink_verdict(
    state: BlinkEstimate,
    expected_period_s: float,
    policy: BlinkPolicy | None = None,
) -> TestVerdict:
    """Judge the estimate against the expected period.

    INCONCLUSIVE (too few blinks observed) is distinct from FAIL: it tells the
    harness the observation window was too short, not that the device is wrong.
    """
    if expected_period_s <= 0:
        raise InvalidConfig("expected_period_s must be positive")
    policy = policy or state.policy
    period = state.period_estimate
    deviation = (
        None if period is None else abs(period - expected_period_s) / expected_period_s
    )
    measured = {
        "period_s": period,
        "frequency_hz": state.frequency_estimate,
        "deviation_frac": deviation,
        "rising_edges": state.rising_edges,
        "elapsed_s": state.elapsed,
    }
    traces = {"deviation": list(state.deviation_trace)}

    if state.rising_edges < policy.min_blinks:
        reasons = [
            f"only {state.rising_edges} rising edges in {state.elapsed:.2f} s, "
            f"need {policy.min_blinks}; extend the observation window"
        ]
        return TestVerdict("", "blink", Outcome.INCONCLUSIVE, measured, reasons, traces=traces)

    band = policy.tolerance_fraction * expected_period_s
    if abs(period - expected_period_s) <= band:
        reasons = [
            f"measured period {period:.6f} s vs expected {expected_period_s:.6f} s "
            f"({deviation * 100:.3f}% <= {policy.tolerance_fraction * 100:.2f}%), "
            f"{state.rising_edges} blinks"
        ]
        return TestVerdict("", "blink", Outcome.PASS, measured, reasons, traces=traces)
    reasons = [
        f"measured period {period:.6f} s deviates {deviation * 100:.3f}% from expected "
        f"{expected_period_s:.6f} s (tolerance {policy.tolerance_fraction * 100:.2f}%)"
    ]
    return TestVerdict("", "blink", Outcome.FAIL, measured, reasons, traces=traces)


def load_count_csv(path: str | Path) -> list[tuple[float, int]]:
    """Read a replay stream with header ``t_s,active_pixels``."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ["t_s", "active_pixels"]:
            raise InvalidConfig(
                f"{path}: expected header 't_s,active_pixels', got {reader.fieldnames}"
            )
        for row in reader:
            rows.append((float(row["t_s"]), int(row["active_pixels"])))
    return rows
