"""Display snapshot oracle: fixed-font recognition of pitch/roll values and verdicts.

The built-in recognizer is a deterministic 5x7 template matcher over the same
glyph set the simulator renders with, so recognition is exact by construction
on clean snapshots and degrades measurably on corrupted ones.  A full OCR
engine can be substituted through the recognizer callable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InvalidActualAngle, InvalidConfig, MalformedNumeral
from .frames import Frame, Roi, read_ppm, write_ppm
from .verdicts import Outcome, TestVerdict

GLYPH_W = 5
GLYPH_H = 7
CELL_ADVANCE = 6  # glyph plus one blank column
LINE_ADVANCE = 9  # glyph plus two blank rows

# fmt: off
_GLYPH_ROWS = {
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": (".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    "-": (".....", ".....", ".....", "#####", ".....", ".....", "....."),
    ".": (".....", ".....", ".....", ".....", ".....", ".##..", ".##.."),
    "P": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "R": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "B": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "L": ("#....", "#....", "#....", "#....", "#....", "#...#", "#####"),
    "i": ("..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###."),
    "t": (".#...", ".#...", "####.", ".#...", ".#...", ".#..#", "..##."),
    "c": (".....", ".....", ".###.", "#....", "#....", "#...#", ".###."),
    "h": ("#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#"),
    "o": (".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."),
    "l": (".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "u": (".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#"),
    "m": (".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#"),
    "p": (".....", ".....", "####.", "#...#", "####.", "#....", "#...."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
}
# fmt: on

NUMERIC_GLYPHS = "0123456789.-"


def glyph_bitmap(ch: str) -> np.ndarray:
    """5x7 boolean bitmap for one supported glyph."""
    rows = _GLYPH_ROWS[ch]
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


_TEMPLATES = {ch: glyph_bitmap(ch) for ch in NUMERIC_GLYPHS}


def render_text(
    canvas: np.ndarray,
    x: int,
    y: int,
    text: str,
    scale: int = 1,
    color: tuple[int, int, int] = (255, 255, 255),
) -> None:
    """Stamp ``text`` onto an RGB canvas at (x, y) using the built-in font."""
    col = np.array(color, dtype=np.uint8)
    for i, ch in enumerate(text):
        bits = glyph_bitmap(ch)
        x0 = x + i * CELL_ADVANCE * scale
        big = np.kron(bits, np.ones((scale, scale), dtype=bool))
        region = canvas[y : y + GLYPH_H * scale, x0 : x0 + GLYPH_W * scale]
        region[big[: region.shape[0], : region.shape[1]]] = col


def save_glyph_atlas(ppm_path: str | Path, manifest_path: str | Path) -> None:
    """Write the font as a PPM strip plus an index mapping glyph -> cell offset."""
    order = sorted(_GLYPH_ROWS)
    strip = np.zeros((GLYPH_H, CELL_ADVANCE * len(order), 3), dtype=np.uint8)
    index = {}
    for i, ch in enumerate(order):
        render_text(strip, i * CELL_ADVANCE, 0, ch)
        index[ch] = i * CELL_ADVANCE
    write_ppm(ppm_path, strip)
    Path(manifest_path).write_text(
        json.dumps(
            {"glyph_w": GLYPH_W, "glyph_h": GLYPH_H, "cells": index},
            indent=2,
            sort_keys=True,
        )
    )


def load_glyph_atlas(ppm_path: str | Path, manifest_path: str | Path) -> dict[str, np.ndarray]:
    """Load an atlas strip back into glyph bitmaps."""
    strip = read_ppm(ppm_path)
    manifest = json.loads(Path(manifest_path).read_text())
    gw, gh = manifest["glyph_w"], manifest["glyph_h"]
    out = {}
    for ch, off in manifest["cells"].items():
        out[ch] = strip[:gh, off : off + gw, :].max(axis=2) >= 128
    return out


@dataclass(frozen=True)
class DisplayLine:
    label: str
    value_box: Roi


@dataclass(frozen=True)
class DisplayLayout:
    """Where the labelled value boxes sit in the frame, and the glyph geometry."""

    lines: tuple[DisplayLine, ...]
    scale: int = 2
    value_cells: int = 7

    def __post_init__(self) -> None:
        boxes = [ln.value_box for ln in self.lines]
        for i, a in enumerate(boxes):
            for b in boxes[i + 1 :]:
                if not (
                    a.x + a.w <= b.x or b.x + b.w <= a.x or a.y + a.h <= b.y or b.y + b.h <= a.y
                ):
                    raise InvalidConfig("display line boxes overlap")

    def line_for_box(self, box: Roi) -> DisplayLine | None:
        for ln in self.lines:
            if ln.value_box == box:
                return ln
        return None


def make_display_layout(
    x: int = 16,
    y: int = 168,
    scale: int = 2,
    labels: tuple[str, ...] = ("Pitch", "Roll"),
    value_cells: int = 7,
) -> DisplayLayout:
    """Build the standard two-line layout: ``<label> <signed decimal>`` per line."""
    label_cells = max(len(lb) for lb in labels) + 1
    lines = []
    for i, label in enumerate(labels):
        box = Roi(
            x + label_cells * CELL_ADVANCE * scale,
            y + i * LINE_ADVANCE * scale,
            value_cells * CELL_ADVANCE * scale,
            GLYPH_H * scale,
        )
        lines.append(DisplayLine(label=label, value_box=box))
    return DisplayLayout(lines=tuple(lines), scale=scale, value_cells=value_cells)


DEFAULT_LAYOUT = make_display_layout()


@dataclass(frozen=True)
class RecognizedToken:
    text: str
    confidence: float
    box: Roi

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidConfig(f"confidence must be in [0,1], got {self.confidence}")


@dataclass(frozen=True)
class ImuPolicy:
    """Confidence gate and pass band for display-reported tilt values."""

    min_confidence: float = 0.80
    tolerance_deg: float = 4.5  # 5% of the 90-degree half-range
    valid_lo_deg: float = -90.0
    valid_hi_deg: float = 90.0

    def __post_init__(self) -> None:
        if self.tolerance_deg <= 0:
            raise InvalidConfig("tolerance_deg must be positive")


class ImuFault(str, Enum):
    NONE = "none"
    NO_OUTPUT = "no_output"
    PARTIAL_OUTPUT = "partial_output"


@dataclass
class ImuReading:
    pitch_deg: float | None
    roll_deg: float | None
    tokens: list[RecognizedToken] = field(default_factory=list)
    fault: ImuFault = ImuFault.NONE
    notes: list[str] = field(default_factory=list)


# A recognizer maps (frame, layout) to tokens; the template matcher below is
# the default, a real OCR engine can be dropped in with the same signature.
Recognizer = Callable[[Frame, DisplayLayout], list[RecognizedToken]]


def _binary_cells(frame: Frame, box: Roi, scale: int) -> list[np.ndarray]:
    """Split a value box into per-glyph 5x7 bitmaps (majority vote per scale block)."""
    region = box.crop(frame.pixels).max(axis=2) >= 128
    cells = []
    n_cells = box.w // (CELL_ADVANCE * scale)
    for i in range(n_cells):
        x0 = i * CELL_ADVANCE * scale
        cell = region[: GLYPH_H * scale, x0 : x0 + GLYPH_W * scale]
        bits = np.zeros((GLYPH_H, GLYPH_W), dtype=bool)
        for r in range(GLYPH_H):
            for c in range(GLYPH_W):
                block = cell[r * scale : (r + 1) * scale, c * scale : (c + 1) * scale]
                bits[r, c] = block.size > 0 and block.mean() >= 0.5
        cells.append(bits)
    return cells


def _match_cell(bits: np.ndarray) -> tuple[str, float]:
    """Best numeric glyph for a cell by foreground intersection-over-union."""
    best_ch, best_score = "", 0.0
    for ch, tpl in _TEMPLATES.items():
        inter = np.logical_and(bits, tpl).sum()
        union = np.logical_or(bits, tpl).sum()
        score = inter / union if union else 0.0
        if score > best_score:
            best_ch, best_score = ch, score
    return best_ch, best_score


def recognize(
    frame: Frame,
    layout: DisplayLayout = DEFAULT_LAYOUT,
    recognizer: Recognizer | None = None,
) -> list[RecognizedToken]:
    """Recognize one token per non-blank value box; confidence is the mean cell score."""
    if recognizer is not None:
        return recognizer(frame, layout)
    tokens = []
    for line in layout.lines:
        line.value_box.check_fits(frame)
        cells = _binary_cells(frame, line.value_box, layout.scale)
        chars: list[str] = []
        scores: list[float] = []
        for bits in cells:
            if not bits.any():
                if chars:
                    break  # end of the rendered run
                continue
            ch, score = _match_cell(bits)
            chars.append(ch)
            scores.append(score)
        if chars:
            tokens.append(
                RecognizedToken(
                    text="".join(chars),
                    confidence=float(np.mean(scores)),
                    box=line.value_box,
                )
            )
    return tokens


_NUMERAL_RE = re.compile(r"^-?\d+(\.\d+)?$")


def parse_numeral(text: str) -> float:
    """Parse a signed decimal; raises MalformedNumeral on anything else."""
    if not _NUMERAL_RE.match(text):
        raise MalformedNumeral(f"not a signed decimal: {text!r}")
    return float(text)


def parse_reading(
    tokens: list[RecognizedToken],
    policy: ImuPolicy | None = None,
    layout: DisplayLayout = DEFAULT_LAYOUT,
) -> ImuReading:
    """Extract pitch/roll from tokens, keeping only high-confidence values.

    Fault classification: nothing recognized at all is ``no_output``; anything
    recognized but incomplete (missing axis, low confidence, malformed text)
    is ``partial_output``.
    """
    policy = policy or ImuPolicy()
    values: dict[str, float | None] = {"pitch": None, "roll": None}
    notes = []
    for token in tokens:
        line = layout.line_for_box(token.box)
        if line is None:
            notes.append(f"token {token.text!r} in unknown box, ignored")
            continue
        axis = line.label.lower()
        if token.confidence < policy.min_confidence:
            notes.append(
                f"{axis}: confidence {token.confidence:.2f} below gate "
                f"{policy.min_confidence:.2f}, value dropped"
            )
            continue
        try:
            values[axis] = parse_numeral(token.text)
        except MalformedNumeral:
            notes.append(f"{axis}: malformed numeral {token.text!r}")
    if not tokens:
        fault = ImuFault.NO_OUTPUT
    elif values["pitch"] is not None and values["roll"] is not None:
        fault = ImuFault.NONE
    else:
        fault = ImuFault.PARTIAL_OUTPUT
    return ImuReading(
        pitch_deg=values["pitch"],
        roll_deg=values["roll"],
        tokens=list(tokens),
        fault=fault,
        notes=notes,
    )


def imu_verdict(
    reading: ImuReading,
    actual_pitch: float,
    actual_roll: float,
    policy: ImuPolicy | None = None,
) -> TestVerdict:
    """Judge a parsed reading against the commanded tilt.

    Display faults and out-of-range values (a calibration fault signature)
    always fail; otherwise both axes must be within the tolerance band.
    """
    policy = policy or ImuPolicy()
    for name, angle in (("pitch", actual_pitch), ("roll", actual_roll)):
        if not policy.valid_lo_deg <= angle <= policy.valid_hi_deg:
            raise InvalidActualAngle(f"actual {name} {angle} outside valid range")
    if actual_pitch != 0.0 and actual_roll != 0.0:
        raise InvalidActualAngle("at most one of pitch/roll may be nonzero per test")

    devs = {}
    for axis, measured, actual in (
        ("pitch", reading.pitch_deg, actual_pitch),
        ("roll", reading.roll_deg, actual_roll),
    ):
        devs[axis] = None if measured is None else abs(measured - actual)
    measured_summary = {
        "pitch_deg": reading.pitch_deg,
        "roll_deg": reading.roll_deg,
        "pitch_dev_deg": devs["pitch"],
        "roll_dev_deg": devs["roll"],
        "fault": reading.fault.value,
    }
    reasons = list(reading.notes)

    if reading.fault is not ImuFault.NONE:
        reasons.append(f"display fault: {reading.fault.value}")
        return TestVerdict("", "imu", Outcome.FAIL, measured_summary, reasons)

    out_of_range = [
        axis
        for axis, value in (("pitch", reading.pitch_deg), ("roll", reading.roll_deg))
        if not policy.valid_lo_deg <= value <= policy.valid_hi_deg  # type: ignore[operator]
    ]
    if out_of_range:
        reasons.append(
            "calibration fault: measured "
            + ", ".join(out_of_range)
            + f" outside [{policy.valid_lo_deg:g}, {policy.valid_hi_deg:g}]"
        )
        return TestVerdict("", "imu", Outcome.FAIL, measured_summary, reasons)

    bad = [axis for axis, dev in devs.items() if dev > policy.tolerance_deg]
    if bad:
        reasons.append(
            ", ".join(f"{axis} deviation {devs[axis]:.2f} deg" for axis in bad)
            + f" exceeds tolerance {policy.tolerance_deg:g} deg"
        )
        return TestVerdict("", "imu", Outcome.FAIL, measured_summary, reasons)

    reasons.append(
        f"pitch dev {devs['pitch']:.2f} deg, roll dev {devs['roll']:.2f} deg, "
        f"both within {policy.tolerance_deg:g} deg"
    )
    return TestVerdict("", "imu", Outcome.PASS, measured_summary, reasons)
