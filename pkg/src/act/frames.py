"""Pixel-level primitives shared by every oracle.

Frames are plain RGB byte arrays; the only image operations provided are the
ones the oracles need: HSV conversion, hue-band masking inside a region of
interest, active-pixel counting and blob centroids.  Fixture frames are stored
as binary PPM (P6) files, one per frame, next to a small JSON manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidConfig, RoiOutOfBounds

FRAME_PATTERN = "frame_%06d.ppm"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Frame:
    """A timestamped RGB image; ``pixels`` is (height, width, 3) uint8, row-major."""

    pixels: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            raise InvalidConfig(f"frame pixels must be uint8, got {px.dtype}")
        if px.ndim != 3 or px.shape[2] != 3:
            raise InvalidConfig(f"frame pixels must have shape (h, w, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidConfig("frame must be at least 1x1")
        if self.timestamp < 0:
            raise InvalidConfig(f"frame timestamp must be >= 0, got {self.timestamp}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Roi:
    """A fixed sub-rectangle of a frame, in pixel coordinates."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1:
            raise InvalidConfig(f"roi extents must be >= 1, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise InvalidConfig(f"roi offsets must be >= 0, got ({self.x}, {self.y})")

    def check_fits(self, frame: Frame) -> None:
        if self.x + self.w > frame.width or self.y + self.h > frame.height:
            raise RoiOutOfBounds(
                f"roi {self} exceeds frame extents {frame.width}x{frame.height}"
            )

    def crop(self, pixels: np.ndarray) -> np.ndarray:
        return pixels[self.y : self.y + self.h, self.x : self.x + self.w]


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV band. ``hue_lo > hue_hi`` selects the arc wrapping through 0 degrees."""

    hue_lo: float
    hue_hi: float
    sat_lo: float = 0.0
    sat_hi: float = 1.0
    val_lo: float = 0.0
    val_hi: float = 1.0

    def __post_init__(self) -> None:
        for name in ("hue_lo", "hue_hi"):
            v = getattr(self, name)
            if not 0.0 <= v < 360.0:
                raise InvalidConfig(f"{name} must be in [0, 360), got {v}")
        for lo, hi in (("sat_lo", "sat_hi"), ("val_lo", "val_hi")):
            a, b = getattr(self, lo), getattr(self, hi)
            if not 0.0 <= a <= b <= 1.0:
                raise InvalidConfig(f"need 0 <= {lo} <= {hi} <= 1, got {a}, {b}")

    @property
    def wraps(self) -> bool:
        return self.hue_lo > self.hue_hi

    def contains(self, hue: float, sat: float, val: float) -> bool:
        if self.wraps:
            hue_ok = hue >= self.hue_lo or hue <= self.hue_hi
        else:
            hue_ok = self.hue_lo <= hue <= self.hue_hi
        return hue_ok and self.sat_lo <= sat <= self.sat_hi and self.val_lo <= val <= self.val_hi


@dataclass(frozen=True)
class Mask:
    """Boolean pixel selection over an ROI, with the true-bit count cached."""

    bits: np.ndarray
    active_count: int

    @property
    def w(self) -> int:
        return self.bits.shape[1]

    @property
    def h(self) -> int:
        return self.bits.shape[0]


def rgb_to_hsv(r: int, g: int, b: int) -> tuple[float, float, float]:
    """Convert one 8-bit RGB triple to (hue degrees [0,360), sat [0,1], val [0,1]).

    Hexcone model: V = max/255, S = (max-min)/max, hue by the standard sector
    formula.  Hue and saturation are 0 by convention when undefined.
    """
    mx = r if r >= g else g
    if b > mx:
        mx = b
    mn = r if r <= g else g
    if b < mn:
        mn = b
    val = mx / 255.0
    delta = mx - mn
    if mx == 0 or delta == 0:
        return 0.0, 0.0, val
    sat = delta / mx
    if mx == r:
        hp = (g - b) / delta
        if hp < 0.0:
            hp += 6.0
    elif mx == g:
        hp = (b - r) / delta + 2.0
    else:
        hp = (r - g) / delta + 4.0
    return 60.0 * hp, sat, val


def hsv_to_rgb(hue: float, sat: float, val: float) -> tuple[int, int, int]:
    """Inverse hexcone conversion back to an 8-bit RGB triple."""
    hue = hue % 360.0
    c = val * sat
    hp = hue / 60.0
    x = c * (1.0 - abs(hp % 2.0 - 1.0))
    sector = int(hp) % 6
    rp, gp, bp = (
        (c, x, 0.0),
        (x, c, 0.0),
        (0.0, c, x),
        (0.0, x, c),
        (x, 0.0, c),
        (c, 0.0, x),
    )[sector]
    m = val - c
    return (
        int(round((rp + m) * 255.0)),
        int(round((gp + m) * 255.0)),
        int(round((bp + m) * 255.0)),
    )


def pixels_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized hexcone conversion; returns float64 (h, w, 3) of hue/sat/val.

    Per-pixel results are bit-identical to :func:`rgb_to_hsv` (same operation
    order, same max-channel tie-breaking).
    """
    arr = np.asarray(rgb, dtype=np.float64)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn
    val = mx / 255.0
    safe_mx = np.where(mx == 0.0, 1.0, mx)
    sat = np.where(delta == 0.0, 0.0, delta / safe_mx)
    safe_delta = np.where(delta == 0.0, 1.0, delta)
    hr = (g - b) / safe_delta
    hr = np.where(hr < 0.0, hr + 6.0, hr)
    hg = (b - r) / safe_delta + 2.0
    hb = (r - g) / safe_delta + 4.0
    hp = np.select([delta == 0.0, mx == r, mx == g], [0.0, hr, hg], default=hb)
    return np.stack([60.0 * hp, sat, val], axis=-1)


def apply_mask(frame: Frame, rng: HsvRange, roi: Roi) -> Mask:
    """Select the ROI pixels whose HSV lies inside ``rng`` (hue wraparound honored)."""
    roi.check_fits(frame)
    hsv = pixels_to_hsv(roi.crop(frame.pixels))
    hue, sat, val = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    if rng.wraps:
        hue_ok = (hue >= rng.hue_lo) | (hue <= rng.hue_hi)
    else:
        hue_ok = (hue >= rng.hue_lo) & (hue <= rng.hue_hi)
    bits = (
        hue_ok
        & (sat >= rng.sat_lo)
        & (sat <= rng.sat_hi)
        & (val >= rng.val_lo)
        & (val <= rng.val_hi)
    )
    return Mask(bits=bits, active_count=int(bits.sum()))


def centroid(mask: Mask) -> tuple[float, float] | None:
    """Unweighted mean (x, y) of active pixels, sub-pixel; None when the mask is empty."""
    if mask.active_count == 0:
        return None
    ys, xs = np.nonzero(mask.bits)
    return float(xs.mean()), float(ys.mean())


# --- PPM fixtures -----------------------------------------------------------


def write_ppm(path: str | Path, pixels: np.ndarray) -> None:
    """Write an RGB array as a binary PPM (magic P6, maxval 255)."""
    px = np.asarray(pixels, dtype=np.uint8)
    h, w = px.shape[0], px.shape[1]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(px.tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary PPM back into a (h, w, 3) uint8 array."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise InvalidConfig(f"{path}: not a binary PPM (missing P6 magic)")
    # Header: magic, width, height, maxval as whitespace-separated tokens;
    # '#' starts a comment running to end of line.
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise InvalidConfig(f"{path}: unsupported maxval {maxval}")
    raster = data[pos : pos + w * h * 3]
    if len(raster) != w * h * 3:
        raise InvalidConfig(f"{path}: truncated raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def dump_frame_dir(directory: str | Path, frames: list[Frame], fps: float) -> None:
    """Write frames as frame_%06d.ppm plus a manifest carrying fps and dimensions."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k, frame in enumerate(frames):
        write_ppm(directory / (FRAME_PATTERN % k), frame.pixels)
    manifest = {
        "fps": fps,
        "width": frames[0].width if frames else 0,
        "height": frames[0].height if frames else 0,
        "frame_count": len(frames),
        "pattern": FRAME_PATTERN,
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_frame_dir(directory: str | Path) -> list[Frame]:
    """Load a dumped frame directory; timestamps are reconstructed as k/fps."""
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST_NAME).read_text())
    fps = float(manifest["fps"])
    pattern = manifest.get("pattern", FRAME_PATTERN)
    frames = []
    for k in range(int(manifest["frame_count"])):
        px = read_ppm(directory / (pattern % k))
        frames.append(Frame(pixels=px, timestamp=k / fps))
    return frames
