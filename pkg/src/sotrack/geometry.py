"""Geometry primitives, frames and patch extraction.

Boxes are stored in center form ``(cx, cy, w, h)`` everywhere, in pixels,
with sub-pixel coordinates allowed and areas computed continuously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sotrack import kernels
from sotrack.errors import DegenerateBox

PATCH_SIDE = 64
GRAY_WEIGHTS = (0.299, 0.587, 0.114)
MIN_FRAME_SIDE = 8
MIN_PATCH_SOURCE = 2.0


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in center form.

    Zero-sized boxes are representable so that an empty frame intersection
    can be returned by :func:`clamp_box`; use :attr:`is_valid` before sampling.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"box {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.w < 0 or self.h < 0:
            raise ValueError(f"box size must be non-negative, got {self.w}x{self.h}")

    @property
    def is_valid(self) -> bool:
        return self.w > 0 and self.h > 0

    @property
    def area(self) -> float:
        x1, y1, x2, y2 = self.corners()
        return (x2 - x1) * (y2 - y1)

    def corners(self) -> tuple[float, float, float, float]:
        """``(x1, y1, x2, y2)`` corner form."""
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0,
                self.cx + self.w / 2.0, self.cy + self.h / 2.0)

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float) -> "BoundingBox":
        return cls((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)

    @classmethod
    def from_top_left(cls, x: float, y: float, w: float, h: float) -> "BoundingBox":
        """Build from the ``(left, top, width, height)`` form used by most datasets."""
        return cls(x + w / 2.0, y + h / 2.0, w, h)

    def to_top_left(self) -> tuple[float, float, float, float]:
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h)

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h], dtype=np.float64)

    def translated(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.cx + dx, self.cy + dy, self.w, self.h)

    def scaled(self, factor: float) -> "BoundingBox":
        """Same center, both sides multiplied by ``factor``."""
        return BoundingBox(self.cx, self.cy, self.w * factor, self.h * factor)


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    class_label: int
    objectness: float

    def __post_init__(self):
        if not 0.0 <= self.objectness <= 1.0:
            raise ValueError(f"objectness must lie in [0, 1], got {self.objectness}")


@dataclass(frozen=True, eq=False)
class Frame:
    """One RGB video frame; ``pixels`` has shape (height, width, 3), dtype uint8."""

    index: int
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.dtype != np.uint8:
            raise ValueError("frame pixels must be an (H, W, 3) uint8 array")
        if pixels.shape[0] < MIN_FRAME_SIDE or pixels.shape[1] < MIN_FRAME_SIDE:
            raise ValueError(f"frame must be at least {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE} pixels")
        if self.index < 0:
            raise ValueError("frame index must be non-negative")
        pixels = np.ascontiguousarray(pixels)
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class Patch:
    """Square RGB raster resampled from ``source_box``."""

    pixels: np.ndarray
    source_box: BoundingBox

    def __post_init__(self):
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[0] != pixels.shape[1] or pixels.shape[2] != 3:
            raise ValueError("patch pixels must be an (S, S, 3) array")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def side(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Patch):
            return NotImplemented
        return self.source_box == other.source_box and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Luma conversion of an (..., 3) RGB raster to float64."""
    rgb = np.asarray(pixels, dtype=np.float64)
    r, g, b = GRAY_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 for disjoint boxes."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union if union > 0.0 else 0.0


def boxes_to_array(boxes) -> np.ndarray:
    """Stack boxes (or detections) into an (n, 4) center-form array."""
    rows = [(b.box if isinstance(b, Detection) else b).as_array() for b in boxes]
    if not rows:
        return np.zeros((0, 4), dtype=np.float64)
    return np.vstack(rows)


def clamp_box(box: BoundingBox, width: float, height: float) -> BoundingBox:
    """Intersect ``box`` with the frame rectangle ``[0, width] x [0, height]``.

    A box entirely outside the frame comes back with zero area; callers that
    need to sample it raise :class:`DegenerateBox`.
    """
    if width <= 0 or height <= 0:
        raise ValueError("frame dimensions must be positive")
    x1, y1, x2, y2 = box.corners()
    if x1 >= 0.0 and y1 >= 0.0 and x2 <= width and y2 <= height:
        return box
    x1, x2 = max(x1, 0.0), min(x2, float(width))
    y1, y2 = max(y1, 0.0), min(y2, float(height))
    if x2 <= x1 or y2 <= y1:
        cx = min(max(box.cx, 0.0), float(width))
        cy = min(max(box.cy, 0.0), float(height))
        return BoundingBox(cx, cy, 0.0, 0.0)
    return BoundingBox.from_corners(x1, y1, x2, y2)


def sample_region(frame: Frame, box: BoundingBox, side: int = PATCH_SIDE) -> Patch:
    """Bilinear resample of ``box`` to side x side without clamping the box.

    Regions hanging over the frame border replicate edge pixels, which keeps
    the geometry of search windows intact near the border.
    """
    if not box.is_valid:
        raise DegenerateBox(f"cannot sample a box of size {box.w}x{box.h}")
    pixels = kernels.bilinear_sample(frame.pixels, box.cx - box.w / 2.0,
                                     box.cy - box.h / 2.0, box.w, box.h, side)
    return Patch(pixels, box)


def extract_patch(frame: Frame, box: BoundingBox, side: int = PATCH_SIDE) -> Patch:
    """Clamp ``box`` to the frame and resample the visible region to side x side."""
    clamped = clamp_box(box, frame.width, frame.height)
    if clamped.w < MIN_PATCH_SOURCE or clamped.h < MIN_PATCH_SOURCE:
        raise DegenerateBox(
            f"box {box} collapses to {clamped.w:.3f}x{clamped.h:.3f} px inside the frame")
    return sample_region(frame, clamped, side)
