"""Target-guided Gaussian proposal sampling and hierarchical IoU gating."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sotrack import kernels
from sotrack.geometry import BoundingBox, Detection, boxes_to_array

MIN_PROPOSAL_SIDE = 2.0
DEFAULT_VARIANCES = (5.0, 5.0, 5.0, 5.0)
DEFAULT_PROPOSAL_COUNT = 200
DEFAULT_THRESHOLDS = (0.8, 0.5, 0.3)


@dataclass(frozen=True)
class SamplerParams:
    """Gaussian transition model around the previous tracked state.

    ``variances`` are the diagonal of the covariance over ``(cx, cy, w, h)``
    in square pixels.
    """

    mean: BoundingBox
    variances: tuple[float, float, float, float] = DEFAULT_VARIANCES
    count: int = DEFAULT_PROPOSAL_COUNT

    def __post_init__(self):
        variances = tuple(float(v) for v in self.variances)
        if len(variances) != 4 or any(v < 0 or not np.isfinite(v) for v in variances):
            raise ValueError(f"variances must be four non-negative numbers, got {self.variances}")
        if self.count < 1:
            raise ValueError("proposal count must be at least 1")
        object.__setattr__(self, "variances", variances)


@dataclass(frozen=True)
class HpsParams:
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        thresholds = tuple(float(t) for t in self.thresholds)
        if not thresholds:
            raise ValueError("at least one threshold is required")
        if any(not 0.0 < t <= 1.0 for t in thresholds):
            raise ValueError(f"thresholds must lie in (0, 1], got {thresholds}")
        if any(a <= b for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError(f"thresholds must be strictly descending, got {thresholds}")
        object.__setattr__(self, "thresholds", thresholds)


def sample_proposal_array(params: SamplerParams, rng_seed, frame_w: float,
                          frame_h: float) -> np.ndarray:
    """Draw ``params.count`` proposals as an (n, 4) center-form array.

    ``rng_seed`` is anything :func:`numpy.random.default_rng` accepts, so a
    ``(seed, frame_index)`` pair gives an independent stream per frame.
    Sizes are floored at 2 px and every proposal is clipped to the frame.
    """
    if frame_w <= 0 or frame_h <= 0:
        raise ValueError("frame dimensions must be positive")
    rng = np.random.default_rng(rng_seed)
    draws = rng.normal(size=(params.count, 4))
    draws *= np.sqrt(np.asarray(params.variances))
    draws += params.mean.as_array()

    cx = np.clip(draws[:, 0], 1.0, frame_w - 1.0)
    cy = np.clip(draws[:, 1], 1.0, frame_h - 1.0)
    w = np.maximum(draws[:, 2], MIN_PROPOSAL_SIDE)
    h = np.maximum(draws[:, 3], MIN_PROPOSAL_SIDE)
    x1 = np.maximum(cx - w / 2.0, 0.0)
    x2 = np.minimum(cx + w / 2.0, float(frame_w))
    y1 = np.maximum(cy - h / 2.0, 0.0)
    y2 = np.minimum(cy + h / 2.0, float(frame_h))
    # untouched rows keep their exact draw so unclamped statistics are unbiased
    inside = (cx - w / 2.0 >= 0.0) & (cx + w / 2.0 <= frame_w) & \
             (cy - h / 2.0 >= 0.0) & (cy + h / 2.0 <= frame_h)
    out = np.column_stack([(x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1])
    out[inside] = np.column_stack([cx, cy, w, h])[inside]
    return out


def sample_proposals(params: SamplerParams, rng_seed, frame_w: float,
                     frame_h: float) -> list[BoundingBox]:
    return [BoundingBox(*row) for row in sample_proposal_array(params, rng_seed, frame_w, frame_h)]


@dataclass(frozen=True)
class Selection:
    """Result of hierarchical selection.

    ``level`` is the 1-based index of the threshold that produced a
    non-empty set, or ``None`` when no level agreed and every detection was
    passed through.
    """

    qualified: list[Detection]
    level: int | None
    best_iou: np.ndarray

    def __iter__(self):
        # allows ``qualified, level = hierarchical_select(...)``
        return iter((self.qualified, self.level))


def hierarchical_select(tps, detections: Sequence[Detection],
                        params: HpsParams = HpsParams()) -> Selection:
    """Keep detections that agree with at least one proposal, strictest level first.

    At level k a detection qualifies when its best IoU over all proposals is
    strictly greater than ``thresholds[k-1]``. The first non-empty level wins.
    When every level is empty, all detections pass through with level None.
    """
    tps_array = tps if isinstance(tps, np.ndarray) else boxes_to_array(tps)
    detections = list(detections)
    best = kernels.max_iou(tps_array, boxes_to_array(detections))
    for level, threshold in enumerate(params.thresholds, start=1):
        keep = [d for d, b in zip(detections, best) if b > threshold]
        if keep:
            return Selection(keep, level, best)
    return Selection(detections, None, best)
