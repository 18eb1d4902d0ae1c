"""Short-term and long-term evaluation.

Short-term: accuracy (mean IoU over frames with IoU > 0), robustness
(fraction of GT-visible frames with IoU = 0), tracking continuity (longest
run of IoU > 0 over GT-visible frames) and the success curve.

Long-term: precision / recall / F-score over prediction-certainty
thresholds, plus signed detection delays for visibility transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sotrack.errors import LengthMismatch
from sotrack.geometry import BoundingBox, iou

SUCCESS_THRESHOLDS = tuple(round(0.05 * i, 2) for i in range(21))
CERTAINTY_THRESHOLDS = tuple(round(0.01 * i, 2) for i in range(101))
EVENT_WINDOW = 30


@dataclass(frozen=True)
class StReport:
    accuracy: float
    robustness: float
    tc: float
    success_curve: tuple[tuple[float, float], ...]
    frames: int


@dataclass(frozen=True)
class LtReport:
    thresholds: tuple[float, ...]
    pr_curve: tuple[float, ...]
    re_curve: tuple[float, ...]
    f_curve: tuple[float, ...]
    f_max: float
    tau_star: float
    frames: int

    @property
    def precision(self) -> float:
        return self.pr_curve[self.thresholds.index(self.tau_star)]

    @property
    def recall(self) -> float:
        return self.re_curve[self.thresholds.index(self.tau_star)]


@dataclass(frozen=True)
class Event:
    kind: str  # "exit" or "entry"
    gt_frame: int
    delay: int | None  # None when missed

    @property
    def missed(self) -> bool:
        return self.delay is None


def f_score(precision: float, recall: float) -> float:
    total = precision + recall
    return 0.0 if total == 0 else 2.0 * precision * recall / total


def _boxes_of(outputs) -> list[BoundingBox | None]:
    return [o.box if hasattr(o, "box") else o for o in outputs]


def frame_ious(pred: Sequence[BoundingBox | None], gt: Sequence[BoundingBox | None],
               visible: Sequence[bool]) -> np.ndarray:
    """Per-frame IoU; 0 where either side has no box or GT is not visible."""
    out = np.zeros(len(gt), dtype=np.float64)
    for t, (p, g, vis) in enumerate(zip(pred, gt, visible)):
        if vis and p is not None and g is not None:
            out[t] = iou(p, g)
    return out


def _prepare(outputs, gt_boxes, gt_visibility, skip_first: bool):
    pred = _boxes_of(outputs)
    if len(pred) != len(gt_boxes):
        raise LengthMismatch(f"{len(pred)} outputs vs {len(gt_boxes)} ground-truth frames")
    if gt_visibility is None:
        gt_visibility = [g is not None for g in gt_boxes]
    if len(gt_visibility) != len(gt_boxes):
        raise LengthMismatch("visibility flags and ground-truth boxes differ in length")
    start = 1 if skip_first else 0
    visible = [bool(v) and g is not None for v, g in zip(gt_visibility, gt_boxes)]
    return pred[start:], list(gt_boxes[start:]), visible[start:], start


def st_metrics(outputs, gt_boxes, gt_visibility=None, skip_first: bool = True) -> StReport:
    """Short-term report over GT-visible frames (the initialization frame is skipped)."""
    pred, gt, visible, _ = _prepare(outputs, gt_boxes, gt_visibility, skip_first)
    ious = frame_ious(pred, gt, visible)[np.asarray(visible, dtype=bool)]
    n = len(ious)
    if n == 0:
        return StReport(0.0, 0.0, 0.0, tuple((th, 0.0) for th in SUCCESS_THRESHOLDS), 0)
    tracked = ious > 0.0
    accuracy = float(ious[tracked].mean()) if tracked.any() else 0.0
    robustness = float(np.count_nonzero(~tracked)) / n
    longest = run = 0
    for ok in tracked:
        run = run + 1 if ok else 0
        longest = max(longest, run)
    curve = tuple((th, float(np.count_nonzero(ious > th)) / n) for th in SUCCESS_THRESHOLDS)
    return StReport(accuracy, robustness, longest / n, curve, n)


def lt_metrics(outputs, gt_boxes, gt_visibility=None, certainties=None,
               skip_first: bool = True, thresholds=CERTAINTY_THRESHOLDS) -> LtReport:
    """Precision/recall/F over certainty thresholds.

    Precision averages IoU over frames with an emitted box whose certainty
    reaches the threshold (IoU 0 where GT is absent); recall sums the same
    IoUs over GT-visible frames and divides by their count.
    """
    if certainties is None:
        certainties = [o.certainty for o in outputs]
    if len(certainties) != len(outputs):
        raise LengthMismatch("certainties and outputs differ in length")
    pred, gt, visible, start = _prepare(outputs, gt_boxes, gt_visibility, skip_first)
    cert = np.asarray(certainties[start:], dtype=np.float64)
    emitted = np.array([p is not None for p in pred], dtype=bool)
    vis = np.asarray(visible, dtype=bool)
    ious = frame_ious(pred, gt, visible)
    n_visible = int(np.count_nonzero(vis))
    pr, re, fs = [], [], []
    for tau in thresholds:
        sel = emitted & (cert >= tau)
        n_sel = int(np.count_nonzero(sel))
        precision = float(ious[sel].sum()) / n_sel if n_sel else 0.0
        recall = float(ious[sel & vis].sum()) / n_visible if n_visible else 0.0
        pr.append(precision)
        re.append(recall)
        fs.append(f_score(precision, recall))
    best = int(np.argmax(fs))
    return LtReport(tuple(thresholds), tuple(pr), tuple(re), tuple(fs), fs[best],
                    thresholds[best], len(pred))


def _transitions(flags: Sequence[bool]) -> list[tuple[int, str]]:
    out = []
    for t in range(1, len(flags)):
        if flags[t] != flags[t - 1]:
            out.append((t, "entry" if flags[t] else "exit"))
    return out


def event_delays(presence: Sequence[bool], gt_visibility: Sequence[bool],
                 window: int = EVENT_WINDOW) -> list[Event]:
    """Signed offset from each GT visibility change to the nearest matching presence change.

    Positive delays mean the tracker reacted late. Events with no matching
    presence change within ``window`` frames are reported as missed.
    """
    presence = [bool(getattr(p, "present", p)) for p in presence]
    if len(presence) != len(gt_visibility):
        raise LengthMismatch("presence flags and visibility differ in length")
    tracker_events = _transitions(presence)
    events = []
    for frame, kind in _transitions(list(gt_visibility)):
        offsets = [t - frame for t, k in tracker_events if k == kind and abs(t - frame) <= window]
        delay = min(offsets, key=lambda d: (abs(d), -d)) if offsets else None
        events.append(Event(kind, frame, delay))
    return events
