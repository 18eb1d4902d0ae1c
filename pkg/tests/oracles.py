"""Brute-force reference implementations written directly from the metric definitions."""

from __future__ import annotations


def box_iou(a, b):
    """IoU from corner coordinates, loop-free scalar arithmetic."""
    ax1, ay1, ax2, ay2 = a.cx - a.w / 2, a.cy - a.h / 2, a.cx + a.w / 2, a.cy + a.h / 2
    bx1, by1, bx2, by2 = b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2
    iw = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    ih = max(0.0, min(ay2, by2) - max(ay1, by1))
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union if union > 0 else 0.0


def st_oracle(pred, gt, visible):
    """(accuracy, robustness, tc, success list) over frames 2..N."""
    ious = []
    for p, g, v in list(zip(pred, gt, visible))[1:]:
        if not v or g is None:
            continue
        ious.append(0.0 if p is None else box_iou(p, g))
    n = len(ious)
    if n == 0:
        return 0.0, 0.0, 0.0, [0.0] * 21
    good = [x for x in ious if x > 0]
    accuracy = sum(good) / len(good) if good else 0.0
    robustness = sum(1 for x in ious if x == 0) / n
    best = 0
    for i in range(n):
        j = i
        while j < n and ious[j] > 0:
            j += 1
        best = max(best, j - i)
    success = [sum(1 for x in ious if x > round(0.05 * k, 2)) / n for k in range(21)]
    return accuracy, robustness, best / n, success


def lt_oracle(pred, gt, visible, cert, tau):
    """(precision, recall, F) at one certainty threshold over frames 2..N."""
    num_p = den_p = num_r = den_r = 0.0
    for p, g, v, c in list(zip(pred, gt, visible, cert))[1:]:
        vis = bool(v) and g is not None
        overlap = box_iou(p, g) if (p is not None and vis) else 0.0
        if p is not None and c >= tau:
            num_p += overlap
            den_p += 1
            if vis:
                num_r += overlap
        if vis:
            den_r += 1
    precision = num_p / den_p if den_p else 0.0
    recall = num_r / den_r if den_r else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f
