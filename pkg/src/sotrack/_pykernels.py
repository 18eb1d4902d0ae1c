"""Pure numpy implementations of the hot kernels.

Each function mirrors one in ``_ckernels.pyx`` operation for operation, so
both backends return bitwise-identical results.
"""

from __future__ import annotations

import numpy as np


def _corners(boxes: np.ndarray):
    half_w = boxes[:, 2] / 2.0
    half_h = boxes[:, 3] / 2.0
    return (boxes[:, 0] - half_w, boxes[:, 1] - half_h,
            boxes[:, 0] + half_w, boxes[:, 1] + half_h)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between center-form boxes ``a`` (n, 4) and ``b`` (m, 4)."""
    a = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 4)
    ax1, ay1, ax2, ay2 = (c[:, None] for c in _corners(a))
    bx1, by1, bx2, by2 = (c[None, :] for c in _corners(b))
    iw = np.minimum(ax2, bx2) - np.maximum(ax1, bx1)
    ih = np.minimum(ay2, by2) - np.maximum(ay1, by1)
    inter = np.where((iw > 0.0) & (ih > 0.0), iw * ih, 0.0)
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    out = np.zeros(inter.shape, dtype=np.float64)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def max_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each box in ``b``, its best IoU against any box in ``a``."""
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros(b.shape[0], dtype=np.float64)
    return iou_matrix(a, b).max(axis=0)


# clockwise from top-left; neighbor k contributes bit 2**k
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_counts(gray: np.ndarray) -> np.ndarray:
    """256-bin counts of radius-1, 8-neighbor LBP codes (ties set the bit)."""
    gray = np.asarray(gray, dtype=np.float64)
    h, w = gray.shape
    center = gray[1:h - 1, 1:w - 1]
    codes = np.zeros(center.shape, dtype=np.int64)
    for bit, (dy, dx) in enumerate(_OFFSETS):
        neighbor = gray[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx]
        codes |= (neighbor >= center).astype(np.int64) << bit
    return np.bincount(codes.ravel(), minlength=256).astype(np.int64)


def bilinear_sample(img: np.ndarray, x0: float, y0: float, w: float, h: float,
                    side: int) -> np.ndarray:
    """Resample the region with top-left ``(x0, y0)`` and size ``w x h`` to side x side.

    Sample points sit at output pixel centers; coordinates outside the raster
    replicate the nearest edge pixel.
    """
    img = np.ascontiguousarray(img, dtype=np.uint8)
    H, W = img.shape[:2]
    step_x = w / side
    step_y = h / side
    xs = x0 + (np.arange(side) + 0.5) * step_x - 0.5
    ys = y0 + (np.arange(side) + 0.5) * step_y - 0.5
    xs = np.minimum(np.maximum(xs, 0.0), W - 1.0)
    ys = np.minimum(np.maximum(ys, 0.0), H - 1.0)
    ix0 = np.floor(xs).astype(np.intp)
    iy0 = np.floor(ys).astype(np.intp)
    fx = (xs - ix0)[None, :, None]
    fy = (ys - iy0)[:, None, None]
    ix1 = np.minimum(ix0 + 1, W - 1)
    iy1 = np.minimum(iy0 + 1, H - 1)
    src = img.astype(np.float64)
    p00 = src[iy0[:, None], ix0[None, :]]
    p01 = src[iy0[:, None], ix1[None, :]]
    p10 = src[iy1[:, None], ix0[None, :]]
    p11 = src[iy1[:, None], ix1[None, :]]
    top = (1.0 - fx) * p00 + fx * p01
    bottom = (1.0 - fx) * p10 + fx * p11
    value = (1.0 - fy) * top + fy * bottom
    value = np.floor(value + 0.5)
    return np.clip(value, 0.0, 255.0).astype(np.uint8)
