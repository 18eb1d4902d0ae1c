# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_pykernels``.

Arithmetic is written in the same order as the numpy fallback so that both
backends agree bit for bit.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline double _iou(double acx, double acy, double aw, double ah,
                        double bcx, double bcy, double bw, double bh) noexcept nogil:
    cdef double ax1 = acx - aw / 2.0, ay1 = acy - ah / 2.0
    cdef double ax2 = acx + aw / 2.0, ay2 = acy + ah / 2.0
    cdef double bx1 = bcx - bw / 2.0, by1 = bcy - bh / 2.0
    cdef double bx2 = bcx + bw / 2.0, by2 = bcy + bh / 2.0
    cdef double iw = (ax2 if ax2 < bx2 else bx2) - (ax1 if ax1 > bx1 else bx1)
    cdef double ih = (ay2 if ay2 < by2 else by2) - (ay1 if ay1 > by1 else by1)
    cdef double inter = 0.0
    if iw > 0.0 and ih > 0.0:
        inter = iw * ih
    cdef double union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    if union > 0.0:
        return inter / union
    return 0.0


def iou_matrix(a, b):
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 4)
    cdef const double[:, ::1] B = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t n = A.shape[0], m = B.shape[0], i, j
    out = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] O = out
    with nogil:
        for i in range(n):
            for j in range(m):
                O[i, j] = _iou(A[i, 0], A[i, 1], A[i, 2], A[i, 3],
                               B[j, 0], B[j, 1], B[j, 2], B[j, 3])
    return out


def max_iou(a, b):
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 4)
    cdef const double[:, ::1] B = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t n = A.shape[0], m = B.shape[0], i, j
    cdef double v, best
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] O = out
    if n == 0:
        return out
    with nogil:
        for j in range(m):
            best = -1.0
            for i in range(n):
                v = _iou(A[i, 0], A[i, 1], A[i, 2], A[i, 3],
                         B[j, 0], B[j, 1], B[j, 2], B[j, 3])
                if v > best:
                    best = v
            O[j] = best
    return out


def lbp_counts(gray):
    cdef const double[:, ::1] G = np.ascontiguousarray(gray, dtype=np.float64)
    cdef Py_ssize_t h = G.shape[0], w = G.shape[1], y, x
    cdef double c
    cdef int code
    counts = np.zeros(256, dtype=np.int64)
    cdef cnp.int64_t[::1] C = counts
    with nogil:
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                c = G[y, x]
                code = 0
                if G[y - 1, x - 1] >= c: code |= 1
                if G[y - 1, x] >= c: code |= 2
                if G[y - 1, x + 1] >= c: code |= 4
                if G[y, x + 1] >= c: code |= 8
                if G[y + 1, x + 1] >= c: code |= 16
                if G[y + 1, x] >= c: code |= 32
                if G[y + 1, x - 1] >= c: code |= 64
                if G[y, x - 1] >= c: code |= 128
                C[code] += 1
    return counts


def bilinear_sample(img, double x0, double y0, double w, double h, int side):
    cdef const cnp.uint8_t[:, :, ::1] I = np.ascontiguousarray(img, dtype=np.uint8)
    cdef Py_ssize_t H = I.shape[0], W = I.shape[1], nch = I.shape[2]
    cdef double step_x = w / side, step_y = h / side
    cdef double xs, ys, fx, fy, top, bottom, value
    cdef Py_ssize_t i, j, k, ix0, iy0, ix1, iy1
    out = np.empty((side, side, nch), dtype=np.uint8)
    cdef cnp.uint8_t[:, :, ::1] O = out
    with nogil:
        for i in range(side):
            ys = y0 + (i + 0.5) * step_y - 0.5
            if ys < 0.0:
                ys = 0.0
            if ys > H - 1.0:
                ys = H - 1.0
            iy0 = <Py_ssize_t>floor(ys)
            fy = ys - iy0
            iy1 = iy0 + 1 if iy0 + 1 < H - 1 else H - 1
            for j in range(side):
                xs = x0 + (j + 0.5) * step_x - 0.5
                if xs < 0.0:
                    xs = 0.0
                if xs > W - 1.0:
                    xs = W - 1.0
                ix0 = <Py_ssize_t>floor(xs)
                fx = xs - ix0
                ix1 = ix0 + 1 if ix0 + 1 < W - 1 else W - 1
                for k in range(nch):
                    top = (1.0 - fx) * I[iy0, ix0, k] + fx * I[iy0, ix1, k]
                    bottom = (1.0 - fx) * I[iy1, ix0, k] + fx * I[iy1, ix1, k]
                    value = floor((1.0 - fy) * top + fy * bottom + 0.5)
                    if value < 0.0:
                        value = 0.0
                    if value > 255.0:
                        value = 255.0
                    O[i, j, k] = <cnp.uint8_t>value
    return out
