"""Kernelized correlation filter used when no detection survives matching.

Features are single-channel: grayscale, mean-removed, Hann-windowed and
scaled to unit RMS. The filter is trained on the padded context window of
the current template and evaluated on a window of the same relative size
around the last tracked box. The search is translation-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from sotrack.errors import DegeneratePatch, FlatResponse
from sotrack.geometry import BoundingBox, Frame, Patch, sample_region, to_gray

PSR_EXCLUSION = 11


@dataclass(frozen=True)
class KcfParams:
    kernel_sigma: float = 0.5
    lam: float = 1e-4
    padding: float = 2.5
    label_factor: float = 0.1

    def __post_init__(self):
        if self.kernel_sigma <= 0 or self.lam <= 0:
            raise ValueError("kernel_sigma and lambda must be positive")
        if self.padding < 1.0:
            raise ValueError("padding must be at least 1")


@dataclass(frozen=True, eq=False)
class CorrelationFilter:
    alpha_hat: np.ndarray
    template_gray: np.ndarray
    template_hat: np.ndarray
    kernel_sigma: float
    lam: float
    target_size: tuple[float, float]


@dataclass(frozen=True)
class PsrScore:
    value: float
    peak_location: tuple[int, int]


@lru_cache(maxsize=8)
def hann2d(side: int) -> np.ndarray:
    window = np.outer(np.hanning(side), np.hanning(side))
    window.setflags(write=False)
    return window


def search_window(box: BoundingBox, padding: float) -> BoundingBox:
    return BoundingBox(box.cx, box.cy, box.w * padding, box.h * padding)


def features(patch: Patch) -> np.ndarray:
    """Windowed, zero-mean, unit-RMS grayscale features."""
    gray = to_gray(patch.pixels) / 255.0
    gray -= gray.mean()
    windowed = gray * hann2d(patch.side)
    rms = np.sqrt(np.mean(windowed ** 2))
    if rms < 1e-9:
        raise DegeneratePatch("windowed patch has zero variance")
    return windowed / rms


def gaussian_label(side: int, target_w: float, target_h: float, factor: float = 0.1) -> np.ndarray:
    """Regression target: 1 at the center bin, bandwidth ``factor * sqrt(w*h)``.

    ``target_w``/``target_h`` are the target extent in patch pixels.
    """
    sigma = factor * np.sqrt(target_w * target_h)
    offsets = np.arange(side) - side // 2
    return np.exp(-(offsets[:, None] ** 2 + offsets[None, :] ** 2) / (2.0 * sigma ** 2))


def gaussian_correlation(xf: np.ndarray, zf: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian kernel between ``z`` and every cyclic shift of ``x`` (spatial domain)."""
    n = xf.size
    xx = np.real(np.vdot(xf, xf)) / n
    zz = np.real(np.vdot(zf, zf)) / n
    xz = np.real(np.fft.ifft2(zf * np.conj(xf)))
    distance = np.maximum(0.0, (xx + zz - 2.0 * xz) / n)
    return np.exp(-distance / sigma ** 2)


def train_filter(patch: Patch, kernel_sigma: float = 0.5, lam: float = 1e-4,
                 padding: float = 2.5, label_factor: float = 0.1) -> CorrelationFilter:
    """Closed-form kernel ridge regression over all cyclic shifts of ``patch``.

    ``patch`` is a padded window: the target spans ``side / padding`` patch
    pixels along each axis, which fixes the label bandwidth.
    """
    side = patch.side
    x = features(patch)
    xf = np.fft.fft2(x)
    target = side / padding
    yf = np.fft.fft2(gaussian_label(side, target, target, label_factor))
    kf = np.fft.fft2(gaussian_correlation(xf, xf, kernel_sigma))
    alpha_hat = yf / (kf + lam)
    src = patch.source_box
    return CorrelationFilter(alpha_hat, x, xf, kernel_sigma, lam,
                             (src.w / padding, src.h / padding))


def response_map(filt: CorrelationFilter, search_patch: Patch) -> np.ndarray:
    try:
        z = features(search_patch)
    except DegeneratePatch as exc:
        raise FlatResponse("search window is uniform") from exc
    kzf = np.fft.fft2(gaussian_correlation(filt.template_hat, np.fft.fft2(z), filt.kernel_sigma))
    return np.real(np.fft.ifft2(filt.alpha_hat * kzf))


def peak_to_sidelobe(response: np.ndarray, exclusion: int = PSR_EXCLUSION) -> PsrScore:
    """PSR with an ``exclusion x exclusion`` window (wrapping) removed around the peak."""
    rows, cols = response.shape
    r, c = np.unravel_index(int(np.argmax(response)), response.shape)
    half = exclusion // 2
    mask = np.ones(response.shape, dtype=bool)
    mask[np.ix_((np.arange(r - half, r + half + 1) % rows),
                (np.arange(c - half, c + half + 1) % cols))] = False
    sidelobe = response[mask]
    std = sidelobe.std()
    if std < 1e-12:
        raise FlatResponse("sidelobe standard deviation is zero")
    return PsrScore(float((response[r, c] - sidelobe.mean()) / std), (int(r), int(c)))


def detect(filt: CorrelationFilter, search_patch: Patch):
    """Evaluate the filter on ``search_patch``.

    Returns ``(response, psr, (dx, dy))`` with the displacement expressed in
    source-frame pixels.
    """
    response = response_map(filt, search_patch)
    psr = peak_to_sidelobe(response)
    side = search_patch.side
    center = side // 2
    r, c = psr.peak_location
    dy = (r - center + side // 2) % side - side // 2
    dx = (c - center + side // 2) % side - side // 2
    src = search_patch.source_box
    return response, psr, (dx * src.w / side, dy * src.h / side)


def lsm_step(template, frame: Frame, last_box: BoundingBox,
             params: KcfParams = KcfParams()) -> tuple[BoundingBox, PsrScore]:
    """Translate ``last_box`` to the correlation peak found in ``frame``.

    The template must carry its padded ``context`` window. The returned box
    keeps the size of ``last_box``; its center is kept inside the frame.
    """
    if template.context is None:
        raise DegeneratePatch("template has no context window to train on")
    side = template.context.side
    filt = train_filter(template.context, params.kernel_sigma, params.lam,
                        params.padding, params.label_factor)
    search = sample_region(frame, search_window(last_box, params.padding), side)
    _, psr, (dx, dy) = detect(filt, search)
    cx = min(max(last_box.cx + dx, 0.0), float(frame.width))
    cy = min(max(last_box.cy + dy, 0.0), float(frame.height))
    return BoundingBox(cx, cy, last_box.w, last_box.h), psr
