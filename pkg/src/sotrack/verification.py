"""Long-term presence verification.

Appearance is summarised by a 256-bin LBP histogram; the chi-square distance
between the template histogram and each tracked patch is compared against
its running mean since the last appearance. Positive excursions above a
threshold declare the target absent, after which the positional sampling
variances are doubled per absent frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from sotrack import kernels
from sotrack.errors import BinMismatch, DegeneratePatch
from sotrack.geometry import Patch, to_gray
from sotrack.proposals import SamplerParams

LBP_BINS = 256


@dataclass(frozen=True, eq=False)
class LbpHistogram:
    bins: np.ndarray

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.float64)
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    @property
    def n_bins(self) -> int:
        return self.bins.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LbpHistogram):
            return NotImplemented
        return np.array_equal(self.bins, other.bins)

    __hash__ = None


def lbp_histogram(patch) -> LbpHistogram:
    """L1-normalized histogram of LBP codes over the interior pixels.

    Accepts a :class:`Patch` or a raw (H, W) / (H, W, 3) array.
    """
    pixels = patch.pixels if isinstance(patch, Patch) else np.asarray(patch)
    gray = to_gray(pixels) if pixels.ndim == 3 else np.asarray(pixels, dtype=np.float64)
    if gray.shape[0] < 3 or gray.shape[1] < 3:
        raise DegeneratePatch(f"LBP needs at least 3x3 pixels, got {gray.shape[0]}x{gray.shape[1]}")
    counts = kernels.lbp_counts(np.ascontiguousarray(gray))
    return LbpHistogram(counts / counts.sum())


def chi_square(a: LbpHistogram, b: LbpHistogram) -> float:
    """Sum of (a_i - b_i)^2 / (a_i + b_i); empty bins contribute nothing."""
    if a.n_bins != b.n_bins:
        raise BinMismatch(f"{a.n_bins} bins vs {b.n_bins} bins")
    total = a.bins + b.bins
    diff = a.bins - b.bins
    nonzero = total > 0
    return float(np.sum(diff[nonzero] ** 2 / total[nonzero]))


@dataclass
class VerificationState:
    """Mutable presence bookkeeping owned by one tracker."""

    chi_history: list[float] = field(default_factory=list)
    present: bool = True
    absent_streak: int = 0
    variance_scale: float = 1.0

    def running_mean(self) -> float | None:
        if not self.chi_history:
            return None
        return math.fsum(self.chi_history) / len(self.chi_history)


def deviation(state: VerificationState, chi_t: float) -> float:
    """Verification score without touching the history (0 on an empty history)."""
    mean = state.running_mean()
    return 0.0 if mean is None else chi_t - mean


def verification_score(state: VerificationState, chi_t: float) -> float:
    """Score ``chi_t`` against the running mean, then append it to the history."""
    v_t = deviation(state, chi_t)
    state.chi_history.append(chi_t)
    return v_t


def presence_update(state: VerificationState, v_t: float | None, psr=None, *,
                    tau_v: float, psr_min: float | None = None,
                    gated: bool = True) -> tuple[VerificationState, bool]:
    """Threshold one frame's verification score.

    ``gated`` is False for frames decided by a spatially-agreed similarity
    match; those never change presence. Otherwise the target is declared
    absent when ``v_t > tau_v`` or, if a PSR floor is configured, when the
    correlation peak is weaker than ``psr_min``.
    """
    if not gated or not state.present:
        return state, state.present
    psr_value = getattr(psr, "value", psr)
    weak_peak = psr_min is not None and psr_value is not None and psr_value < psr_min
    if (v_t is not None and v_t > tau_v) or weak_peak:
        mark_absent(state)
    return state, state.present


def mark_absent(state: VerificationState) -> None:
    state.present = False
    state.absent_streak = 0


def mark_reappeared(state: VerificationState, chi_t: float) -> None:
    """Reset bookkeeping at an appearance frame; its chi-square anchors the new mean."""
    state.present = True
    state.absent_streak = 0
    state.variance_scale = 1.0
    state.chi_history = [chi_t]


def note_absent_frame(state: VerificationState, frame_w: float, frame_h: float,
                      base_variances) -> None:
    """Advance the absence streak and the resulting (capped) variance multiplier."""
    state.absent_streak += 1
    cap = max(_variance_cap(frame_w, base_variances[0]), _variance_cap(frame_h, base_variances[1]))
    state.variance_scale = min(2.0 ** state.absent_streak, cap)


def _variance_cap(extent: float, base: float) -> float:
    if base <= 0:
        return 1.0
    return max(1.0, (extent / 6.0) ** 2 / base)


def expand_search(state: VerificationState, base: SamplerParams, frame_w: float,
                  frame_h: float) -> SamplerParams:
    """Scale the positional variances by ``2**absent_streak``.

    Each positional variance is capped so that its ``+-3 sigma`` band spans
    the frame extent; size variances are left unchanged.
    """
    var_x, var_y, var_w, var_h = base.variances
    if state.present or state.absent_streak == 0:
        return base
    factor = 2.0 ** state.absent_streak
    var_x = min(var_x * factor, max(var_x, (frame_w / 6.0) ** 2))
    var_y = min(var_y * factor, max(var_y, (frame_h / 6.0) ** 2))
    return replace(base, variances=(var_x, var_y, var_w, var_h))
