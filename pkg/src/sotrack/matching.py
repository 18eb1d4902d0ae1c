"""Class-consistency filtering and Fourier-domain cosine similarity matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sotrack.errors import ZeroNorm
from sotrack.geometry import Detection, Patch
from sotrack.verification import LbpHistogram, lbp_histogram


def fourier_embed(patch: Patch) -> np.ndarray:
    """Real and imaginary parts of the per-channel 2-D DFT, concatenated.

    The result has length ``6 * S * S``: real parts of the R, G, B spectra,
    then the imaginary parts in the same channel order.
    """
    pixels = patch.pixels if isinstance(patch, Patch) else np.asarray(patch)
    spectrum = np.fft.fft2(pixels.astype(np.float64), axes=(0, 1))
    spectrum = np.moveaxis(spectrum, 2, 0)
    return np.concatenate([spectrum.real.ravel(), spectrum.imag.ravel()])


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroNorm("cosine similarity of a zero-norm embedding is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class TargetTemplate:
    """Appearance model of the tracked target.

    ``context`` is the padded search-window patch around ``patch.source_box``
    in the frame the template was taken from; the correlation filter trains
    on it. Build instances through :meth:`from_patch` so the derived fields
    stay coherent with ``patch``.
    """

    patch: Patch
    embedding: np.ndarray
    lbp_hist: LbpHistogram
    class_label: int
    context: Patch | None = None

    @classmethod
    def from_patch(cls, patch: Patch, class_label: int, context: Patch | None = None) -> "TargetTemplate":
        embedding = fourier_embed(patch)
        embedding.setflags(write=False)
        return cls(patch, embedding, lbp_histogram(patch), int(class_label), context)

    def __eq__(self, other):
        if not isinstance(other, TargetTemplate):
            return NotImplemented
        return (self.patch == other.patch and self.class_label == other.class_label
                and self.lbp_hist == other.lbp_hist
                and np.array_equal(self.embedding, other.embedding)
                and self.context == other.context)

    __hash__ = None


def class_filter(candidates: Sequence[Detection], target_class: int) -> list[Detection]:
    return [c for c in candidates if c.class_label == target_class]


def cosine_score(template: TargetTemplate, candidate: Patch) -> float:
    return cosine(template.embedding, fourier_embed(candidate))


def select_by_similarity(template: TargetTemplate,
                         filtered: Sequence[tuple[Detection, Patch]]) -> tuple[Detection, float]:
    """Candidate with the highest cosine score; the earliest one wins ties.

    Candidates whose embedding has zero norm are skipped; ZeroNorm is raised
    only when none are left.
    """
    if not filtered:
        raise ValueError("select_by_similarity needs at least one candidate")
    best = None
    best_score = -np.inf
    for detection, patch in filtered:
        try:
            score = cosine_score(template, patch)
        except ZeroNorm:
            continue
        if score > best_score:
            best, best_score = detection, score
    if best is None:
        raise ZeroNorm("every candidate patch has a zero-norm embedding")
    return best, best_score


def update_template(template: TargetTemplate, winner_patch: Patch,
                    context: Patch | None = None) -> TargetTemplate:
    """Replace the template wholesale with the latest tracked patch."""
    return TargetTemplate.from_patch(winner_patch, template.class_label, context)
