"""Per-frame tracking state machine.

Each frame: sample proposals around the previous box, gate detections by
IoU agreement, keep the target class, pick the most similar candidate. With
no candidate left, fall back to the correlation filter. In long-term mode
the verification layer may declare the target absent, after which the
search widens every frame until a verified re-detection.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from sotrack.config import TrackerConfig
from sotrack.errors import DegenerateBox, DegeneratePatch, FlatResponse, SourceMismatch, ZeroNorm
from sotrack.geometry import BoundingBox, Detection, Frame, Patch, extract_patch, iou, sample_region
from sotrack.localsearch import lsm_step, search_window
from sotrack.matching import TargetTemplate, class_filter, cosine_score, select_by_similarity, update_template
from sotrack.proposals import SamplerParams, hierarchical_select, sample_proposal_array
from sotrack.verification import (VerificationState, chi_square, deviation, expand_search, lbp_histogram,
                                  mark_absent, mark_reappeared, note_absent_frame, presence_update)

log = logging.getLogger(__name__)


class Decision(str, enum.Enum):
    INIT = "INIT"
    SM = "SM"
    LSM = "LSM"
    ABSENT = "ABSENT"


@dataclass(frozen=True)
class TrackOutput:
    frame_index: int
    present: bool
    box: BoundingBox | None
    decided_by: Decision
    hps_level: int | None = None
    cosine: float | None = None
    psr: float | None = None
    v_t: float | None = None

    def __post_init__(self):
        absent = self.decided_by is Decision.ABSENT
        if (not self.present) != absent or (self.box is None) != absent:
            raise ValueError("present=false, box=None and decided_by=ABSENT must coincide")

    @property
    def certainty(self) -> float:
        return 1.0 if self.present else 0.0


@dataclass
class RunStats:
    input_counts: list[int] = field(default_factory=list)
    qualified_counts: list[int] = field(default_factory=list)
    fallback_frames: int = 0

    @property
    def mean_qualified(self) -> float:
        if not self.qualified_counts:
            return 0.0
        return sum(self.qualified_counts) / len(self.qualified_counts)

    @property
    def mean_input(self) -> float:
        if not self.input_counts:
            return 0.0
        return sum(self.input_counts) / len(self.input_counts)


class Tracker:
    """Sequential single-target tracker; one instance per sequence."""

    def __init__(self, config: TrackerConfig, template: TargetTemplate, box: BoundingBox,
                 frame_size: tuple[int, int]):
        self.config = config
        self.template = template
        self.box = box
        self.frame_size = frame_size
        self.verification = VerificationState(chi_history=[0.0])
        self.stats = RunStats()
        self._hps = config.hps
        self._kcf = config.kcf

    @property
    def target_class(self) -> int:
        return self.template.class_label

    @property
    def long_term(self) -> bool:
        return self.config.mode == "lt"

    def _build_template(self, frame: Frame, box: BoundingBox, patch: Patch | None = None) -> TargetTemplate:
        side = self.config.patch_side
        patch = patch if patch is not None else extract_patch(frame, box, side)
        context = sample_region(frame, search_window(box, self._kcf.padding), side)
        return update_template(self.template, patch, context)

    def step(self, frame: Frame, detections: Sequence[Detection]) -> TrackOutput:
        cfg = self.config
        width, height = self.frame_size
        if (frame.width, frame.height) != (width, height):
            raise SourceMismatch(f"frame {frame.index} is {frame.width}x{frame.height}, expected {width}x{height}")
        dets = [d for d in detections if d.objectness >= cfg.objectness_floor]

        params = SamplerParams(self.box, cfg.variances, cfg.num_proposals)
        if self.long_term and not self.verification.present:
            params = expand_search(self.verification, params, width, height)
        tps = sample_proposal_array(params, (cfg.rng_seed, frame.index), width, height)
        qualified, level = hierarchical_select(tps, dets, self._hps)
        candidates = class_filter(qualified, self.target_class)
        self.stats.input_counts.append(len(dets))
        self.stats.qualified_counts.append(len(qualified))
        if level is None:
            self.stats.fallback_frames += 1

        match = self._similarity_match(frame, candidates)
        if self.long_term and not self.verification.present:
            return self._search_while_absent(frame, match, level)
        if match is None:
            return self._local_search(frame, level)
        if level is None and cfg.use_lsm and cfg.arbitrate_fallback:
            return self._arbitrate(frame, match, level)
        return self._accept_match(frame, match, level)

    def _similarity_match(self, frame: Frame, candidates: list[Detection]):
        pairs = []
        for det in candidates:
            try:
                pairs.append((det, extract_patch(frame, det.box, self.config.patch_side)))
            except DegenerateBox:
                continue
        if not pairs:
            return None
        try:
            winner, score = select_by_similarity(self.template, pairs)
        except ZeroNorm:
            return None
        if self.config.tau_sim is not None and score < self.config.tau_sim:
            return None
        patch = next(p for d, p in pairs if d is winner)
        return winner, patch, score

    def _chi(self, patch: Patch) -> float:
        return chi_square(self.template.lbp_hist, lbp_histogram(patch))

    def _accept_match(self, frame: Frame, match, level) -> TrackOutput:
        det, patch, score = match
        v_t = None
        if self.long_term:
            chi = self._chi(patch)
            v_t = deviation(self.verification, chi)
            # a match without spatial agreement is verified like a local-search result
            _, present = presence_update(self.verification, v_t, tau_v=self.config.tau_v,
                                         gated=level is None)
            if not present:
                return self._declare_absent(frame, level, cosine=score, v_t=v_t)
            self.verification.chi_history.append(chi)
        self.template = self._build_template(frame, det.box, patch)
        self.box = det.box
        return TrackOutput(frame.index, True, det.box, Decision.SM, level, score, None, v_t)

    def _run_lsm(self, frame: Frame):
        box, psr = lsm_step(self.template, frame, self.box, self._kcf)
        return box, psr, extract_patch(frame, box, self.config.patch_side)

    def _local_search(self, frame: Frame, level) -> TrackOutput:
        if not self.config.use_lsm:
            return self._hold(frame, level)
        try:
            result = self._run_lsm(frame)
        except (FlatResponse, DegeneratePatch, DegenerateBox) as exc:
            log.debug("frame %d: local search failed: %s", frame.index, exc)
            if self.long_term:
                return self._declare_absent(frame, level)
            return self._hold(frame, level)
        return self._commit_lsm(frame, result, level)

    def _commit_lsm(self, frame: Frame, result, level) -> TrackOutput:
        box, psr, patch = result
        cosine = _safe_cosine(self.template, patch)
        v_t = None
        if self.long_term:
            chi = self._chi(patch)
            v_t = deviation(self.verification, chi)
            _, present = presence_update(self.verification, v_t, psr, tau_v=self.config.tau_v,
                                         psr_min=self.config.psr_min)
            if not present:
                return self._declare_absent(frame, level, cosine=cosine, psr=psr.value, v_t=v_t)
            self.verification.chi_history.append(chi)
        self.template = self._build_template(frame, box, patch)
        self.box = box
        return TrackOutput(frame.index, True, box, Decision.LSM, level, cosine, psr.value, v_t)

    def _arbitrate(self, frame: Frame, match, level) -> TrackOutput:
        """No proposal agreed with any detection: weigh the best match against local search.

        The match is kept when it overlaps the local-search box or when the
        correlation peak is too weak to trust; otherwise local search decides.
        """
        try:
            result = self._run_lsm(frame)
        except (FlatResponse, DegeneratePatch, DegenerateBox):
            return self._accept_match(frame, match, level)
        box, psr, _ = result
        psr_min = self.config.psr_min
        agrees = iou(match[0].box, box) > self._hps.thresholds[-1]
        if agrees or (psr_min is not None and psr.value < psr_min):
            return self._accept_match(frame, match, level)
        return self._commit_lsm(frame, result, level)

    def _hold(self, frame: Frame, level) -> TrackOutput:
        return TrackOutput(frame.index, True, self.box, Decision.LSM, level)

    def _declare_absent(self, frame: Frame, level, cosine=None, psr=None, v_t=None) -> TrackOutput:
        mark_absent(self.verification)
        return self._absent_output(frame, level, cosine, psr, v_t)

    def _absent_output(self, frame: Frame, level, cosine=None, psr=None, v_t=None) -> TrackOutput:
        width, height = self.frame_size
        note_absent_frame(self.verification, width, height, self.config.variances)
        return TrackOutput(frame.index, False, None, Decision.ABSENT, level, cosine, psr, v_t)

    def _search_while_absent(self, frame: Frame, match, level) -> TrackOutput:
        """Re-detection: accept a candidate only if it verifies against the pre-exit model."""
        tau_v = self.config.tau_v
        if match is not None:
            det, patch, score = match
            chi = self._chi(patch)
            v_t = deviation(self.verification, chi)
            if v_t <= tau_v:
                mark_reappeared(self.verification, chi)
                self.template = self._build_template(frame, det.box, patch)
                self.box = det.box
                return TrackOutput(frame.index, True, det.box, Decision.SM, level, score, None, v_t)
            return self._absent_output(frame, level, cosine=score, v_t=v_t)
        if not self.config.use_lsm:
            return self._absent_output(frame, level)
        try:
            box, psr = lsm_step(self.template, frame, self.box, self._kcf)
            patch = extract_patch(frame, box, self.config.patch_side)
        except (FlatResponse, DegeneratePatch, DegenerateBox):
            return self._absent_output(frame, level)
        chi = self._chi(patch)
        v_t = deviation(self.verification, chi)
        psr_min = self.config.psr_min
        if v_t <= tau_v and (psr_min is None or psr.value >= psr_min):
            cosine = _safe_cosine(self.template, patch)
            mark_reappeared(self.verification, chi)
            self.template = self._build_template(frame, box, patch)
            self.box = box
            return TrackOutput(frame.index, True, box, Decision.LSM, level, cosine, psr.value, v_t)
        return self._absent_output(frame, level, psr=psr.value, v_t=v_t)


def _safe_cosine(template: TargetTemplate, patch: Patch) -> float | None:
    try:
        return cosine_score(template, patch)
    except ZeroNorm:
        return None


def initialize(first_frame: Frame, gt_box: BoundingBox, target_class: int,
               config: TrackerConfig = TrackerConfig()) -> Tracker:
    """Build a tracker from the first-frame annotation."""
    if not gt_box.is_valid:
        raise DegenerateBox(f"initial box {gt_box} has no area")
    side = config.patch_side
    patch = extract_patch(first_frame, gt_box, side)
    context = sample_region(first_frame, search_window(gt_box, config.kcf_padding), side)
    template = TargetTemplate.from_patch(patch, target_class, context)
    return Tracker(config, template, gt_box, (first_frame.width, first_frame.height))


def infer_target_class(gt_box: BoundingBox, detections: Sequence[Detection]) -> int:
    """Class of the first-frame detection that overlaps the annotation best."""
    scored = [(iou(gt_box, d.box), -i, d.class_label) for i, d in enumerate(detections)]
    scored = [s for s in scored if s[0] > 0.0]
    if not scored:
        raise ValueError("no first-frame detection overlaps the initial box; specify the target class")
    return max(scored)[2]


def run_sequence(frames: Iterable[Frame], detections: Sequence[Sequence[Detection]],
                 gt_first: BoundingBox, config: TrackerConfig = TrackerConfig(),
                 target_class: int | None = None, tracker_out: list | None = None) -> list[TrackOutput]:
    """Initialize on the first frame and step through the rest.

    ``target_class`` defaults to the class inferred from the first frame's
    detections. Pass a list as ``tracker_out`` to receive the tracker (for
    its run statistics).
    """
    outputs: list[TrackOutput] = []
    tracker = None
    for position, frame in enumerate(frames):
        if frame.index != position:
            raise SourceMismatch(f"frame at position {position} has index {frame.index}")
        if position >= len(detections):
            raise SourceMismatch(f"no detections for frame {position}")
        if tracker is None:
            if target_class is None:
                target_class = infer_target_class(gt_first, detections[0])
            tracker = initialize(frame, gt_first, target_class, config)
            outputs.append(TrackOutput(frame.index, True, gt_first, Decision.INIT))
            continue
        outputs.append(tracker.step(frame, detections[position]))
    if len(outputs) != len(detections):
        raise SourceMismatch(f"{len(outputs)} frames but {len(detections)} detection lists")
    if tracker_out is not None:
        tracker_out.append(tracker)
    return outputs
