"""Synthetic scenarios: rendered frames, ground truth and noisy detections.

A scenario moves one textured target along linearly interpolated waypoints
over a low-contrast background, draws static distractors behind it, and can
hide the target on scripted intervals (optionally under an occluder). The
detector surrogate jitters ground truth, drops detections, corrupts labels
and adds false positives, all from one seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from sotrack.errors import InvalidScript
from sotrack.geometry import BoundingBox, Detection, Frame, clamp_box, iou

CLASS_NAMES = ("person", "car", "bicycle", "dog", "ball")
TEXTURE_KINDS = ("noise", "checker", "gradient", "uniform")


def class_id(name: str) -> int:
    return CLASS_NAMES.index(name)


def class_name(label: int) -> str:
    return CLASS_NAMES[label] if 0 <= label < len(CLASS_NAMES) else str(label)


@dataclass(frozen=True)
class Texture:
    kind: str = "noise"
    seed: int = 0
    cells: int = 8

    def __post_init__(self):
        if self.kind not in TEXTURE_KINDS:
            raise InvalidScript(f"unknown texture kind {self.kind!r}")
        if self.cells < 1:
            raise InvalidScript("texture cells must be positive")

    def palette(self) -> np.ndarray:
        """(cells, cells, 3) float color table indexed by normalized coordinates."""
        rng = np.random.default_rng(self.seed)
        n = self.cells
        if self.kind == "noise":
            return rng.integers(0, 256, size=(n, n, 3)).astype(np.float64)
        if self.kind == "checker":
            a, b = rng.integers(0, 256, size=(2, 3)).astype(np.float64)
            parity = (np.add.outer(np.arange(n), np.arange(n)) % 2)[..., None]
            return np.where(parity == 0, a, b)
        if self.kind == "gradient":
            lo, hi = rng.integers(0, 256, size=(2, 3)).astype(np.float64)
            ramp = (np.add.outer(np.arange(n), np.arange(n)) / max(2 * n - 2, 1))[..., None]
            return lo + (hi - lo) * ramp
        return np.broadcast_to(rng.integers(0, 256, size=3).astype(np.float64), (n, n, 3)).copy()


@dataclass(frozen=True)
class Waypoint:
    frame: int
    cx: float
    cy: float
    w: float
    h: float


@dataclass(frozen=True)
class DistractorSpec:
    count: int
    class_label: int
    texture: Texture = Texture("noise", 1)
    w: float = 0.0  # 0 means: same size as the target's first waypoint
    h: float = 0.0


@dataclass(frozen=True)
class DetectorNoise:
    center_jitter: float = 0.0
    size_jitter: float = 0.0
    miss_prob: float = 0.0
    fp_rate: float = 0.0
    wrong_class_rate: float = 0.0

    def __post_init__(self):
        if self.center_jitter < 0 or self.size_jitter < 0 or self.fp_rate < 0:
            raise InvalidScript("jitter and false-positive rate must be non-negative")
        if not (0.0 <= self.miss_prob <= 1.0 and 0.0 <= self.wrong_class_rate <= 1.0):
            raise InvalidScript("probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class ScenarioScript:
    width: int
    height: int
    length: int
    waypoints: tuple[Waypoint, ...]
    target_class: int = 0
    target_texture: Texture = Texture("noise", 0, 8)
    background: Texture = Texture("noise", 99, 20)
    background_contrast: float = 0.15
    hidden: tuple[tuple[int, int], ...] = ()  # inclusive frame intervals
    occluder: bool = False
    distractors: tuple[DistractorSpec, ...] = ()
    max_distractor_iou: float = 0.0
    noise: DetectorNoise = DetectorNoise()
    n_classes: int = len(CLASS_NAMES)
    rng_seed: int = 0

    def validate(self) -> None:
        if self.width < 8 or self.height < 8 or self.length < 1:
            raise InvalidScript("frame must be at least 8x8 and length positive")
        if not self.waypoints:
            raise InvalidScript("at least one waypoint is required")
        frames = [w.frame for w in self.waypoints]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise InvalidScript("waypoint frames must be strictly increasing")
        if any(w.w <= 0 or w.h <= 0 for w in self.waypoints):
            raise InvalidScript("waypoint sizes must be positive")
        for start, end in self.hidden:
            if start > end or start < 0:
                raise InvalidScript(f"bad hidden interval {start}-{end}")
        if not 0 <= self.target_class < self.n_classes:
            raise InvalidScript("target class outside the label table")
        if not 0.0 <= self.background_contrast <= 1.0:
            raise InvalidScript("background contrast must lie in [0, 1]")
        for box in self.trajectory():
            clamped = clamp_box(box, self.width, self.height)
            if clamped.w <= 0 or clamped.h <= 0:
                raise InvalidScript(f"target box {box} leaves the frame")

    def trajectory(self) -> list[BoundingBox]:
        """Interpolated target box for every frame (held constant outside the waypoints)."""
        frames = np.array([w.frame for w in self.waypoints], dtype=np.float64)
        values = np.array([[w.cx, w.cy, w.w, w.h] for w in self.waypoints], dtype=np.float64)
        t = np.arange(self.length, dtype=np.float64)
        cols = [np.interp(t, frames, values[:, k]) for k in range(4)]
        return [BoundingBox(*row) for row in zip(*cols)]

    def visibility(self) -> list[bool]:
        vis = [True] * self.length
        for start, end in self.hidden:
            for t in range(start, min(end, self.length - 1) + 1):
                vis[t] = False
        return vis


@dataclass
class Sequence:
    """Rendered scenario."""

    frames: list[Frame]
    gt_boxes: list[BoundingBox]
    gt_visibility: list[bool]
    distractor_boxes: list[tuple[BoundingBox, int]] = field(default_factory=list)
    script: ScenarioScript | None = None

    def __len__(self):
        return len(self.frames)


def _paint(canvas: np.ndarray, box: BoundingBox, palette: np.ndarray) -> None:
    height, width = canvas.shape[:2]
    x1, y1, x2, y2 = box.corners()
    cols = np.arange(max(0, int(np.floor(x1))), min(width, int(np.ceil(x2))))
    rows = np.arange(max(0, int(np.floor(y1))), min(height, int(np.ceil(y2))))
    cols = cols[(cols + 0.5 >= x1) & (cols + 0.5 < x2)]
    rows = rows[(rows + 0.5 >= y1) & (rows + 0.5 < y2)]
    if cols.size == 0 or rows.size == 0:
        return
    n = palette.shape[0]
    u = np.minimum(((cols + 0.5 - x1) / box.w * n).astype(np.intp), n - 1)
    v = np.minimum(((rows + 0.5 - y1) / box.h * n).astype(np.intp), n - 1)
    canvas[rows[:, None], cols[None, :]] = palette[v[:, None], u[None, :]].astype(np.uint8)


def _background(script: ScenarioScript) -> np.ndarray:
    palette = script.background.palette()
    full = BoundingBox(script.width / 2.0, script.height / 2.0, script.width, script.height)
    canvas = np.zeros((script.height, script.width, 3), dtype=np.uint8)
    _paint(canvas, full, palette)
    mixed = 128.0 + script.background_contrast * (canvas.astype(np.float64) - 128.0)
    return np.clip(np.round(mixed), 0, 255).astype(np.uint8)


def place_distractors(script: ScenarioScript) -> list[tuple[BoundingBox, int, Texture]]:
    """Seeded static placement keeping each distractor's IoU with the target bounded."""
    rng = np.random.default_rng([script.rng_seed, 1])
    target = [b for b, v in zip(script.trajectory(), script.visibility())] or []
    first = script.waypoints[0]
    placed = []
    for spec in script.distractors:
        w = spec.w or first.w
        h = spec.h or first.h
        for _ in range(spec.count):
            for _attempt in range(2000):
                cx = rng.uniform(w / 2.0, script.width - w / 2.0)
                cy = rng.uniform(h / 2.0, script.height - h / 2.0)
                box = BoundingBox(cx, cy, w, h)
                if all(iou(box, tb) <= script.max_distractor_iou for tb in target):
                    placed.append((box, spec.class_label, spec.texture))
                    break
            else:
                raise InvalidScript("cannot place distractor without overlapping the target path")
    return placed


def render(script: ScenarioScript) -> Sequence:
    """Deterministically render every frame of ``script``."""
    script.validate()
    boxes = script.trajectory()
    visible = script.visibility()
    distractors = place_distractors(script)
    for dbox, _, _ in distractors:
        for tb in boxes:
            if iou(dbox, tb) > script.max_distractor_iou:
                raise InvalidScript("distractor overlaps the target beyond max_distractor_iou")
    base = _background(script)
    for dbox, _, texture in distractors:
        _paint(base, dbox, texture.palette())
    target_palette = script.target_texture.palette()
    occluder_palette = np.full((1, 1, 3), 64.0)
    frames = []
    for t, (box, vis) in enumerate(zip(boxes, visible)):
        canvas = base.copy()
        if vis:
            _paint(canvas, box, target_palette)
        elif script.occluder:
            _paint(canvas, box.scaled(1.2), occluder_palette)
        frames.append(Frame(t, canvas))
    return Sequence(frames, boxes, visible, [(b, c) for b, c, _ in distractors], script)


def _jitter(rng, box: BoundingBox, noise: DetectorNoise) -> BoundingBox:
    dc = rng.normal(0.0, 1.0, size=2) * noise.center_jitter
    ds = rng.normal(0.0, 1.0, size=2) * noise.size_jitter
    return BoundingBox(box.cx + dc[0], box.cy + dc[1],
                       max(box.w + ds[0], 2.0), max(box.h + ds[1], 2.0))


def _other_class(rng, label: int, n_classes: int) -> int:
    if n_classes < 2:
        return label
    other = int(rng.integers(0, n_classes - 1))
    return other if other < label else other + 1


def synthesize_detections(gt_boxes, gt_visibility, noise: DetectorNoise, rng_seed: int,
                          target_class: int = 0, frame_size: tuple[int, int] | None = None,
                          distractors=(), n_classes: int = len(CLASS_NAMES)) -> list[list[Detection]]:
    """Per-frame detector output for the target, distractors and false positives.

    ``distractors`` is a list of ``(box, class_label)`` static objects; false
    positives need ``frame_size`` and are sized like the current target.
    """
    rng = np.random.default_rng(rng_seed)
    out = []
    for box, vis in zip(gt_boxes, gt_visibility):
        frame_dets = []
        if vis and rng.random() >= noise.miss_prob:
            label = target_class
            if rng.random() < noise.wrong_class_rate:
                label = _other_class(rng, target_class, n_classes)
            frame_dets.append(Detection(_jitter(rng, box, noise), label, float(rng.uniform(0.5, 1.0))))
        for dbox, dlabel in distractors:
            if rng.random() >= noise.miss_prob:
                frame_dets.append(Detection(_jitter(rng, dbox, noise), dlabel, float(rng.uniform(0.5, 1.0))))
        if noise.fp_rate > 0:
            if frame_size is None:
                raise ValueError("false positives need frame_size")
            width, height = frame_size
            for _ in range(int(rng.poisson(noise.fp_rate))):
                w = box.w * rng.uniform(0.5, 1.5)
                h = box.h * rng.uniform(0.5, 1.5)
                fp = BoundingBox(rng.uniform(0, width), rng.uniform(0, height), w, h)
                frame_dets.append(Detection(fp, int(rng.integers(0, n_classes)), float(rng.uniform(0.0, 1.0))))
        order = rng.permutation(len(frame_dets))
        out.append([frame_dets[i] for i in order])
    return out


def detections_for(seq: Sequence) -> list[list[Detection]]:
    script = seq.script
    return synthesize_detections(seq.gt_boxes, seq.gt_visibility, script.noise, script.rng_seed,
                                 script.target_class, (script.width, script.height),
                                 seq.distractor_boxes, script.n_classes)


# -- scenario presets -------------------------------------------------------

def _waypoint(frame, cx, cy, w, h) -> Waypoint:
    # six decimals, the precision of the scenario file format
    return Waypoint(frame, *(round(float(v), 6) for v in (cx, cy, w, h)))


def _random_path(rng, width, height, length, size, speed, scale_jitter=0.0):
    """Waypoints bouncing between random points at roughly ``speed`` px/frame."""
    w0, h0 = size
    margin_x, margin_y = w0, h0
    points = []
    frame = 0
    pos = np.array([rng.uniform(margin_x, width - margin_x), rng.uniform(margin_y, height - margin_y)])
    scale = 1.0
    points.append(_waypoint(0, pos[0], pos[1], w0, h0))
    while frame < length - 1:
        nxt = np.array([rng.uniform(margin_x, width - margin_x), rng.uniform(margin_y, height - margin_y)])
        gap = max(int(round(np.linalg.norm(nxt - pos) / speed)), 1)
        frame = min(frame + gap, length - 1)
        if scale_jitter:
            scale = float(np.clip(scale * rng.uniform(1 - scale_jitter, 1 + scale_jitter), 0.7, 1.4))
        points.append(_waypoint(frame, nxt[0], nxt[1], w0 * scale, h0 * scale))
        pos = nxt
    return tuple(points)


def preset(name: str, seed: int = 0) -> ScenarioScript:
    """Named scenario families used by the tests and the CLI.

    ``clean``    noiseless detections, slow motion, other-class distractors.
    ``default``  ~40 detections per frame: jittered target, same-class
                 distractors and false positives; moderate motion with scale drift.
    ``ablation`` fast small target with 20% missed detections.
    ``exit``     long-term scenario with two scripted disappearances.
    """
    rng = np.random.default_rng([seed, 7])
    width, height, length = 320, 240, 200
    texture = Texture("noise", seed + 1000, 8)
    if name == "clean":
        size = (40.0, 40.0)
        return ScenarioScript(width, height, length, _random_path(rng, width, height, length, size, 1.5),
                              target_class=0, target_texture=texture,
                              distractors=(DistractorSpec(3, 1, Texture("noise", seed + 2000, 8)),),
                              rng_seed=seed)
    if name == "default":
        size = (36.0, 36.0)
        noise = DetectorNoise(center_jitter=1.0, size_jitter=1.0, miss_prob=0.05, fp_rate=20.0,
                              wrong_class_rate=0.02)
        distractors = (DistractorSpec(10, 0, Texture("noise", seed + 2000, 8)),
                       DistractorSpec(9, 1, Texture("checker", seed + 3000, 4)))
        return ScenarioScript(width, height, length,
                              _random_path(rng, width, height, length, size, 2.0, scale_jitter=0.15),
                              target_class=0, target_texture=texture, distractors=distractors,
                              noise=noise, rng_seed=seed)
    if name == "ablation":
        size = (24.0, 24.0)
        noise = DetectorNoise(center_jitter=0.5, size_jitter=0.5, miss_prob=0.2)
        distractors = (DistractorSpec(4, 0, Texture("noise", seed + 2000, 8)),)
        return ScenarioScript(width, height, length, _random_path(rng, width, height, length, size, 14.0),
                              target_class=0, target_texture=texture, distractors=distractors,
                              noise=noise, rng_seed=seed)
    if name == "exit":
        length = 240
        size = (36.0, 36.0)
        noise = DetectorNoise(center_jitter=1.0, size_jitter=1.0, miss_prob=0.05, fp_rate=4.0)
        distractors = (DistractorSpec(4, 1, Texture("checker", seed + 3000, 4)),)
        first = int(rng.integers(50, 80))
        second = int(rng.integers(140, 170))
        hidden = ((first, first + int(rng.integers(10, 25))), (second, second + int(rng.integers(10, 25))))
        return ScenarioScript(width, height, length, _random_path(rng, width, height, length, size, 1.5),
                              target_class=0, target_texture=texture, distractors=distractors,
                              hidden=hidden, occluder=bool(seed % 2), noise=noise, rng_seed=seed)
    raise KeyError(f"unknown preset {name!r}; choose from clean, default, ablation, exit")


def with_noise(script: ScenarioScript, **changes) -> ScenarioScript:
    return replace(script, noise=replace(script.noise, **changes))
