"""On-disk formats: images, ground truth, detections, configs, results, scenarios.

Every text format is UTF-8, line oriented, with ``#`` comment lines and
blank lines allowed anywhere. Boxes are written in center form
``cx,cy,w,h``. Frame numbers on disk start at 1 (the first image is
``00000001.ppm``); in memory they start at 0. Writers use six decimals so
output is byte-stable.

Sequence directory layout::

    00000001.ppm 00000002.ppm ...   frames (or .png with Pillow installed)
    groundtruth.txt                 one line per frame
    detections.txt                  one line per detection
    scenario.txt                    optional, the script that generated it
"""

from __future__ import annotations

import dataclasses
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from sotrack.config import TrackerConfig
from sotrack.errors import ConfigError, InvalidScript, NegativeDimension, ParseError, ScoreOutOfRange, UnknownKey
from sotrack.geometry import BoundingBox, Detection, Frame
from sotrack.pipeline import Decision, TrackOutput
from sotrack.simulator import (DetectorNoise, DistractorSpec, ScenarioScript, Texture, Waypoint)

GROUNDTRUTH_FILE = "groundtruth.txt"
DETECTIONS_FILE = "detections.txt"
SCENARIO_FILE = "scenario.txt"
IMAGE_EXTENSIONS = (".ppm", ".png")
NONE_TOKEN = "-"
ABSENT_TOKEN = "absent"
_FRAME_NAME = re.compile(r"^(\d{8})\.(ppm|png)$")


def fmt(value: float) -> str:
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _write_text(path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _lines(path):
    """Yield ``(line_number, text)`` for non-blank, non-comment lines."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise ParseError("file not found", path) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read file: {exc}", path) from exc
    for number, text in enumerate(raw.split("\n"), start=1):
        text = text.rstrip("\r")
        stripped = text.strip()
        if stripped and not stripped.startswith("#"):
            yield number, text


def _fields(text: str, path, line: int, expected: int) -> list[tuple[str, int]]:
    """Split a comma-separated record into ``(token, column)`` pairs."""
    out, column = [], 1
    for token in text.split(","):
        lead = len(token) - len(token.lstrip())
        out.append((token.strip(), column + lead))
        column += len(token) + 1
    if len(out) != expected:
        raise ParseError(f"expected {expected} comma-separated fields, found {len(out)}", path, line, 1)
    return out


def _float(token: str, path, line: int, column: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"expected a number, found {token!r}", path, line, column) from None
    if not math.isfinite(value):
        raise ParseError(f"expected a finite number, found {token!r}", path, line, column)
    return value


def _int(token: str, path, line: int, column: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected an integer, found {token!r}", path, line, column) from None


def _box(tokens, path, line: int) -> BoundingBox:
    cx, cy, w, h = (_float(t, path, line, c) for t, c in tokens)
    for (token, column), value in zip(tokens[2:], (w, h)):
        if value < 0:
            raise NegativeDimension(f"box size must be non-negative, found {token}", path, line, column)
    return BoundingBox(cx, cy, w, h)


# -- images -----------------------------------------------------------------

def _ppm_header(data: bytes, path):
    """Parse ``P6 width height maxval``; returns the fields and the pixel offset."""
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ParseError("truncated PPM header", path)
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise ParseError(f"not a binary PPM (magic {tokens[0]!r})", path)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError("non-numeric PPM header field", path) from None
    if maxval != 255:
        raise ParseError(f"only 8-bit PPM is supported (maxval {maxval})", path)
    return width, height, pos + 1


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    width, height, offset = _ppm_header(data, path)
    size = width * height * 3
    if width < 1 or height < 1 or len(data) - offset < size:
        raise ParseError(f"PPM pixel data truncated ({len(data) - offset} of {size} bytes)", path)
    return np.frombuffer(data, dtype=np.uint8, count=size, offset=offset).reshape(height, width, 3).copy()


def write_ppm(path, pixels: np.ndarray) -> None:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) pixels, got {pixels.shape}")
    height, width = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def _pillow():
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise ParseError("PNG support needs Pillow (pip install 'artifact[png]')") from exc
    return Image


def read_image(path) -> np.ndarray:
    if str(path).lower().endswith(".png"):
        image = _pillow()
        try:
            with image.open(path) as img:
                return np.asarray(img.convert("RGB"), dtype=np.uint8).copy()
        except OSError as exc:
            raise ParseError(f"cannot decode PNG: {exc}", path) from exc
    return read_ppm(path)


def write_image(path, pixels: np.ndarray) -> None:
    if str(path).lower().endswith(".png"):
        _pillow().fromarray(np.asarray(pixels, dtype=np.uint8), "RGB").save(path)
    else:
        write_ppm(path, pixels)


def frame_name(index: int, ext: str = ".ppm") -> str:
    """File name for the 0-based frame ``index``."""
    return f"{index + 1:08d}{ext}"


def list_frames(directory) -> list[Path]:
    """Numbered frame files in order; rejects gaps, duplicates and a missing first frame."""
    directory = Path(directory)
    found = {}
    for entry in sorted(os.listdir(directory)):
        match = _FRAME_NAME.match(entry)
        if not match:
            continue
        number = int(match.group(1))
        if number in found:
            raise ParseError(f"frame {number} exists in more than one format", directory / entry)
        found[number] = directory / entry
    if not found:
        raise ParseError("no numbered frame images (00000001.ppm, ...)", directory)
    numbers = sorted(found)
    for expected, number in enumerate(numbers, start=1):
        if number != expected:
            raise ParseError(f"frame numbering has a gap: expected {expected:08d}, found {number:08d}",
                             found[number])
    return [found[n] for n in numbers]


# -- ground truth -----------------------------------------------------------

def read_groundtruth(path) -> tuple[list[BoundingBox | None], list[bool]]:
    """One line per frame: ``cx,cy,w,h`` or ``absent``."""
    boxes: list[BoundingBox | None] = []
    for line, text in _lines(path):
        if text.strip() == ABSENT_TOKEN:
            boxes.append(None)
            continue
        boxes.append(_box(_fields(text, path, line, 4), path, line))
    return boxes, [b is not None for b in boxes]


def write_groundtruth(path, boxes: Sequence[BoundingBox | None],
                      visibility: Sequence[bool] | None = None) -> None:
    if visibility is None:
        visibility = [b is not None for b in boxes]
    if len(visibility) != len(boxes):
        raise ValueError("visibility and boxes differ in length")
    lines = []
    for box, vis in zip(boxes, visibility):
        if box is None or not vis:
            lines.append(ABSENT_TOKEN)
        else:
            lines.append(",".join(fmt(v) for v in (box.cx, box.cy, box.w, box.h)))
    _write_text(path, lines)


def read_corner_groundtruth(path) -> list[BoundingBox | None]:
    """Corner-form ``x1,y1,x2,y2`` (or ``absent``) lines, as found in many datasets."""
    boxes: list[BoundingBox | None] = []
    for line, text in _lines(path):
        if text.strip() == ABSENT_TOKEN:
            boxes.append(None)
            continue
        tokens = _fields(text, path, line, 4)
        x1, y1, x2, y2 = (_float(t, path, line, c) for t, c in tokens)
        if x2 < x1 or y2 < y1:
            raise NegativeDimension("corner box has x2 < x1 or y2 < y1", path, line, 1)
        boxes.append(BoundingBox.from_corners(x1, y1, x2, y2))
    return boxes


# -- detections -------------------------------------------------------------

def read_detections(path, n_frames: int | None = None) -> list[list[Detection]]:
    """``frame,cx,cy,w,h,class_id,score`` records; frames may repeat or be missing.

    The result has ``n_frames`` lists when given (records beyond it are an
    error), otherwise as many as the largest frame number.
    """
    records: list[tuple[int, Detection]] = []
    for line, text in _lines(path):
        tokens = _fields(text, path, line, 7)
        frame = _int(tokens[0][0], path, line, tokens[0][1])
        if frame < 1:
            raise ParseError(f"frame numbers start at 1, found {frame}", path, line, tokens[0][1])
        if n_frames is not None and frame > n_frames:
            raise ParseError(f"frame {frame} beyond the sequence length {n_frames}", path, line, tokens[0][1])
        box = _box(tokens[1:5], path, line)
        label = _int(tokens[5][0], path, line, tokens[5][1])
        if label < 0:
            raise ParseError(f"class id must be non-negative, found {label}", path, line, tokens[5][1])
        score = _float(tokens[6][0], path, line, tokens[6][1])
        if not 0.0 <= score <= 1.0:
            raise ScoreOutOfRange(f"score must lie in [0, 1], found {tokens[6][0]}", path, line, tokens[6][1])
        records.append((frame - 1, Detection(box, label, score)))
    length = n_frames if n_frames is not None else max((f + 1 for f, _ in records), default=0)
    out: list[list[Detection]] = [[] for _ in range(length)]
    for frame, det in records:
        out[frame].append(det)
    return out


def write_detections(path, detections: Sequence[Sequence[Detection]]) -> None:
    lines = []
    for frame, dets in enumerate(detections, start=1):
        for d in dets:
            b = d.box
            lines.append(f"{frame},{fmt(b.cx)},{fmt(b.cy)},{fmt(b.w)},{fmt(b.h)},{d.class_label},{fmt(d.objectness)}")
    _write_text(path, lines)


# -- tracker config ---------------------------------------------------------

def _parse_value(name: str, default, token: str):
    """Convert ``token`` to the type of the config field ``name``."""
    lowered = token.strip().lower()
    if name in ("tau_sim", "psr_min"):
        return None if lowered in ("none", NONE_TOKEN, "") else float(token)
    if isinstance(default, bool):
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected true or false, found {token.strip()!r}")
    if isinstance(default, tuple):
        return tuple(float(t) for t in token.split(","))
    if isinstance(default, int):
        return int(token)
    if isinstance(default, float):
        return float(token)
    return token.strip()


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(fmt(v) for v in value)
    if isinstance(value, float):
        return fmt(value)
    return str(value)


def read_config(path) -> TrackerConfig:
    """``key = value`` lines; keys are the :class:`TrackerConfig` field names."""
    defaults = TrackerConfig()
    values, where = {}, {}
    for line, text in _lines(path):
        if "=" not in text:
            raise ParseError("expected 'key = value'", path, line, 1)
        key, _, token = text.partition("=")
        name = key.strip()
        column = len(key) - len(key.lstrip()) + 1
        if name not in TrackerConfig.field_names():
            raise UnknownKey(f"unknown config key {name!r}", path, line, column)
        if name in values:
            raise ParseError(f"duplicate config key {name!r}", path, line, column)
        try:
            values[name] = _parse_value(name, getattr(defaults, name), token)
        except ValueError as exc:
            raise ParseError(f"bad value for {name}: {exc}", path, line, len(key) + 2) from None
        where[name] = line
    try:
        return TrackerConfig(**values)
    except ConfigError as exc:
        raise ParseError(f"invalid configuration: {exc}", path, _offending_line(values, where)) from exc


def _offending_line(values: dict, where: dict) -> int | None:
    """Line of the first key that is invalid on its own, if any."""
    for name in sorted(values, key=where.get):
        try:
            TrackerConfig(**{name: values[name]})
        except ConfigError:
            return where[name]
    return None


def write_config(path, config: TrackerConfig) -> None:
    _write_text(path, [f"{name} = {_format_value(getattr(config, name))}" for name in TrackerConfig.field_names()])


# -- tracker results --------------------------------------------------------

RESULT_FIELDS = ("frame", "present", "cx", "cy", "w", "h", "decided_by", "cosine", "psr", "v_t")


def _opt(value: float | None) -> str:
    return NONE_TOKEN if value is None else fmt(value)


def write_results(path, outputs: Sequence[TrackOutput]) -> None:
    lines = []
    for number, out in enumerate(outputs, start=1):
        if out.box is None:
            box = [NONE_TOKEN] * 4
        else:
            box = [fmt(v) for v in (out.box.cx, out.box.cy, out.box.w, out.box.h)]
        lines.append(",".join([str(number), "1" if out.present else "0", *box, out.decided_by.value,
                               _opt(out.cosine), _opt(out.psr), _opt(out.v_t)]))
    _write_text(path, lines)


def read_results(path) -> list[TrackOutput]:
    outputs = []
    for line, text in _lines(path):
        tokens = _fields(text, path, line, len(RESULT_FIELDS))
        frame = _int(tokens[0][0], path, line, tokens[0][1])
        if frame != len(outputs) + 1:
            raise ParseError(f"expected frame {len(outputs) + 1}, found {frame}", path, line, tokens[0][1])
        flag, column = tokens[1]
        if flag not in ("0", "1"):
            raise ParseError(f"present must be 0 or 1, found {flag!r}", path, line, column)
        token, column = tokens[6]
        try:
            decided = Decision(token)
        except ValueError:
            raise ParseError(f"unknown decision {token!r}", path, line, column) from None
        box = None
        if any(t != NONE_TOKEN for t, _ in tokens[2:6]):
            box = _box(tokens[2:6], path, line)
        scores = [None if t == NONE_TOKEN else _float(t, path, line, c) for t, c in tokens[7:]]
        try:
            outputs.append(TrackOutput(frame - 1, flag == "1", box, decided, None, *scores))
        except ValueError as exc:
            raise ParseError(str(exc), path, line, 1) from None
    return outputs


# -- scenario scripts -------------------------------------------------------

@dataclass
class _Section:
    name: str
    line: int
    entries: dict[str, tuple[str, int]]


def _sections(path) -> list[_Section]:
    sections: list[_Section] = []
    for line, text in _lines(path):
        stripped = text.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise ParseError("malformed section header", path, line, 1)
            sections.append(_Section(stripped[1:-1].strip(), line, {}))
            continue
        if not sections:
            raise ParseError("key outside any section", path, line, 1)
        if "=" not in text:
            raise ParseError("expected 'key = value'", path, line, 1)
        key, _, value = text.partition("=")
        key = key.strip()
        if key in sections[-1].entries:
            raise ParseError(f"duplicate key {key!r}", path, line, 1)
        sections[-1].entries[key] = (value.strip(), line)
    return sections


class _Reader:
    """Typed access to one section, raising located errors."""

    def __init__(self, section: _Section, path, allowed: Iterable[str]):
        self.section, self.path = section, path
        for key, (_, line) in section.entries.items():
            if key not in allowed:
                raise UnknownKey(f"unknown key {key!r} in [{section.name}]", path, line, 1)

    def get(self, key, convert, default=dataclasses.MISSING):
        if key not in self.section.entries:
            if default is dataclasses.MISSING:
                raise ParseError(f"[{self.section.name}] is missing {key!r}", self.path, self.section.line, 1)
            return default
        token, line = self.section.entries[key]
        try:
            return convert(token)
        except (ValueError, InvalidScript) as exc:
            raise ParseError(f"bad value for {key}: {exc}", self.path, line, 1) from None


def _bool(token: str) -> bool:
    lowered = token.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true or false, found {token!r}")


def _texture(token: str) -> Texture:
    parts = token.split()
    if len(parts) != 3:
        raise ValueError("texture is 'kind seed cells'")
    return Texture(parts[0], int(parts[1]), int(parts[2]))


def _floats(token: str, n: int) -> tuple[float, ...]:
    values = tuple(float(t) for t in token.split(","))
    if len(values) != n:
        raise ValueError(f"expected {n} comma-separated numbers")
    return values


def _intervals(token: str) -> tuple[tuple[int, int], ...]:
    out = []
    for part in filter(None, (p.strip() for p in token.split(","))):
        start, sep, end = part.partition("-")
        if not sep:
            raise ValueError(f"interval {part!r} is not 'first-last'")
        first, last = int(start), int(end)
        if first < 1:
            raise ValueError("frame numbers start at 1")
        out.append((first - 1, last - 1))
    return tuple(out)


_SCENE_KEYS = ("width", "height", "length", "target_class", "target_texture", "background",
               "background_contrast", "hidden", "occluder", "max_distractor_iou", "n_classes", "rng_seed")
_NOISE_KEYS = tuple(f.name for f in dataclasses.fields(DetectorNoise))
_DISTRACTOR_KEYS = ("count", "class", "texture", "w", "h")


def read_scenario(path) -> ScenarioScript:
    """Sectioned scenario file: ``[scene]``, ``[waypoints]``, ``[noise]``, ``[distractor ...]``.

    Waypoint keys and hidden intervals use 1-based frame numbers.
    """
    sections = _sections(path)
    by_name: dict[str, _Section] = {}
    distractor_sections = []
    for section in sections:
        if section.name.split()[0] == "distractor":
            distractor_sections.append(section)
        elif section.name in ("scene", "waypoints", "noise"):
            if section.name in by_name:
                raise ParseError(f"duplicate section [{section.name}]", path, section.line, 1)
            by_name[section.name] = section
        else:
            raise UnknownKey(f"unknown section [{section.name}]", path, section.line, 1)
    for required in ("scene", "waypoints"):
        if required not in by_name:
            raise ParseError(f"missing section [{required}]", path)
    scene = _Reader(by_name["scene"], path, _SCENE_KEYS)
    base = ScenarioScript(8, 8, 1, ())
    waypoints = []
    for key, (token, line) in by_name["waypoints"].entries.items():
        try:
            frame = int(key)
            values = _floats(token, 4)
        except ValueError as exc:
            raise ParseError(f"bad waypoint: {exc}", path, line, 1) from None
        if frame < 1:
            raise ParseError("frame numbers start at 1", path, line, 1)
        waypoints.append(Waypoint(frame - 1, *values))
    noise = DetectorNoise()
    if "noise" in by_name:
        reader = _Reader(by_name["noise"], path, _NOISE_KEYS)
        changes = {k: reader.get(k, float) for k in by_name["noise"].entries}
        try:
            noise = DetectorNoise(**changes)
        except InvalidScript as exc:
            raise ParseError(str(exc), path, by_name["noise"].line, 1) from None
    distractors = []
    for section in distractor_sections:
        reader = _Reader(section, path, _DISTRACTOR_KEYS)
        distractors.append(DistractorSpec(reader.get("count", int), reader.get("class", int),
                                          reader.get("texture", _texture, DistractorSpec(0, 0).texture),
                                          reader.get("w", float, 0.0), reader.get("h", float, 0.0)))
    try:
        script = ScenarioScript(
            width=scene.get("width", int), height=scene.get("height", int), length=scene.get("length", int),
            waypoints=tuple(sorted(waypoints, key=lambda w: w.frame)),
            target_class=scene.get("target_class", int, base.target_class),
            target_texture=scene.get("target_texture", _texture, base.target_texture),
            background=scene.get("background", _texture, base.background),
            background_contrast=scene.get("background_contrast", float, base.background_contrast),
            hidden=scene.get("hidden", _intervals, ()),
            occluder=scene.get("occluder", _bool, False),
            distractors=tuple(distractors),
            max_distractor_iou=scene.get("max_distractor_iou", float, base.max_distractor_iou),
            noise=noise,
            n_classes=scene.get("n_classes", int, base.n_classes),
            rng_seed=scene.get("rng_seed", int, 0),
        )
        script.validate()
    except InvalidScript as exc:
        raise ParseError(f"invalid scenario: {exc}", path) from None
    return script


def _texture_text(t: Texture) -> str:
    return f"{t.kind} {t.seed} {t.cells}"


def write_scenario(path, script: ScenarioScript) -> None:
    lines = ["[scene]",
             f"width = {script.width}", f"height = {script.height}", f"length = {script.length}",
             f"target_class = {script.target_class}",
             f"target_texture = {_texture_text(script.target_texture)}",
             f"background = {_texture_text(script.background)}",
             f"background_contrast = {fmt(script.background_contrast)}",
             "hidden = " + ", ".join(f"{a + 1}-{b + 1}" for a, b in script.hidden),
             f"occluder = {'true' if script.occluder else 'false'}",
             f"max_distractor_iou = {fmt(script.max_distractor_iou)}",
             f"n_classes = {script.n_classes}", f"rng_seed = {script.rng_seed}",
             "", "[waypoints]"]
    for w in script.waypoints:
        lines.append(f"{w.frame + 1} = {fmt(w.cx)},{fmt(w.cy)},{fmt(w.w)},{fmt(w.h)}")
    lines += ["", "[noise]"]
    lines += [f"{name} = {fmt(getattr(script.noise, name))}" for name in _NOISE_KEYS]
    for i, d in enumerate(script.distractors, start=1):
        lines += ["", f"[distractor {i}]", f"count = {d.count}", f"class = {d.class_label}",
                  f"texture = {_texture_text(d.texture)}", f"w = {fmt(d.w)}", f"h = {fmt(d.h)}"]
    _write_text(path, lines)


# -- whole sequences --------------------------------------------------------

@dataclass
class SequenceData:
    frames: list[Frame]
    gt_boxes: list[BoundingBox | None]
    gt_visibility: list[bool]
    detections: list[list[Detection]]
    script: ScenarioScript | None = None
    path: Path | None = None


def _required(directory: Path, name: str) -> Path:
    path = directory / name
    if not path.is_file():
        raise ParseError(f"missing {name}", path)
    return path


def read_sequence(directory) -> SequenceData:
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError("sequence directory does not exist", directory)
    gt_path = _required(directory, GROUNDTRUTH_FILE)
    det_path = _required(directory, DETECTIONS_FILE)
    images = list_frames(directory)
    frames = []
    for index, image in enumerate(images):
        try:
            frames.append(Frame(index, read_image(image)))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), image) from None
    sizes = {(f.width, f.height) for f in frames}
    if len(sizes) > 1:
        raise ParseError(f"frames differ in size: {sorted(sizes)}", directory)
    boxes, visibility = read_groundtruth(gt_path)
    if len(boxes) != len(frames):
        raise ParseError(f"{len(boxes)} ground-truth lines for {len(frames)} frames", gt_path)
    detections = read_detections(det_path, len(frames))
    script = None
    if (directory / SCENARIO_FILE).is_file():
        script = read_scenario(directory / SCENARIO_FILE)
    return SequenceData(frames, boxes, visibility, detections, script, directory)


def write_sequence(directory, frames: Sequence[Frame], gt_boxes, gt_visibility, detections,
                   script: ScenarioScript | None = None, ext: str = ".ppm") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, frame in enumerate(frames):
        write_image(directory / frame_name(index, ext), frame.pixels)
    write_groundtruth(directory / GROUNDTRUTH_FILE, gt_boxes, gt_visibility)
    write_detections(directory / DETECTIONS_FILE, detections)
    if script is not None:
        write_scenario(directory / SCENARIO_FILE, script)
    return directory


# -- evaluation reports -----------------------------------------------------

def write_report(path, report, events=None) -> None:
    """Text report for an :class:`StReport` or :class:`LtReport`.

    Curves are repeated ``success``/``curve`` records; event frames are
    1-based, with ``-`` for a missed event.
    """
    from sotrack.metrics import LtReport, StReport

    if isinstance(report, StReport):
        lines = ["mode = st", f"frames = {report.frames}", f"accuracy = {fmt(report.accuracy)}",
                 f"robustness = {fmt(report.robustness)}", f"tc = {fmt(report.tc)}"]
        lines += [f"success = {fmt(th)},{fmt(v)}" for th, v in report.success_curve]
    elif isinstance(report, LtReport):
        lines = ["mode = lt", f"frames = {report.frames}", f"f_max = {fmt(report.f_max)}",
                 f"tau_star = {fmt(report.tau_star)}", f"precision = {fmt(report.precision)}",
                 f"recall = {fmt(report.recall)}"]
        lines += [f"curve = {fmt(t)},{fmt(p)},{fmt(r)},{fmt(f)}"
                  for t, p, r, f in zip(report.thresholds, report.pr_curve, report.re_curve, report.f_curve)]
    else:
        raise TypeError(f"not a report: {type(report).__name__}")
    for event in events or ():
        delay = NONE_TOKEN if event.delay is None else str(event.delay)
        lines.append(f"event = {event.kind},{event.gt_frame + 1},{delay}")
    _write_text(path, lines)


def read_report(path):
    """Inverse of :func:`write_report`; returns ``(report, events)``."""
    from sotrack.metrics import Event, LtReport, StReport

    scalars, where, curve, events = {}, {}, [], []
    for line, text in _lines(path):
        if "=" not in text:
            raise ParseError("expected 'key = value'", path, line, 1)
        key, _, value = (part.strip() for part in text.partition("="))
        column = len(text.partition("=")[0]) + 2
        if key in ("success", "curve"):
            n = 2 if key == "success" else 4
            curve.append(tuple(_float(t, path, line, column) for t, _ in _fields(value, path, line, n)))
        elif key == "event":
            (kind, _), (frame, c2), (delay, c3) = _fields(value, path, line, 3)
            if kind not in ("exit", "entry"):
                raise ParseError(f"unknown event kind {kind!r}", path, line, column)
            events.append(Event(kind, _int(frame, path, line, c2) - 1,
                                None if delay == NONE_TOKEN else _int(delay, path, line, c3)))
        elif key in ("mode", "frames", "accuracy", "robustness", "tc", "f_max", "tau_star", "precision", "recall"):
            scalars[key] = value
            where[key] = line
        else:
            raise UnknownKey(f"unknown report key {key!r}", path, line, 1)
    mode = scalars.get("mode")
    needed = {"st": ("frames", "accuracy", "robustness", "tc"),
              "lt": ("frames", "f_max", "tau_star")}.get(mode)
    if needed is None:
        raise ParseError(f"report mode must be st or lt, found {mode!r}", path, where.get("mode"))
    for key in needed:
        if key not in scalars:
            raise ParseError(f"report is missing {key!r}", path)
    frames = _int(scalars["frames"], path, where["frames"], 1)
    if mode == "st":
        if len(curve) and len(curve[0]) != 2:
            raise ParseError("short-term report holds 'curve' records", path)
        return StReport(*(_float(scalars[k], path, where[k], 1) for k in ("accuracy", "robustness", "tc")),
                        tuple(curve), frames), events
    if len(curve) and len(curve[0]) != 4:
        raise ParseError("long-term report holds 'success' records", path)
    columns = list(zip(*curve)) if curve else [(), (), (), ()]
    return LtReport(tuple(columns[0]), tuple(columns[1]), tuple(columns[2]), tuple(columns[3]),
                    _float(scalars["f_max"], path, where["f_max"], 1),
                    _float(scalars["tau_star"], path, where["tau_star"], 1), frames), events
