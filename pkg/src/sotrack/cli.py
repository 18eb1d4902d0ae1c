"""Command-line entry point.

    sotrack simulate --preset clean --seed 3 --out seq/
    sotrack track seq/ --out seq/results.txt
    sotrack eval seq/results.txt --gt seq/ --mode st --out report.txt
    sotrack plot-data report.txt --out curve.tsv
    sotrack convert-gt corners.txt --out groundtruth.txt

Data goes to files, diagnostics to stderr. Exit status is 0 on success,
1 on input errors (with the offending file and line) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from sotrack import __version__, formats
from sotrack.config import MODES, TrackerConfig
from sotrack.errors import ParseError, TrackingError
from sotrack.metrics import StReport, event_delays, lt_metrics, st_metrics
from sotrack.pipeline import Decision, run_sequence
from sotrack.simulator import detections_for, preset, render

log = logging.getLogger("sotrack")
PRESETS = ("clean", "default", "ablation", "exit")


class InputError(Exception):
    """Bad input that is not tied to a file location."""


def _config(args) -> TrackerConfig:
    config = formats.read_config(args.config) if args.config else TrackerConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["rng_seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        changes["mode"] = args.mode
    return dataclasses.replace(config, **changes) if changes else config


# -- track ------------------------------------------------------------------

def _track_one(sequence: str, out: str, config: TrackerConfig, target_class: int | None) -> str:
    data = formats.read_sequence(sequence)
    if not data.gt_visibility[0]:
        raise InputError(f"{sequence}: the first ground-truth line must be a box, not 'absent'")
    if target_class is None and data.script is not None:
        target_class = data.script.target_class
    trackers: list = []
    try:
        outputs = run_sequence(data.frames, data.detections, data.gt_boxes[0], config,
                               target_class=target_class, tracker_out=trackers)
    except ValueError as exc:
        if isinstance(exc, TrackingError):
            raise
        raise InputError(f"{sequence}: {exc}") from None
    formats.write_results(out, outputs)
    counts = Counter(o.decided_by for o in outputs)
    stats = trackers[0].stats
    return (f"{sequence}: frames={len(outputs)} SM={counts[Decision.SM]} LSM={counts[Decision.LSM]} "
            f"ABSENT={counts[Decision.ABSENT]} mean_qualified={stats.mean_qualified:.2f} "
            f"mean_detections={stats.mean_input:.2f}")


def _track_outputs(args) -> list[str]:
    if len(args.sequences) == 1:
        default = Path(args.sequences[0]) / "results.txt"
        return [args.out or str(default)]
    if args.out is None:
        return [str(Path(s) / "results.txt") for s in args.sequences]
    names = [Path(s).resolve().name for s in args.sequences]
    if len(set(names)) != len(names):
        raise InputError("sequence directories share a name; results would collide in --out")
    Path(args.out).mkdir(parents=True, exist_ok=True)
    return [str(Path(args.out) / f"{name}.txt") for name in names]


def cmd_track(args) -> int:
    config = _config(args)
    outs = _track_outputs(args)
    jobs = [(s, o, config, args.target_class) for s, o in zip(args.sequences, outs)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_track_one, *job) for job in jobs]
            lines = [f.result() for f in futures]
    else:
        lines = [_track_one(*job) for job in jobs]
    for line in lines:
        print(line, file=sys.stderr)
    return 0


# -- eval / plot-data -------------------------------------------------------

def _groundtruth(path: str):
    path = Path(path)
    if path.is_dir():
        path = path / formats.GROUNDTRUTH_FILE
    return formats.read_groundtruth(path)


def cmd_eval(args) -> int:
    outputs = formats.read_results(args.results)
    boxes, visibility = _groundtruth(args.gt)
    if len(outputs) != len(boxes):
        raise InputError(f"{args.results} has {len(outputs)} frames but the ground truth has {len(boxes)}")
    if args.mode == "st":
        report = st_metrics(outputs, boxes, visibility)
        formats.write_report(args.out, report)
        print(f"accuracy={report.accuracy:.4f} robustness={report.robustness:.4f} tc={report.tc:.4f}",
              file=sys.stderr)
    else:
        report = lt_metrics(outputs, boxes, visibility)
        events = event_delays(outputs, visibility)
        formats.write_report(args.out, report, events)
        print(f"f={report.f_max:.4f} precision={report.precision:.4f} recall={report.recall:.4f} "
              f"tau={report.tau_star:.2f}", file=sys.stderr)
    return 0


def cmd_plot_data(args) -> int:
    report, _ = formats.read_report(args.report)
    if isinstance(report, StReport):
        lines = ["threshold\tsuccess"]
        lines += [f"{formats.fmt(th)}\t{formats.fmt(v)}" for th, v in report.success_curve]
    else:
        lines = ["tau\tprecision\trecall\tf"]
        lines += ["\t".join(formats.fmt(v) for v in row)
                  for row in zip(report.thresholds, report.pr_curve, report.re_curve, report.f_curve)]
    formats._write_text(args.out, lines)
    return 0


# -- simulate / convert-gt --------------------------------------------------

def cmd_simulate(args) -> int:
    if (args.scenario is None) == (args.preset is None):
        raise InputError("give either a scenario file or --preset")
    if args.preset is not None:
        script = preset(args.preset, args.seed or 0)
    else:
        script = formats.read_scenario(args.scenario)
        if args.seed is not None:
            script = dataclasses.replace(script, rng_seed=args.seed)
    seq = render(script)
    detections = detections_for(seq)
    ext = ".png" if args.png else ".ppm"
    formats.write_sequence(args.out, seq.frames, seq.gt_boxes, seq.gt_visibility, detections, script, ext)
    print(f"{args.out}: frames={len(seq)} visible={sum(seq.gt_visibility)} "
          f"detections={sum(len(d) for d in detections)}", file=sys.stderr)
    return 0


def cmd_convert_gt(args) -> int:
    boxes = formats.read_corner_groundtruth(args.input)
    formats.write_groundtruth(args.out, boxes)
    return 0


# -- wiring -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sotrack", description="Detection-driven single-object tracker.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("track", help="track one or more sequence directories")
    p.add_argument("sequences", nargs="+", metavar="SEQUENCE", help="sequence directory")
    p.add_argument("--config", metavar="PATH", help="tracker config (key = value lines)")
    p.add_argument("--seed", type=int, help="override the config rng_seed")
    p.add_argument("--mode", choices=MODES, help="override the config mode")
    p.add_argument("--target-class", type=int, metavar="ID",
                   help="target class id (default: scenario file, else the best first-frame detection)")
    p.add_argument("--out", metavar="PATH",
                   help="results file; a directory when several sequences are given "
                        "(default: results.txt inside each sequence)")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="sequences tracked in parallel")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a results file against ground truth")
    p.add_argument("results", metavar="RESULTS")
    p.add_argument("--gt", required=True, metavar="PATH", help="groundtruth file or sequence directory")
    p.add_argument("--mode", choices=MODES, default="st", type=str.lower)
    p.add_argument("--out", required=True, metavar="PATH", help="report file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="render a synthetic sequence directory")
    p.add_argument("scenario", nargs="?", metavar="SCENARIO", help="scenario file")
    p.add_argument("--preset", choices=PRESETS, help="use a built-in scenario family instead of a file")
    p.add_argument("--seed", type=int, help="preset seed, or override the scenario rng_seed")
    p.add_argument("--png", action="store_true", help="write PNG frames (needs Pillow)")
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot-data", help="tabulate a report's success curve or F-curve")
    p.add_argument("report", metavar="REPORT")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("convert-gt", help="convert corner-form x1,y1,x2,y2 ground truth to center form")
    p.add_argument("input", metavar="INPUT")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_convert_gt)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ParseError, InputError, TrackingError) as exc:
        print(f"sotrack {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        where = f"{exc.filename}: " if getattr(exc, "filename", None) else ""
        print(f"sotrack {args.command}: error: {where}{exc.strerror or exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
