"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one row per kernel: best-of-N milliseconds per call for each
backend and the speedup. Inputs match what one tracking step feeds the
kernels (200 proposals, ~40 detections, 64x64 patches, 320x240 frames).
"""

import argparse
import timeit

import numpy as np

from sotrack import kernels


def workloads(rng):
    tps = np.column_stack([rng.uniform(40, 280, 200), rng.uniform(40, 200, 200),
                           rng.uniform(20, 50, 200), rng.uniform(20, 50, 200)])
    dets = np.column_stack([rng.uniform(0, 320, 40), rng.uniform(0, 240, 40),
                            rng.uniform(10, 60, 40), rng.uniform(10, 60, 40)])
    gray = rng.uniform(0, 255, (64, 64))
    frame = rng.integers(0, 256, (240, 320, 3)).astype(np.uint8)
    return {
        "iou_matrix 200x40": lambda k: k.iou_matrix(tps, dets),
        "max_iou 200x40": lambda k: k.max_iou(tps, dets),
        "lbp_counts 64x64": lambda k: k.lbp_counts(gray),
        "bilinear_sample 64x64": lambda k: k.bilinear_sample(frame, 101.3, 57.8, 36.5, 41.2, 64),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=200)
    args = parser.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy fallback is timed")
    names = list(backends)
    print(f"{'kernel':<24}" + "".join(f"{n + ' ms':>14}" for n in names) + ("  speedup" if len(names) > 1 else ""))
    for label, call in workloads(np.random.default_rng(0)).items():
        times = {}
        for name, module in backends.items():
            timer = timeit.Timer(lambda: call(module))
            times[name] = min(timer.repeat(args.repeat, args.number)) / args.number * 1e3
        row = f"{label:<24}" + "".join(f"{times[n]:>14.4f}" for n in names)
        if len(names) > 1:
            row += f"  {times['python'] / times['cython']:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
