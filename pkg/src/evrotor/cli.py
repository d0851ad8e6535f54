"""Command line interface: detect, synth, eval, and bench subcommands."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .detector import run_pipeline
from .errors import ConfigurationError, EvrotorError
from .events import DetectorConfig, SensorGeometry
from .io import load_events, write_annotation, write_detections, write_events, write_pgm
from .metrics import evaluate_dataset
from .synth import (
    BackgroundSpec,
    PropellerSpec,
    SynthScene,
    benchmark_period,
    generate_scene,
)

_EXIT_OK = 0
_EXIT_INVALID = 1
_EXIT_IO = 2


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-slices", type=int, default=None,
                        help="saliency slices per period (default: one per ms)")
    parser.add_argument("--m-slices", type=int, default=None,
                        help="feature slices per period (default: two per ms)")
    parser.add_argument("--tau-s", type=int, default=50,
                        help="gray threshold for salient pixels, 0..255")
    parser.add_argument("--tau-p", type=int, default=3,
                        help="periodicity score threshold, 0..6")
    parser.add_argument("--k", type=int, default=4,
                        help="clusters kept by saliency rank in the coarse stage")
    parser.add_argument("--d-merge", type=float, default=50.0,
                        help="max bbox distance merged into one cluster, px")
    parser.add_argument("--smooth-window", type=int, default=3,
                        help="odd moving-average window for feature series")
    parser.add_argument("--margin", type=int, default=2,
                        help="bbox dilation around candidates, px")


def _config_from(args: argparse.Namespace) -> DetectorConfig:
    return DetectorConfig(
        n_slices=args.n_slices,
        m_slices=args.m_slices,
        tau_s=args.tau_s,
        tau_p=args.tau_p,
        k_top=args.k,
        d_merge=args.d_merge,
        smooth_window=args.smooth_window,
        region_margin=args.margin,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evrotor",
        description="Training-free rotor detection in event-camera streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser(
        "detect",
        help="detect rotors in event files",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    detect.add_argument("--input", nargs="+", required=True,
                        help="event file(s), CSV or binary")
    detect.add_argument("--width", type=int, default=None,
                        help="sensor width, required for CSV input")
    detect.add_argument("--height", type=int, default=None,
                        help="sensor height, required for CSV input")
    _add_config_flags(detect)
    detect.add_argument("--iou", type=float, default=0.4,
                        help="matching threshold recorded for eval parity; "
                             "detection itself does not use it")
    detect.add_argument("--output", default=None,
                        help="detections JSON path, or a directory for several inputs "
                             "(default: alongside each input)")
    detect.add_argument("--jobs", type=int, default=1,
                        help="worker processes for several inputs")
    detect.add_argument("--dump-saliency", default=None, metavar="PGM",
                        help="write the saliency map as binary PGM (single input only)")
    detect.add_argument("--dump-features", default=None, metavar="CSV",
                        help="write candidate feature series as CSV (single input only)")
    detect.set_defaults(func=cmd_detect)

    synth = sub.add_parser(
        "synth",
        help="generate a synthetic scene with ground truth",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    synth.add_argument("--out-events", required=True,
                       help="event output path; .evd or .bin selects binary, else CSV")
    synth.add_argument("--out-gt", default=None,
                       help="ground-truth JSON path (default: <out-events>.gt.json)")
    synth.add_argument("--width", type=int, default=640)
    synth.add_argument("--height", type=int, default=480)
    synth.add_argument("--duration-ms", type=int, default=20)
    synth.add_argument("--rpm", type=float, default=10_000.0)
    synth.add_argument("--blades", type=int, default=2)
    synth.add_argument("--radius", type=int, default=50)
    synth.add_argument("--center", default=None, metavar="X,Y",
                       help="rotor center (default: frame center)")
    synth.add_argument("--aspect", type=float, default=0.8,
                       help="projected minor/major axis ratio of the blade disk")
    synth.add_argument("--background-only", action="store_true",
                       help="omit the rotor")
    synth.add_argument("--edges", type=int, default=0,
                       help="translating background edges")
    synth.add_argument("--speed", type=float, default=2.0,
                       help="background edge speed, px per ms")
    synth.add_argument("--noise-rate", type=float, default=0.0,
                       help="uniform noise events per ms over the frame")
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(func=cmd_synth)

    evaluate = sub.add_parser(
        "eval",
        help="score detections against ground truth",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    evaluate.add_argument("--pred", required=True, help="directory of detection JSON files")
    evaluate.add_argument("--gt", required=True, help="directory of ground-truth JSON files")
    evaluate.add_argument("--iou", type=float, default=0.4, help="matching IoU threshold")
    evaluate.add_argument("--json", default=None, metavar="PATH",
                          help="also write the report as JSON")
    evaluate.set_defaults(func=cmd_eval)

    bench = sub.add_parser(
        "bench",
        help="measure detection latency on a standard scene",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    bench.add_argument("--events", type=int, default=200_000,
                       help="events in the generated 640x480, 20 ms scene")
    bench.add_argument("--reps", type=int, default=50, help="timed repetitions")
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)

    return parser


def _detect_one(path_str: str, width: int | None, height: int | None,
                config: DetectorConfig) -> dict:
    """Worker for one input file; returns the JSON-ready record."""
    path = Path(path_str)
    sensor = None
    if width is not None and height is not None:
        sensor = SensorGeometry(width, height)
    period = load_events(path, sensor)
    result = run_pipeline(period, config)
    boxes = [
        {"x": d.bbox.x, "y": d.bbox.y, "w": d.bbox.w, "h": d.bbox.h,
         "s_p": int(d.s_p), "s_s": d.s_s if isinstance(d.s_s, int) else float(d.s_s)}
        for d in result.detections
    ]
    return {
        "file": path.name,
        "width": period.sensor.width,
        "height": period.sensor.height,
        "duration_us": period.duration,
        "boxes": boxes,
    }


def _dump_features_csv(features, path) -> None:
    with open(path, "w", encoding="ascii") as handle:
        handle.write("candidate,slice,f_d,f_s,f_p\n")
        for index, series in enumerate(features):
            for j in range(series.f_d.size):
                f_s = f"{series.f_s[j]:.6f}" if j < series.f_s.size else ""
                f_p = f"{series.f_p[j]:.6f}" if j < series.f_p.size else ""
                handle.write(f"{index},{j},{series.f_d[j]:.1f},{f_s},{f_p}\n")


def cmd_detect(args: argparse.Namespace) -> int:
    config = _config_from(args)
    if not 0.0 < args.iou <= 1.0:
        raise ConfigurationError(f"iou must be in (0, 1], got {args.iou}")
    inputs = [Path(p) for p in args.input]
    if len(inputs) > 1 and (args.dump_saliency or args.dump_features):
        raise ConfigurationError("feature and saliency dumps need a single input")
    if args.jobs < 1:
        raise ConfigurationError(f"jobs must be at least 1, got {args.jobs}")

    out_arg = None if args.output is None else Path(args.output)
    if len(inputs) > 1:
        out_dir = out_arg
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
        out_paths = [
            (out_dir / (p.stem + ".json")) if out_dir is not None
            else p.with_suffix(".json")
            for p in inputs
        ]
    else:
        if out_arg is not None and out_arg.is_dir():
            out_paths = [out_arg / (inputs[0].stem + ".json")]
        else:
            out_paths = [out_arg if out_arg is not None else inputs[0].with_suffix(".json")]

    if len(inputs) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(
                pool.map(
                    _detect_one,
                    [str(p) for p in inputs],
                    [args.width] * len(inputs),
                    [args.height] * len(inputs),
                    [config] * len(inputs),
                )
            )
    elif len(inputs) > 1:
        records = [_detect_one(str(p), args.width, args.height, config) for p in inputs]
    else:
        path = inputs[0]
        sensor = None
        if args.width is not None and args.height is not None:
            sensor = SensorGeometry(args.width, args.height)
        period = load_events(path, sensor)
        result = run_pipeline(period, config)
        if args.dump_saliency:
            write_pgm(result.saliency.gray, args.dump_saliency)
        if args.dump_features:
            _dump_features_csv(result.candidate_features, args.dump_features)
        write_detections(
            result.detections,
            out_paths[0],
            source=path.name,
            sensor=period.sensor,
            duration_us=period.duration,
        )
        print(f"{path.name}: {len(result.detections)} detection(s) -> {out_paths[0]}")
        return _EXIT_OK

    for record, out_path in zip(records, out_paths):
        with open(out_path, "w", encoding="ascii") as handle:
            json.dump(record, handle)
            handle.write("\n")
        print(f"{record['file']}: {len(record['boxes'])} detection(s) -> {out_path}")
    return _EXIT_OK


def _parse_center(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigurationError(f"center must be X,Y, got {text!r}")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError:
        raise ConfigurationError(f"center must be two integers, got {text!r}") from None


def cmd_synth(args: argparse.Namespace) -> int:
    sensor = SensorGeometry(args.width, args.height)
    if args.duration_ms < 1:
        raise ConfigurationError(f"duration must be at least 1 ms, got {args.duration_ms}")
    propellers: tuple[PropellerSpec, ...] = ()
    if not args.background_only:
        center = (
            _parse_center(args.center)
            if args.center is not None
            else (sensor.width // 2, sensor.height // 2)
        )
        propellers = (
            PropellerSpec(
                center=center,
                radius=args.radius,
                blades=args.blades,
                rpm=args.rpm,
                aspect=args.aspect,
            ),
        )
    out_events = Path(args.out_events)
    scene = SynthScene(
        sensor=sensor,
        duration=args.duration_ms * 1000,
        propellers=propellers,
        background=BackgroundSpec(
            edge_count=args.edges, speed=args.speed, noise_rate=args.noise_rate
        ),
        seed=args.seed,
        name=out_events.name,
    )
    period, annotation = generate_scene(scene)
    write_events(period, out_events)
    gt_path = Path(args.out_gt) if args.out_gt else out_events.with_suffix(".gt.json")
    write_annotation(annotation, gt_path)
    print(f"{len(period)} events -> {out_events}; {len(annotation.boxes)} box(es) -> {gt_path}")
    return _EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    report = evaluate_dataset(args.pred, args.gt, args.iou)
    print(report.table())
    if args.json:
        with open(args.json, "w", encoding="ascii") as handle:
            handle.write(report.to_json())
            handle.write("\n")
    return _EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.reps < 1:
        raise ConfigurationError(f"reps must be at least 1, got {args.reps}")
    if args.events < 0:
        raise ConfigurationError(f"events must be non-negative, got {args.events}")
    period, _ = benchmark_period(args.events, seed=args.seed)
    config = DetectorConfig()
    detections = run_pipeline(period, config).detections  # warmup, untimed
    times_ms = []
    for _ in range(args.reps):
        start = time.perf_counter()
        detections = run_pipeline(period, config).detections
        times_ms.append((time.perf_counter() - start) * 1000.0)
    payload = {
        "events": len(period),
        "reps": args.reps,
        "median_ms": float(np.median(times_ms)),
        "p95_ms": float(np.percentile(times_ms, 95)),
        "detections": len(detections),
    }
    print(json.dumps(payload))
    return _EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvrotorError as err:
        print(f"error: {err}", file=sys.stderr)
        return _EXIT_INVALID
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
