"""Command-line front end.

    siftkit bench run --config cfg.json [--seed N] [--workers K] [--out DIR] [--format csv]
    siftkit decompose --input signal.csv --method sift|sst|bpf [--out DIR] ...
    siftkit tfr --input signal.csv --method stft|sst --out DIR ...

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import io as skio
from .bench import ExperimentConfig, emit_report, load_config, run_benchmark
from .errors import ConfigError, SiftKitError
from .ridge import ExtractionConfig, extract_curve
from .sift import SIFTConfig, sift_decompose
from .signals import Signal
from .sst import SSTConfig, WindowSpec, bandpass_reconstruct, reconstruct_along_curve, stft, synchrosqueeze

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _read_signal(path: str) -> Signal:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"input file {p} does not exist")
    with p.open("rb") as fh:
        magic = fh.read(8)
    if magic == skio.SIGNAL_MAGIC:
        return skio.read_signal_binary(p)
    return skio.read_signal_csv(p)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="siftkit", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="benchmark harness")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    run = bench_sub.add_parser("run", help="run a config-driven benchmark")
    run.add_argument("--config", required=True, help="JSON or key=value config file")
    run.add_argument("--seed", type=int, default=None, help="override seed_base")
    run.add_argument("--workers", type=int, default=None, help="parallel realizations")
    run.add_argument("--out", default="bench-out", help="output directory")
    run.add_argument("--format", default="csv", choices=["csv", "json", "markdown-table"])

    dec = sub.add_parser("decompose", help="decompose one signal file")
    dec.add_argument("--input", required=True)
    dec.add_argument("--method", required=True, choices=["sift", "sst", "bpf"])
    dec.add_argument("--window-len", type=int, default=377)
    dec.add_argument("--xi", type=float, default=1.4)
    dec.add_argument("--lambda", dest="penalty", type=float, default=1.0)
    dec.add_argument("--band-b", type=float, default=0.1)
    dec.add_argument("--low", type=float, default=None, help="bpf band low edge (Hz)")
    dec.add_argument("--high", type=float, default=None, help="bpf band high edge (Hz)")
    dec.add_argument("--max-freq", type=float, default=10.0)
    dec.add_argument("--delta-xi", type=float, default=0.01)
    dec.add_argument("--max-components", type=int, default=4)
    dec.add_argument("--out", default="decompose-out")

    tfr = sub.add_parser("tfr", help="export a time-frequency grid")
    tfr.add_argument("--input", required=True)
    tfr.add_argument("--method", required=True, choices=["stft", "sst"])
    tfr.add_argument("--window-len", type=int, default=377)
    tfr.add_argument("--max-freq", type=float, default=10.0)
    tfr.add_argument("--delta-xi", type=float, default=0.01)
    tfr.add_argument("--out", required=True)
    return parser


def _cmd_bench_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed_base"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = dataclasses.replace(config, **overrides)
    report, timing = run_benchmark(config)
    out = Path(args.out)
    suffix = {"csv": "csv", "json": "json", "markdown-table": "md"}[args.format]
    report_path = emit_report(report, args.format, out / f"report.{suffix}")
    (out / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True))
    print(f"report written to {report_path}")
    if report.failures:
        print(f"{len(report.failures)} method failures recorded in the report")
    return EXIT_OK


def _cmd_decompose(args: argparse.Namespace) -> int:
    signal = _read_signal(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sst_config = SSTConfig(delta_xi=args.delta_xi, max_frequency=args.max_freq)
    window = WindowSpec(length=args.window_len)

    if args.method == "bpf":
        if args.low is None or args.high is None:
            raise ConfigError("bpf needs --low and --high band edges")
        component = bandpass_reconstruct(signal, args.low, args.high)
        skio.write_signal_csv(component, out / "component_000.csv")
        manifest = {"method": "bpf", "band": [args.low, args.high],
                    "components": ["component_000.csv"]}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
        print(f"wrote {out / 'component_000.csv'}")
        return EXIT_OK

    if args.method == "sst":
        grid = synchrosqueeze(signal, window, sst_config)
        curve = extract_curve(grid, ExtractionConfig(penalty=args.penalty))
        recon = reconstruct_along_curve(grid, curve, args.band_b, window)
        estimate = recon if signal.is_complex else recon.with_samples(2.0 * np.real(recon.samples))
        skio.write_signal_csv(estimate, out / "component_000.csv")
        skio.write_curve_csv(curve, grid.frame_times, out / "curve_000.csv")
        manifest = {"method": "sst", "band_b": args.band_b,
                    "components": ["component_000.csv"], "curves": ["curve_000.csv"]}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
        print(f"wrote {out / 'component_000.csv'}")
        return EXIT_OK

    config = SIFTConfig(
        sst=sst_config,
        window=window,
        extraction=ExtractionConfig(penalty=args.penalty),
        xi=args.xi,
        max_components=args.max_components,
    )
    result = sift_decompose(signal, config)
    manifest_path = skio.save_sift_result(
        result, signal.times(), out,
        config_echo={"method": "sift", "xi": args.xi, "lambda": args.penalty,
                     "window_len": args.window_len, "band_b": args.band_b},
    )
    print(f"wrote {len(result.imts)} components, manifest {manifest_path}")
    if result.failure_reason:
        print(f"flagged: {result.failure_reason}")
    return EXIT_OK


def _cmd_tfr(args: argparse.Namespace) -> int:
    signal = _read_signal(args.input)
    window = WindowSpec(length=args.window_len)
    config = SSTConfig(delta_xi=args.delta_xi, max_frequency=args.max_freq)
    transform = stft if args.method == "stft" else synchrosqueeze
    grid = transform(signal, window, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = skio.emit_tfr_plotdata(grid, out / args.method)
    skio.write_tfr_binary(grid, out / f"{args.method}.tfr")
    print(f"wrote {', '.join(str(p) for p in files.values())}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    try:
        if args.command == "bench":
            return _cmd_bench_run(args)
        if args.command == "decompose":
            return _cmd_decompose(args)
        return _cmd_tfr(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SiftKitError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
