"""Config-driven benchmark harness: methods x components x noise realizations.

Every realization synthesizes the clean signal, adds seeded noise
(seed = seed_base + realization index), runs each requested method with
ground-truth curve priors, and scores trimmed relative L2 errors per
component.  Aggregation is an index-ordered reduction, so the report is
bit-reproducible from (config, seed) regardless of the worker count.
Wall-clock timings are collected separately and never enter the report
payload.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .alif import ALIFConfig
from .errors import ConfigError, SiftKitError
from .presets import Preset, component_from_strings, get_preset, preset_schema
from .ridge import ExtractionConfig, IFCurve, extract_curve
from .sift import SIFTConfig, sift_decompose
from .signals import (
    Grid,
    IMTSpec,
    NoiseSpec,
    Signal,
    add_noise,
    relative_error_l2,
    snr_db,
    synthesize,
)
from .sst import SSTConfig, WindowSpec, bandpass_reconstruct, reconstruct_along_curve, synchrosqueeze

KNOWN_METHODS = ("BPF", "SST", "SST-tuned", "SIFT")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Benchmark description; everything here is plain data (JSON-friendly)."""

    preset: str | None = "example1"
    components: tuple[dict, ...] | None = None  # expression dicts, lowest first
    sample_rate: float = 100.0
    duration: float = 30.0
    noise_sd: float | None = None  # None -> preset default
    realizations: int = 1
    seed_base: int = 0
    methods: tuple[str, ...] = KNOWN_METHODS
    window_length: int = 377
    tuned_window_length: int = 677
    band_b: float = 0.1
    penalty: float = 1.0
    xi: float = 1.4
    prior_halfwidth: float = 0.5
    delta_xi: float = 0.01
    max_frequency: float = 10.0
    trim: float = 1.0
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema version {self.schema_version}")
        if self.preset is None and not self.components:
            raise ConfigError("config needs a preset name or component expressions")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        unknown = set(self.methods) - set(KNOWN_METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {KNOWN_METHODS}")
        if self.duration * self.sample_rate <= self.window_length:
            raise ConfigError("duration * sample_rate must exceed the window length")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.components is not None:
            object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        fields = set(cls.__dataclass_fields__)
        extra = set(data) - fields
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        coerced = dict(data)
        if "methods" in coerced:
            coerced["methods"] = tuple(coerced["methods"])
        if "components" in coerced and coerced["components"] is not None:
            coerced["components"] = tuple(coerced["components"])
        try:
            return cls(**coerced)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        data = asdict(self)
        data["methods"] = list(self.methods)
        if self.components is not None:
            data["components"] = [dict(c) for c in self.components]
        return data

    def grid(self) -> Grid:
        return Grid(int(round(self.duration * self.sample_rate)), self.sample_rate)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a JSON config or a flat ``key = value`` file (.toml/.cfg)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        data = _parse_flat_config(text, path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level config must be a mapping")
    return ExperimentConfig.from_dict(data)


def _parse_flat_config(text: str, path: Path) -> dict:
    data: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            data[key] = json.loads(value)
        except json.JSONDecodeError:
            data[key] = value.strip("\"'")
    return data


@dataclass(frozen=True)
class MethodCell:
    """Aggregate error of one method on one component."""

    method: str
    component: str
    mean: float
    std: float
    n_ok: int


@dataclass(frozen=True)
class RealizationRecord:
    index: int
    seed: int
    snr_db: float | None
    errors: dict  # method -> list of per-component errors (None on failure)
    messages: tuple[str, ...] = ()


@dataclass(frozen=True)
class BenchmarkReport:
    schema_version: int
    config: dict
    component_labels: tuple[str, ...]
    cells: tuple[MethodCell, ...]
    realizations: tuple[RealizationRecord, ...]
    failures: tuple[dict, ...]
    snr_mean: float | None
    snr_std: float | None

    def cell(self, method: str, component: str) -> MethodCell:
        for cell in self.cells:
            if cell.method == method and cell.component == component:
                return cell
        raise KeyError(f"no cell for {method}/{component}")

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "component_labels": list(self.component_labels),
            "cells": [asdict(c) for c in self.cells],
            "realizations": [
                {"index": r.index, "seed": r.seed, "snr_db": r.snr_db,
                 "errors": r.errors, "messages": list(r.messages)}
                for r in self.realizations
            ],
            "failures": [dict(f) for f in self.failures],
            "snr_mean": self.snr_mean,
            "snr_std": self.snr_std,
        }


def _resolve_components(config: ExperimentConfig) -> tuple[list[IMTSpec], list, float, bool]:
    """Components (lowest first), their frequency callables, noise sd, separation flag."""
    if config.preset is not None:
        preset: Preset = get_preset(config.preset)
        comps = list(preset.components)
        freqs = list(preset.frequencies)
        sd = preset.noise_sd if config.noise_sd is None else config.noise_sd
        return comps, freqs, sd, preset.separation_ok
    comps = []
    for entry in config.components or ():
        if "phase" not in entry:
            raise ConfigError("each component needs at least a 'phase' expression")
        comps.append(component_from_strings(
            entry.get("amplitude", "1.0"), entry["phase"], entry.get("frequency")))
    grid = config.grid()
    # string components fall back to finite-difference frequency tracks
    freqs = [_FrequencyFromSpec(c, grid) for c in comps]
    sd = config.noise_sd if config.noise_sd is not None else 0.0
    return comps, freqs, sd, True


class _FrequencyFromSpec:
    """Finite-difference frequency track of a component, picklable."""

    def __init__(self, spec: IMTSpec, grid: Grid) -> None:
        self._times = grid.times()
        self._values = spec.frequency_on(grid)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=float), self._times, self._values)


def _truth_curves(freq_fns: Sequence, grid: Grid, config: ExperimentConfig) -> list[IFCurve]:
    """Ground-truth curves snapped to the analysis bin axis (component order)."""
    n_bins = int(round(config.max_frequency / config.delta_xi)) + 1
    curves = []
    for fn in freq_fns:
        freqs = np.asarray(fn(grid.times()), dtype=float)
        bins = np.clip(np.rint(freqs / config.delta_xi), 0, n_bins - 1).astype(np.intp)
        curves.append(IFCurve(bins, bins * config.delta_xi))
    return curves


def _sst_config(config: ExperimentConfig) -> SSTConfig:
    return SSTConfig(delta_xi=config.delta_xi, max_frequency=config.max_frequency)


def _run_sst_method(noisy: Signal, curves: Sequence[IFCurve], window: WindowSpec,
                    config: ExperimentConfig) -> list[Signal]:
    sst_grid = synchrosqueeze(noisy, window, _sst_config(config))
    estimates = []
    for curve in curves:
        extraction = ExtractionConfig(
            penalty=config.penalty, prior=curve, prior_halfwidth=config.prior_halfwidth
        )
        refined = extract_curve(sst_grid, extraction)
        recon = reconstruct_along_curve(sst_grid, refined, config.band_b, window)
        estimates.append(noisy.with_samples(2.0 * np.real(recon.samples)))
    return estimates


def _run_bpf_method(noisy: Signal, freq_fns: Sequence, grid: Grid,
                    config: ExperimentConfig) -> list[Signal]:
    estimates = []
    nyquist = config.sample_rate / 2.0
    for fn in freq_fns:
        freqs = np.asarray(fn(grid.times()), dtype=float)
        low = max(0.0, float(freqs.min()) - config.band_b)
        high = min(nyquist, float(freqs.max()) + config.band_b)
        estimates.append(bandpass_reconstruct(noisy, low, high))
    return estimates


def _run_sift_method(noisy: Signal, curves: Sequence[IFCurve],
                     config: ExperimentConfig) -> list[Signal | None]:
    order = np.argsort([-c.mean_frequency() for c in curves])  # highest first
    priors = tuple(curves[i] for i in order)
    sift_config = SIFTConfig(
        sst=_sst_config(config),
        window=WindowSpec(length=config.window_length),
        extraction=ExtractionConfig(penalty=config.penalty,
                                    prior_halfwidth=config.prior_halfwidth),
        alif=ALIFConfig(),
        xi=config.xi,
        max_components=len(curves),
        priors=priors,
    )
    result = sift_decompose(noisy, sift_config)
    by_prior = result.component_estimates()
    estimates: list[Signal | None] = [None] * len(curves)
    for pass_index, comp_index in enumerate(order):
        estimates[comp_index] = by_prior.get(pass_index)
    return estimates


def run_realization(config: ExperimentConfig, index: int) -> RealizationRecord:
    """Synthesize + noise + all methods for one seed; failures become None errors."""
    comps, freq_fns, sd, _ = _resolve_components(config)
    grid = config.grid()
    truth = [synthesize(c, grid, real=True) for c in comps]
    clean = truth[0]
    for extra in truth[1:]:
        clean = clean + extra
    seed = config.seed_base + index
    if sd > 0:
        noisy, noise = add_noise(clean, NoiseSpec(sd, seed))
        snr = snr_db(clean, noise)
    else:
        noisy, snr = clean, None
    curves = _truth_curves(freq_fns, grid, config)

    errors: dict[str, list[float | None]] = {}
    messages: list[str] = []
    for method in config.methods:
        try:
            if method == "BPF":
                estimates = _run_bpf_method(noisy, freq_fns, grid, config)
            elif method == "SST":
                estimates = _run_sst_method(noisy, curves, WindowSpec(config.window_length), config)
            elif method == "SST-tuned":
                estimates = _run_sst_method(noisy, curves, WindowSpec(config.tuned_window_length), config)
            elif method == "SIFT":
                estimates = _run_sift_method(noisy, curves, config)
            else:  # pragma: no cover - blocked by config validation
                raise ConfigError(f"unknown method {method}")
            method_errors: list[float | None] = []
            for est, ref in zip(estimates, truth):
                if est is None:
                    method_errors.append(None)
                    continue
                err = relative_error_l2(est, ref, trim=config.trim)
                method_errors.append(err if np.isfinite(err) else None)
            errors[method] = method_errors
        except (SiftKitError, FloatingPointError, np.linalg.LinAlgError) as exc:
            errors[method] = [None] * len(truth)
            messages.append(f"{method}: {exc}")
    return RealizationRecord(index=index, seed=seed, snr_db=snr, errors=errors,
                             messages=tuple(messages))


def run_benchmark(config: ExperimentConfig) -> tuple[BenchmarkReport, dict]:
    """Run all realizations; returns the report and a wall-clock timing dict."""
    comps, _, _, _ = _resolve_components(config)
    labels = tuple(f"IMT{k + 1}" for k in range(len(comps)))

    started = time.perf_counter()
    if config.workers > 1 and config.realizations > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_worker, [(config.to_dict(), i) for i in range(config.realizations)]))
    else:
        records = [run_realization(config, i) for i in range(config.realizations)]
    records.sort(key=lambda r: r.index)
    elapsed = time.perf_counter() - started

    failures: list[dict] = []
    cells: list[MethodCell] = []
    for method in config.methods:
        for k, label in enumerate(labels):
            values = []
            for record in records:
                per_method = record.errors.get(method)
                err = per_method[k] if per_method else None
                if err is None:
                    failures.append({"realization": record.index, "method": method,
                                     "component": label,
                                     "message": _failure_message(record, method)})
                else:
                    values.append(err)
            mean = float(np.mean(values)) if values else float("nan")
            std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            cells.append(MethodCell(method, label, mean, std, len(values)))

    snrs = [r.snr_db for r in records if r.snr_db is not None]
    report = BenchmarkReport(
        schema_version=SCHEMA_VERSION,
        config=_config_echo(config),
        component_labels=labels,
        cells=tuple(cells),
        realizations=tuple(records),
        failures=tuple(failures),
        snr_mean=float(np.mean(snrs)) if snrs else None,
        snr_std=float(np.std(snrs, ddof=1)) if len(snrs) > 1 else (0.0 if snrs else None),
    )
    timing = {"total_seconds": elapsed, "realizations": config.realizations}
    return report, timing


def _failure_message(record: RealizationRecord, method: str) -> str:
    for msg in record.messages:
        if msg.startswith(method + ":"):
            return msg
    return "method produced no finite estimate"


def _worker(payload: tuple[dict, int]) -> RealizationRecord:
    data, index = payload
    return run_realization(ExperimentConfig.from_dict(data), index)


def _config_echo(config: ExperimentConfig) -> dict:
    echo = config.to_dict()
    if config.preset is not None:
        echo["preset_formulas"] = dict(preset_schema(config.preset))
    return echo


# ---------------------------------------------------------------------------
# report emission


def emit_report(report: BenchmarkReport, fmt: str, path: str | Path) -> Path:
    """Serialize a report deterministically as csv, json or a markdown table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    elif fmt == "csv":
        path.write_text(_report_to_csv(report))
    elif fmt == "markdown-table":
        path.write_text(_report_to_markdown(report))
    else:
        raise ConfigError(f"unknown report format {fmt!r}")
    return path


def _report_to_csv(report: BenchmarkReport) -> str:
    import csv
    import io as _io

    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["record", "method", "component", "realization", "seed", "a", "b", "c"])
    writer.writerow(["schema", "", "", "", "", str(report.schema_version), "", ""])
    writer.writerow(["config", "", "", "", "", json.dumps(report.config, sort_keys=True), "", ""])
    writer.writerow(["labels", "", "", "", "", json.dumps(list(report.component_labels)), "", ""])
    snr_mean = "" if report.snr_mean is None else repr(report.snr_mean)
    snr_std = "" if report.snr_std is None else repr(report.snr_std)
    writer.writerow(["snr", "", "", "", "", snr_mean, snr_std, ""])
    for cell in report.cells:
        writer.writerow(["aggregate", cell.method, cell.component, "", "",
                         repr(cell.mean), repr(cell.std), str(cell.n_ok)])
    for record in report.realizations:
        snr = "" if record.snr_db is None else repr(record.snr_db)
        writer.writerow(["realization", "", "", str(record.index), str(record.seed), snr, "", ""])
        for method in report.config["methods"]:
            per_method = record.errors.get(method)
            if per_method is None:
                continue
            for k, err in enumerate(per_method):
                value = "" if err is None else repr(err)
                writer.writerow(["error", method, report.component_labels[k],
                                 str(record.index), str(record.seed), value, "", ""])
        for message in record.messages:
            writer.writerow(["message", "", "", str(record.index), "", message, "", ""])
    for failure in report.failures:
        writer.writerow(["failure", failure["method"], failure.get("component", ""),
                         str(failure["realization"]), "", failure["message"], "", ""])
    return buffer.getvalue()


def parse_report_csv(path: str | Path) -> BenchmarkReport:
    """Inverse of the csv emission (used by round-trip checks and tooling)."""
    import csv

    rows = list(csv.reader(Path(path).read_text().splitlines()))
    if not rows or rows[0][0] != "record":
        raise ConfigError(f"{path} is not a benchmark report CSV")
    schema = None
    config: dict = {}
    labels: tuple[str, ...] = ()
    snr_mean = snr_std = None
    cells: list[MethodCell] = []
    failures: list[dict] = []
    realizations: dict[int, dict] = {}
    for row in rows[1:]:
        kind = row[0]
        if kind == "schema":
            schema = int(row[5])
        elif kind == "config":
            config = json.loads(row[5])
        elif kind == "labels":
            labels = tuple(json.loads(row[5]))
        elif kind == "snr":
            snr_mean = float(row[5]) if row[5] else None
            snr_std = float(row[6]) if row[6] else None
        elif kind == "aggregate":
            cells.append(MethodCell(row[1], row[2], float(row[5]), float(row[6]), int(row[7])))
        elif kind == "realization":
            idx = int(row[3])
            realizations[idx] = {
                "seed": int(row[4]),
                "snr": float(row[5]) if row[5] else None,
                "errors": {},
                "messages": [],
            }
        elif kind == "error":
            idx = int(row[3])
            entry = realizations[idx]
            entry["errors"].setdefault(row[1], [None] * len(labels))
            entry["errors"][row[1]][labels.index(row[2])] = float(row[5]) if row[5] else None
        elif kind == "message":
            realizations[int(row[3])]["messages"].append(row[5])
        elif kind == "failure":
            failures.append({"realization": int(row[3]), "method": row[1],
                             "component": row[2], "message": row[5]})
    records = tuple(
        RealizationRecord(index=idx, seed=entry["seed"], snr_db=entry["snr"],
                          errors=entry["errors"], messages=tuple(entry["messages"]))
        for idx, entry in sorted(realizations.items())
    )
    return BenchmarkReport(
        schema_version=schema if schema is not None else SCHEMA_VERSION,
        config=config,
        component_labels=labels,
        cells=tuple(cells),
        realizations=records,
        failures=tuple(failures),
        snr_mean=snr_mean,
        snr_std=snr_std,
    )


def _report_to_markdown(report: BenchmarkReport) -> str:
    methods = list(report.config["methods"])
    lines = ["| | " + " | ".join(methods) + " |",
             "|---" * (len(methods) + 1) + "|"]
    for label in report.component_labels:
        cells = []
        for method in methods:
            cell = report.cell(method, label)
            if np.isnan(cell.mean):
                cells.append("-")
            elif cell.std > 0:
                cells.append(f"{cell.mean:.4f} ({cell.std:.4f})")
            else:
                cells.append(f"{cell.mean:.4f}")
        lines.append(f"| {label} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
