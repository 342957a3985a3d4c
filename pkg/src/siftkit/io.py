"""File formats: signal CSV/binary, TFR export, curve CSV and result manifests.

Binary signal layout (little-endian):
    8 bytes magic ``SIFTKSIG``, uint32 version (1),
    float64 sample_rate, uint64 length, then ``length`` float64 samples.

Binary TFR layout (little-endian):
    8 bytes magic ``SIFTKTFR``, uint32 version (1),
    uint64 n_bins, uint64 n_frames, float64 delta_xi, float64 frame_dt,
    float64 first_frame_time, float64 first_bin_frequency,
    then row-major (bin-major) complex pairs (float64 real, float64 imag).
"""
from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidSpecError
from .ridge import IFCurve
from .signals import Signal
from .sst import TFRGrid

SIGNAL_MAGIC = b"SIFTKSIG"
TFR_MAGIC = b"SIFTKTFR"
FORMAT_VERSION = 1


def write_signal_csv(signal: Signal, path: str | Path) -> Path:
    """Two columns: time, value.  Complex values use Python's ``a+bj`` notation."""
    path = Path(path)
    times = signal.times()
    with path.open("w", encoding="utf-8") as fh:
        fh.write("time,value\n")
        for t, v in zip(times, signal.samples):
            value = repr(complex(v)) if signal.is_complex else repr(float(v))
            fh.write(f"{t!r},{value}\n")
    return path


def read_signal_csv(path: str | Path) -> Signal:
    path = Path(path)
    times: list[float] = []
    values: list[complex] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("time"):
            raise InvalidSpecError(f"{path} does not look like a signal CSV")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t_str, v_str = line.split(",", 1)
            times.append(float(t_str))
            values.append(complex(v_str.strip("()")))
    if len(times) < 2:
        raise InvalidSpecError("signal CSV needs at least two samples")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise InvalidSpecError("signal CSV must be uniformly sampled")
    arr = np.asarray(values)
    if np.allclose(arr.imag, 0.0):
        arr = arr.real
    return Signal(arr, 1.0 / steps[0], times[0])


def write_signal_binary(signal: Signal, path: str | Path) -> Path:
    if signal.is_complex:
        raise InvalidSpecError("binary signal format stores real samples only")
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(SIGNAL_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<d", signal.sample_rate))
        fh.write(struct.pack("<Q", len(signal)))
        fh.write(np.asarray(signal.samples, dtype="<f8").tobytes())
    return path


def read_signal_binary(path: str | Path) -> Signal:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != SIGNAL_MAGIC:
        raise InvalidSpecError(f"{path} is not a binary signal file")
    (version,) = struct.unpack_from("<I", raw, 8)
    if version != FORMAT_VERSION:
        raise InvalidSpecError(f"unsupported signal format version {version}")
    (rate,) = struct.unpack_from("<d", raw, 12)
    (length,) = struct.unpack_from("<Q", raw, 20)
    samples = np.frombuffer(raw, dtype="<f8", count=length, offset=28)
    return Signal(samples.copy(), rate)


def write_tfr_binary(grid: TFRGrid, path: str | Path) -> Path:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(TFR_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<QQ", grid.n_bins, grid.n_frames))
        fh.write(struct.pack(
            "<dddd",
            grid.delta_xi,
            grid.frame_dt,
            float(grid.frame_times[0]),
            float(grid.bin_frequencies[0]),
        ))
        fh.write(np.ascontiguousarray(grid.values, dtype="<c16").tobytes())
    return path


def read_tfr_binary(path: str | Path) -> TFRGrid:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != TFR_MAGIC:
        raise InvalidSpecError(f"{path} is not a binary TFR file")
    (version,) = struct.unpack_from("<I", raw, 8)
    if version != FORMAT_VERSION:
        raise InvalidSpecError(f"unsupported TFR format version {version}")
    n_bins, n_frames = struct.unpack_from("<QQ", raw, 12)
    delta_xi, frame_dt, t0, f0 = struct.unpack_from("<dddd", raw, 28)
    values = np.frombuffer(raw, dtype="<c16", count=n_bins * n_frames, offset=60)
    return TFRGrid(
        values.reshape(n_bins, n_frames).copy(),
        t0 + np.arange(n_frames) * frame_dt,
        f0 + np.arange(n_bins) * delta_xi,
    )


def emit_tfr_plotdata(grid: TFRGrid, path: str | Path) -> dict[str, Path]:
    """Magnitude CSV plus one axis file per dimension, full float precision."""
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    magnitude_path = base.with_name(base.name + "_magnitude.csv")
    times_path = base.with_name(base.name + "_frame_times.csv")
    freqs_path = base.with_name(base.name + "_bin_frequencies.csv")
    np.savetxt(magnitude_path, grid.magnitude(), delimiter=",", fmt="%.17g")
    np.savetxt(times_path, grid.frame_times, delimiter=",", fmt="%.17g")
    np.savetxt(freqs_path, grid.bin_frequencies, delimiter=",", fmt="%.17g")
    return {"magnitude": magnitude_path, "frame_times": times_path,
            "bin_frequencies": freqs_path}


def write_curve_csv(curve: IFCurve, frame_times: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("frame_time,frequency_hz\n")
        for t, f in zip(frame_times, curve.frequencies):
            fh.write(f"{t!r},{f!r}\n")
    return path


def save_decomposition(imts: Sequence[Signal], trend: Signal,
                       iterations_used: Sequence[int], out_dir: str | Path,
                       config_echo: dict | None = None) -> Path:
    """One CSV per part plus a JSON manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k, imt in enumerate(imts):
        name = f"imt_{k:03d}.csv"
        write_signal_csv(imt, out / name)
        files.append(name)
    write_signal_csv(trend, out / "trend.csv")
    manifest = {
        "component_count": len(imts),
        "components": files,
        "trend": "trend.csv",
        "iterations_used": list(iterations_used),
        "config": config_echo or {},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest_path


def save_sift_result(result, frame_times: np.ndarray, out_dir: str | Path,
                     config_echo: dict | None = None) -> Path:
    """Component CSVs, curve CSVs and a manifest with convergence diagnostics."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    component_files = []
    for k, imt in enumerate(result.imts):
        name = f"imt_{k:03d}.csv"
        write_signal_csv(imt, out / name)
        component_files.append(name)
    write_signal_csv(result.residual, out / "residual.csv")
    curve_files = []
    for k, curve in enumerate(result.curves):
        name = f"curve_{k:03d}.csv"
        write_curve_csv(curve, frame_times, out / name)
        curve_files.append(name)
    manifest = {
        "component_count": len(result.imts),
        "components": component_files,
        "residual": "residual.csv",
        "curves": curve_files,
        "diagnostics": [asdict(d) for d in result.diagnostics],
        "failure_reason": result.failure_reason,
        "config": config_echo or {},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest_path
