"""Short-time Fourier transform, synchrosqueezing, ridge-band reconstruction
and a zero-phase bandpass baseline.

STFT convention (modulated window, frames at every sample):

    V(t_m, eta_q) = sum_j f(t_j) h(t_j - t_m) exp(-i 2 pi eta_q (t_j - t_m)) dt

With this convention a tone keeps its phase in the coefficients and the
band reconstruction normalizer is the window peak ``h(0)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatchError,
    InvalidBandError,
    InvalidCurveError,
    InvalidWindowError,
)
from .signals import Signal


@dataclass(frozen=True)
class WindowSpec:
    """Gaussian window ``exp(-u^2/2)`` with ``u`` on ``[-support, support]``
    sampled at ``length`` equally spaced points.

    The window always spans ``length`` signal samples; a longer ``length``
    therefore stretches the same Gaussian shape over more time.
    """

    length: int = 377
    support: float = 6.0

    def __post_init__(self) -> None:
        if self.length < 3 or self.length % 2 == 0:
            raise InvalidWindowError("window length must be odd and >= 3")
        if self.support <= 0:
            raise InvalidWindowError("window support must be positive")

    @property
    def half(self) -> int:
        return self.length // 2

    def samples(self) -> np.ndarray:
        u = np.linspace(-self.support, self.support, self.length)
        return np.exp(-0.5 * u**2)

    def derivative_samples(self, sample_rate: float) -> np.ndarray:
        """d/dtau of the window in signal time, evaluated at the sample offsets."""
        u = np.linspace(-self.support, self.support, self.length)
        du_dtau = 2.0 * self.support / (self.length - 1) * sample_rate
        return -u * du_dtau * np.exp(-0.5 * u**2)

    def peak(self) -> float:
        return 1.0

    def time_scale(self, sample_rate: float) -> float:
        """Standard deviation of the window in signal-time seconds."""
        return (self.length - 1) / (2.0 * self.support * sample_rate)


@dataclass(frozen=True)
class SSTConfig:
    """Frequency axis and reassignment threshold."""

    delta_xi: float = 0.01
    magnitude_threshold: float = 1e-4
    max_frequency: float = 10.0

    def __post_init__(self) -> None:
        if self.delta_xi <= 0:
            raise InvalidBandError("delta_xi must be positive")
        if not 0 <= self.magnitude_threshold < 1:
            raise InvalidBandError("magnitude threshold must be in [0, 1)")
        if self.max_frequency <= 0:
            raise InvalidBandError("max_frequency must be positive")

    def bin_frequencies(self) -> np.ndarray:
        n_bins = int(round(self.max_frequency / self.delta_xi)) + 1
        return np.arange(n_bins) * self.delta_xi


@dataclass(frozen=True)
class TFRGrid:
    """Complex time-frequency matrix: rows are frequency bins, columns frames."""

    values: np.ndarray
    frame_times: np.ndarray
    bin_frequencies: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        times = np.asarray(self.frame_times, dtype=np.float64)
        freqs = np.asarray(self.bin_frequencies, dtype=np.float64)
        if values.ndim != 2 or values.shape != (freqs.size, times.size):
            raise GridMismatchError(
                f"values shape {values.shape} does not match axes "
                f"({freqs.size} bins x {times.size} frames)"
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise GridMismatchError("frame times must be strictly increasing")
        if freqs.size > 1:
            steps = np.diff(freqs)
            if not np.all(steps > 0) or not np.allclose(steps, steps[0], rtol=1e-9):
                raise GridMismatchError("bin frequencies must increase uniformly")
        if not np.all(np.isfinite(values)):
            raise GridMismatchError("grid values must be finite")
        for name, arr in (("values", values), ("frame_times", times),
                          ("bin_frequencies", freqs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_bins(self) -> int:
        return self.bin_frequencies.size

    @property
    def n_frames(self) -> int:
        return self.frame_times.size

    @property
    def delta_xi(self) -> float:
        if self.n_bins < 2:
            return 0.0
        return float(self.bin_frequencies[1] - self.bin_frequencies[0])

    @property
    def frame_dt(self) -> float:
        if self.n_frames < 2:
            return 0.0
        return float(self.frame_times[1] - self.frame_times[0])

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def same_axes(self, other: "TFRGrid") -> bool:
        return (
            self.values.shape == other.values.shape
            and np.allclose(self.frame_times, other.frame_times, rtol=0, atol=1e-12)
            and np.allclose(self.bin_frequencies, other.bin_frequencies, rtol=0, atol=1e-12)
        )


def _window_transform(signal: Signal, window_samples: np.ndarray,
                      freqs: np.ndarray) -> np.ndarray:
    n = len(signal)
    length = window_samples.size
    if length >= n:
        raise InvalidWindowError(
            f"window of {length} samples does not fit a {n}-sample signal"
        )
    half = length // 2
    dt = signal.dt
    offsets = np.arange(-half, half + 1) * dt
    kernel = np.exp(-2j * np.pi * np.outer(freqs, offsets)) * (window_samples * dt)
    padded = np.pad(signal.samples, half, mode="constant")
    segments = np.lib.stride_tricks.sliding_window_view(padded, length)
    return kernel @ segments.T


def stft(signal: Signal, window: WindowSpec, config: SSTConfig) -> TFRGrid:
    """Short-time Fourier transform on bins ``0..max_frequency`` at every sample."""
    freqs = config.bin_frequencies()
    values = _window_transform(signal, window.samples(), freqs)
    return TFRGrid(values, signal.times(), freqs)


def synchrosqueeze(signal: Signal, window: WindowSpec, config: SSTConfig) -> TFRGrid:
    """Reassign STFT coefficients to their instantaneous-frequency estimates.

    Coefficients below ``magnitude_threshold`` times the grid maximum are
    dropped; estimates outside the frequency axis are dropped as well.
    """
    freqs = config.bin_frequencies()
    base = _window_transform(signal, window.samples(), freqs)
    derived = _window_transform(signal, window.derivative_samples(signal.sample_rate), freqs)

    magnitude = np.abs(base)
    floor = config.magnitude_threshold * magnitude.max() if magnitude.size else 0.0
    keep = magnitude > floor

    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.imag(derived / base) / (2.0 * np.pi)
    omega = freqs[:, None] - shift

    target = np.rint(omega / config.delta_xi)
    valid = keep & np.isfinite(target) & (target >= 0) & (target < freqs.size)

    squeezed = np.zeros_like(base)
    rows = target[valid].astype(np.intp)
    cols = np.nonzero(valid)[1]
    np.add.at(squeezed, (rows, cols), base[valid])
    return TFRGrid(squeezed, signal.times(), freqs)


def reconstruct_along_curve(sst: TFRGrid, curve, band_b: float,
                            window: WindowSpec) -> Signal:
    """Band-sum of squeezed coefficients around a frequency curve, per frame.

    Each frame contributes ``delta_xi / h(0)`` times the sum of coefficients in
    bins within ``band_b`` Hz of the curve.  Returns a complex signal sampled at
    the frame times.
    """
    from .ridge import IFCurve  # local import to avoid a cycle

    if not isinstance(curve, IFCurve):
        raise InvalidCurveError("curve must be an IFCurve")
    if band_b <= 0:
        raise InvalidBandError("band_b must be positive")
    if curve.bins.size != sst.n_frames:
        raise InvalidCurveError(
            f"curve has {curve.bins.size} frames, grid has {sst.n_frames}"
        )
    if np.any(curve.bins < 0) or np.any(curve.bins >= sst.n_bins):
        raise InvalidCurveError("curve bin indices out of grid range")

    delta = sst.delta_xi
    base = float(sst.bin_frequencies[0])
    lo = np.ceil((curve.frequencies - band_b - base) / delta - 1e-9).astype(np.intp)
    hi = np.floor((curve.frequencies + band_b - base) / delta + 1e-9).astype(np.intp)
    lo = np.clip(lo, 0, sst.n_bins)
    hi = np.clip(hi, -1, sst.n_bins - 1)

    csum = np.concatenate(
        [np.zeros((1, sst.n_frames), dtype=np.complex128), np.cumsum(sst.values, axis=0)]
    )
    cols = np.arange(sst.n_frames)
    sums = csum[hi + 1, cols] - csum[lo, cols]
    empty = lo > hi
    if np.any(empty):
        sums = np.where(empty, 0.0, sums)
        warnings.warn(
            f"empty reconstruction band on {int(np.count_nonzero(empty))} frames",
            RuntimeWarning,
            stacklevel=2,
        )
    samples = sums * (delta / window.peak())
    rate = 1.0 / sst.frame_dt if sst.n_frames > 1 else 1.0
    return Signal(samples, rate, float(sst.frame_times[0]))


def bandpass_reconstruct(signal: Signal, low: float, high: float) -> Signal:
    """Zero-phase bandpass: DFT, zero all bins outside ``[low, high]``, invert."""
    nyquist = signal.sample_rate / 2.0
    if not (0 <= low < high <= nyquist + 1e-12):
        raise InvalidBandError(
            f"band [{low}, {high}] must satisfy 0 <= low < high <= {nyquist}"
        )
    if signal.is_complex:
        spectrum = np.fft.fft(signal.samples)
        freqs = np.fft.fftfreq(len(signal), d=signal.dt)
        mask = (freqs >= low - 1e-12) & (freqs <= high + 1e-12)
        return signal.with_samples(np.fft.ifft(spectrum * mask))
    spectrum = np.fft.rfft(signal.samples)
    freqs = np.fft.rfftfreq(len(signal), d=signal.dt)
    mask = (freqs >= low - 1e-12) & (freqs <= high + 1e-12)
    return signal.with_samples(np.fft.irfft(spectrum * mask, n=len(signal)))
