"""Core signal types, synthetic signal generation, noise and error metrics.

Conventions used throughout the package:

* signals are uniformly sampled, sample ``j`` lives at ``start_time + j / sample_rate``;
* oscillatory components are written ``A(t) * exp(i * 2*pi * phi(t))`` with
  positive amplitude ``A`` and strictly increasing phase ``phi``;
* the instantaneous frequency of a component is ``phi'(t)`` in Hz.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    GridMismatchError,
    InvalidSpecError,
    UndefinedErrorMetric,
    UndefinedSNRError,
)

TimeFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Grid:
    """Uniform sample grid: ``n`` samples at ``sample_rate`` Hz from ``start_time``."""

    n: int
    sample_rate: float = 100.0
    start_time: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpecError("grid needs at least one sample")
        if not np.isfinite(self.sample_rate) or self.sample_rate <= 0:
            raise InvalidSpecError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.n * self.dt

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.n) / self.sample_rate


@dataclass(frozen=True)
class Signal:
    """Immutable uniformly sampled time series (real or complex)."""

    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidSpecError("samples must be a nonempty 1-D sequence")
        if not np.isfinite(self.sample_rate) or self.sample_rate <= 0:
            raise InvalidSpecError(f"sample_rate must be positive, got {self.sample_rate}")
        dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
        arr = np.array(arr, dtype=dtype)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def grid(self) -> Grid:
        return Grid(self.samples.size, self.sample_rate, self.start_time)

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    def times(self) -> np.ndarray:
        return self.grid.times()

    def with_samples(self, samples: np.ndarray) -> "Signal":
        """New signal on the same grid."""
        if np.asarray(samples).shape != self.samples.shape:
            raise GridMismatchError("replacement samples must keep the length")
        return Signal(samples, self.sample_rate, self.start_time)

    def real(self) -> "Signal":
        return self.with_samples(np.real(self.samples))

    def same_grid(self, other: "Signal") -> bool:
        return (
            len(self) == len(other)
            and np.isclose(self.sample_rate, other.sample_rate, rtol=0, atol=1e-12)
            and np.isclose(self.start_time, other.start_time, rtol=0, atol=1e-12)
        )

    def _require_same_grid(self, other: "Signal") -> None:
        if not self.same_grid(other):
            raise GridMismatchError("signals are not on the same sample grid")

    def __add__(self, other: "Signal") -> "Signal":
        self._require_same_grid(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "Signal") -> "Signal":
        self._require_same_grid(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, factor: float) -> "Signal":
        return self.with_samples(self.samples * factor)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.samples))

    def trimmed(self, trim_seconds: float) -> np.ndarray:
        """Samples with ``trim_seconds`` removed at each end."""
        k = int(round(trim_seconds * self.sample_rate))
        if k < 0 or 2 * k >= len(self):
            raise InvalidSpecError(
                f"trim of {trim_seconds}s removes the whole {self.duration}s signal"
            )
        return self.samples[k : len(self) - k] if k else self.samples


@dataclass(frozen=True)
class IMTSpec:
    """One oscillatory component ``A(t) e^{i 2 pi phi(t)}``.

    ``epsilon`` bounds the relative variation of amplitude and frequency:
    ``|A'| <= epsilon * phi'`` and ``|phi''| <= epsilon * phi'``.
    ``phase_second_derivative_bound`` is a finite upper bound on ``|phi''|``.
    """

    amplitude: TimeFunction
    phase: TimeFunction
    epsilon: float = 0.0
    phase_second_derivative_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise InvalidSpecError("epsilon must be nonnegative")
        if not np.isfinite(self.phase_second_derivative_bound):
            raise InvalidSpecError("phase second-derivative bound must be finite")

    def amplitude_on(self, grid: Grid) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.amplitude(grid.times()), dtype=float), (grid.n,)).copy()

    def phase_on(self, grid: Grid) -> np.ndarray:
        return np.asarray(self.phase(grid.times()), dtype=float)

    def frequency_on(self, grid: Grid) -> np.ndarray:
        """Instantaneous frequency phi'(t) by central finite differences."""
        return np.gradient(self.phase_on(grid), grid.dt)

    def check_boundedness(self, grid: Grid) -> None:
        """Raise unless A > 0 and phi is strictly increasing on the grid."""
        amp = self.amplitude_on(grid)
        if not np.all(amp > 0):
            raise InvalidSpecError("amplitude must be positive on the grid")
        if grid.n > 1 and not np.all(np.diff(self.phase_on(grid)) > 0):
            raise InvalidSpecError("phase must be strictly increasing on the grid")

    def check_growth(self, grid: Grid, slack: float = 1e-6) -> None:
        """Finite-difference check of the growth conditions; raise on violation.

        ``slack`` absorbs the discretisation error of the derivative estimates.
        """
        self.check_boundedness(grid)
        t = grid.times()
        amp = self.amplitude_on(grid)
        freq = self.frequency_on(grid)
        amp_rate = np.gradient(amp, grid.dt)
        freq_rate = np.gradient(freq, grid.dt)
        budget = self.epsilon * freq + slack * np.max(freq) + 1e-12
        if np.any(np.abs(amp_rate) > budget):
            j = int(np.argmax(np.abs(amp_rate) - budget))
            raise InvalidSpecError(
                f"|A'| exceeds epsilon*phi' at t={t[j]:.4f} "
                f"({abs(amp_rate[j]):.4g} > {budget[j]:.4g})"
            )
        if np.any(np.abs(freq_rate) > budget):
            j = int(np.argmax(np.abs(freq_rate) - budget))
            raise InvalidSpecError(
                f"|phi''| exceeds epsilon*phi' at t={t[j]:.4f} "
                f"({abs(freq_rate[j]):.4g} > {budget[j]:.4g})"
            )


@dataclass(frozen=True)
class AHMSpec:
    """Finite sum of components whose frequencies stay ``separation`` Hz apart."""

    components: Sequence[IMTSpec]
    separation: float

    def __post_init__(self) -> None:
        if len(self.components) == 0:
            raise InvalidSpecError("at least one component required")
        if self.separation <= 0:
            raise InvalidSpecError("separation must be positive")
        object.__setattr__(self, "components", tuple(self.components))

    def check_separation(self, grid: Grid, slack: float = 1e-9) -> None:
        freqs = [c.frequency_on(grid) for c in self.components]
        for low, high in zip(freqs, freqs[1:]):
            gap = high - low
            if np.any(gap < self.separation - slack):
                j = int(np.argmin(gap))
                raise InvalidSpecError(
                    f"separation violated at t index {j}: gap {gap[j]:.4g} < {self.separation}"
                )


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded additive white Gaussian noise (PCG64 generator, Box-Muller family)."""

    standard_deviation: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.standard_deviation < 0:
            raise InvalidSpecError("standard deviation must be nonnegative")

    def realize(self, n: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(self.seed))
        return self.standard_deviation * rng.standard_normal(n)


def synthesize(spec: IMTSpec | AHMSpec, grid: Grid, real: bool = False) -> Signal:
    """Evaluate a component (or sum of components) on a grid.

    Complex analytic samples by default; ``real=True`` projects to the real part.
    """
    comps = spec.components if isinstance(spec, AHMSpec) else (spec,)
    if isinstance(spec, AHMSpec):
        spec.check_separation(grid)
    t = grid.times()
    total = np.zeros(grid.n, dtype=np.complex128)
    for comp in comps:
        comp.check_boundedness(grid)
        total += comp.amplitude_on(grid) * np.exp(2j * np.pi * comp.phase_on(grid))
    samples = total.real if real else total
    return Signal(samples, grid.sample_rate, grid.start_time)


def add_noise(signal: Signal, noise: NoiseSpec) -> tuple[Signal, Signal]:
    """Return ``(signal + noise, noise)``; bit-reproducible from the seed."""
    realization = noise.realize(len(signal))
    noisy = signal.with_samples(signal.samples + realization)
    return noisy, Signal(realization, signal.sample_rate, signal.start_time)


def snr_db(signal: Signal, noise: Signal) -> float:
    """``20 log10(||signal|| / ||noise||)`` in dB."""
    signal._require_same_grid(noise)
    noise_norm = noise.norm()
    if noise_norm == 0.0:
        raise UndefinedSNRError("noise has zero norm")
    return 20.0 * float(np.log10(signal.norm() / noise_norm))


def count_extrema(signal: Signal) -> int:
    """Strict interior local maxima plus minima; an equal-value plateau counts once."""
    if signal.is_complex:
        raise InvalidSpecError("extrema are defined for real signals only")
    x = signal.samples
    diffs = np.diff(x)
    signs = np.sign(diffs)
    signs = signs[signs != 0]  # collapse plateaus
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def relative_error_l2(estimate: Signal, truth: Signal, trim: float = 0.0) -> float:
    """``||estimate - truth|| / ||truth||`` with ``trim`` seconds dropped at each end."""
    estimate._require_same_grid(truth)
    est = estimate.trimmed(trim)
    ref = truth.trimmed(trim)
    ref_norm = float(np.linalg.norm(ref))
    if ref_norm == 0.0:
        raise UndefinedErrorMetric("reference signal is zero on the trimmed window")
    return float(np.linalg.norm(est - ref)) / ref_norm


def interior_slice(signal: Signal, margin_seconds: float) -> slice:
    """Index slice excluding ``margin_seconds`` at each end."""
    k = int(round(margin_seconds * signal.sample_rate))
    if 2 * k >= len(signal):
        raise InvalidSpecError("margin removes the whole signal")
    return slice(k, len(signal) - k)
