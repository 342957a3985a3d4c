"""Adaptive local iterative filtering: position-dependent Gaussian moving
averages, their high-pass iterates and the two-loop decomposition.

The smoothing kernel centered at time ``y`` is a Gaussian with a local width
``sigma(y)`` (seconds):

    weight(y, x) ~ exp(-|y - x|^2 / sigma(y)^2)

Rows are truncated where the exponent drops below -36 and renormalized to sum
to one, so constants are preserved exactly on any finite grid.  A single pass
attenuates a tone of frequency ``nu`` by ``exp(-pi^2 nu^2 sigma^2)``; iterating
``signal - average`` therefore sharpens into a high-pass filter whose response
is ``(1 - exp(-pi^2 nu^2 sigma^2))^K`` — see :func:`theoretical_attenuation`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import GridMismatchError, InvalidProfileError
from .signals import Grid, Signal, count_extrema

TRUNCATION_EXPONENT = 36.0  # weights below exp(-36) ~ 2.3e-16 are dropped

BoundaryExtension = Literal["reflect", "periodic", "none"]


@dataclass(frozen=True)
class BandwidthProfile:
    """Per-sample positive kernel width sigma(t_j), in seconds."""

    sigma: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.sigma, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidProfileError("sigma must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(arr)) or np.min(arr) <= 0:
            raise InvalidProfileError("sigma must be finite and strictly positive")
        arr.setflags(write=False)
        object.__setattr__(self, "sigma", arr)

    def __len__(self) -> int:
        return self.sigma.size

    @classmethod
    def constant(cls, sigma: float, n: int) -> "BandwidthProfile":
        return cls(np.full(n, float(sigma)))

    def require_aligned(self, grid: Grid) -> None:
        if len(self) != grid.n:
            raise GridMismatchError(
                f"profile has {len(self)} samples, grid has {grid.n}"
            )


@dataclass(frozen=True)
class ALIFConfig:
    """Knobs of the iterative-filtering loops."""

    stop_tolerance: float = 1e-3
    max_inner_iterations: int = 200
    max_outer_components: int = 8
    boundary_extension: BoundaryExtension = "reflect"

    def __post_init__(self) -> None:
        if self.stop_tolerance <= 0:
            raise InvalidProfileError("stop_tolerance must be positive")
        if self.max_inner_iterations < 1 or self.max_outer_components < 1:
            raise InvalidProfileError("iteration caps must be >= 1")
        if self.boundary_extension not in ("reflect", "periodic", "none"):
            raise InvalidProfileError(
                f"unknown boundary extension {self.boundary_extension!r}"
            )


@dataclass(frozen=True)
class Decomposition:
    """Result of the outer loop: oscillatory parts plus the remaining trend."""

    imts: tuple[Signal, ...]
    trend: Signal
    iterations_used: tuple[int, ...]
    complete: bool = True

    def reconstruction(self) -> Signal:
        total = self.trend
        for imt in self.imts:
            total = total + imt
        return total


def _halfwidth_samples(sigma: np.ndarray, dt: float) -> int:
    """Samples until the kernel exponent reaches the truncation threshold."""
    return int(np.ceil(np.sqrt(TRUNCATION_EXPONENT) * np.max(sigma) / dt))


class SmoothingOperator:
    """Precomputed kernel rows of the moving average for one (profile, grid) pair.

    Building the rows once and reusing them across iterations is what keeps the
    inner loop cheap: one application is a banded weight/segment contraction.
    """

    def __init__(self, profile: BandwidthProfile, grid: Grid,
                 boundary: BoundaryExtension = "reflect") -> None:
        profile.require_aligned(grid)
        self.grid = grid
        self.boundary = boundary
        sigma = profile.sigma
        dt = grid.dt
        half = _halfwidth_samples(sigma, dt)
        offsets = np.arange(-half, half + 1) * dt
        exponent = (offsets[None, :] / sigma[:, None]) ** 2
        weights = np.exp(-exponent)
        weights[exponent > TRUNCATION_EXPONENT] = 0.0
        if boundary == "none":
            # out-of-range columns contribute nothing; renormalize over what is left
            n = grid.n
            cols = np.arange(-half, half + 1)[None, :] + np.arange(n)[:, None]
            weights = np.where((cols >= 0) & (cols < n), weights, 0.0)
        weights /= weights.sum(axis=1, keepdims=True)
        self.half = half
        self.weights = weights

    def _padded(self, values: np.ndarray) -> np.ndarray:
        if self.boundary == "reflect":
            return np.pad(values, self.half, mode="reflect")
        if self.boundary == "periodic":
            return np.pad(values, self.half, mode="wrap")
        return np.pad(values, self.half, mode="constant")

    def apply(self, values: np.ndarray) -> np.ndarray:
        padded = self._padded(np.asarray(values))
        segments = np.lib.stride_tricks.sliding_window_view(padded, 2 * self.half + 1)
        return np.einsum("ij,ij->i", self.weights, segments)


def kernel_row(profile: BandwidthProfile, center_index: int, grid: Grid) -> np.ndarray:
    """Full-length weight row of the moving average at one center.

    Weights are proportional to ``exp(-(t_center - t_j)^2 / sigma(t_center)^2)``,
    truncated at exponent -36 and renormalized to sum to one over the grid.
    """
    profile.require_aligned(grid)
    if not 0 <= center_index < grid.n:
        raise InvalidProfileError(f"center index {center_index} out of range")
    sigma = float(profile.sigma[center_index])
    if sigma <= 0:
        raise InvalidProfileError("sigma must be positive at the center")
    t = grid.times()
    exponent = ((t[center_index] - t) / sigma) ** 2
    row = np.exp(-exponent)
    row[exponent > TRUNCATION_EXPONENT] = 0.0
    return row / row.sum()


def moving_average(signal: Signal, profile: BandwidthProfile,
                   config: ALIFConfig | None = None) -> Signal:
    """Locally weighted moving average of the signal under the profile."""
    config = config or ALIFConfig()
    op = SmoothingOperator(profile, signal.grid, config.boundary_extension)
    return signal.with_samples(op.apply(signal.samples))


def iterate_operator(signal: Signal, profile: BandwidthProfile, iterations: int,
                     config: ALIFConfig | None = None) -> Signal:
    """Apply ``(identity - moving_average)`` exactly ``iterations`` times."""
    if iterations < 0:
        raise InvalidProfileError("iteration count must be nonnegative")
    if iterations == 0:
        return signal
    config = config or ALIFConfig()
    op = SmoothingOperator(profile, signal.grid, config.boundary_extension)
    values = np.asarray(signal.samples)
    for _ in range(iterations):
        values = values - op.apply(values)
    return signal.with_samples(values)


def theoretical_attenuation(phi_prime: float, varphi_prime: float, iterations: int) -> float:
    """High-pass gain ``(1 - exp(-pi^2 (phi'/varphi')^2))^K`` for a tone.

    ``phi_prime`` is the tone frequency, ``varphi_prime`` the reciprocal of the
    (constant) kernel width, both in Hz.
    """
    if varphi_prime <= 0:
        raise InvalidProfileError("varphi_prime must be positive")
    if iterations < 0:
        raise InvalidProfileError("iteration count must be nonnegative")
    ratio = phi_prime / varphi_prime
    return float((1.0 - np.exp(-np.pi**2 * ratio**2)) ** iterations)


def attenuation_error_bound(phi_prime: np.ndarray, amplitude: np.ndarray,
                            m2_bound: float, kernel_freq: np.ndarray) -> np.ndarray:
    """Pointwise bound on the single-pass deviation from the ideal attenuation.

    For a component with frequency ``phi_prime`` and amplitude ``amplitude``
    filtered with width ``1/kernel_freq`` the deviation of one smoothing pass
    from the pure-tone response is at most ``epsilon`` times this bound, where
    ``epsilon`` is the component's regularity parameter and ``m2_bound`` caps
    ``|phi''|``.
    """
    phi_prime = np.asarray(phi_prime, dtype=float)
    kernel_freq = np.asarray(kernel_freq, dtype=float)
    amplitude = np.asarray(amplitude, dtype=float)
    return (
        phi_prime / (np.sqrt(np.pi) * kernel_freq)
        + np.pi * amplitude * phi_prime / kernel_freq**2
        + m2_bound / (4.0 * kernel_freq**2)
    )


def alif_inner_loop(signal: Signal, profile: BandwidthProfile,
                    config: ALIFConfig | None = None) -> tuple[Signal, int]:
    """Iterate ``f <- f - average(f)`` until the relative change drops below
    the stop tolerance (or the iteration cap); returns the candidate component
    and the number of smoothing applications."""
    config = config or ALIFConfig()
    op = SmoothingOperator(profile, signal.grid, config.boundary_extension)
    values = np.asarray(signal.samples)
    iterations = 0
    for _ in range(config.max_inner_iterations):
        norm = float(np.linalg.norm(values))
        if norm == 0.0:
            iterations = max(iterations, 1)
            break
        average = op.apply(values)
        values = values - average
        iterations += 1
        if float(np.linalg.norm(average)) / norm < config.stop_tolerance:
            break
    return signal.with_samples(values), iterations


ProfileProvider = Callable[[Signal], BandwidthProfile]


def alif_decompose(signal: Signal, profile_provider: ProfileProvider,
                   config: ALIFConfig | None = None) -> Decomposition:
    """Outer loop: peel oscillatory components while the remainder still has
    at least two interior extrema.  The parts always sum back to the input."""
    config = config or ALIFConfig()
    remainder = signal
    imts: list[Signal] = []
    iterations: list[int] = []
    complete = True
    oscillation = remainder.real() if remainder.is_complex else remainder
    while len(imts) < config.max_outer_components and count_extrema(oscillation) >= 2:
        try:
            profile = profile_provider(remainder)
        except Exception:
            complete = False
            break
        imt, used = alif_inner_loop(remainder, profile, config)
        imts.append(imt)
        iterations.append(used)
        remainder = remainder - imt
        oscillation = remainder.real() if remainder.is_complex else remainder
    return Decomposition(tuple(imts), remainder, tuple(iterations), complete)
