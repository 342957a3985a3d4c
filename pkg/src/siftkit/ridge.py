"""Extraction of a maximum-energy, regularity-penalized frequency curve.

The curve ``c`` maximizes, over all per-frame bin choices,

    sum_m log((|S(c(m), m)| + floor) / total_magnitude)
        - penalty * sum_m |c(m) - c(m-1)|^2

computed exactly by frame-by-frame dynamic programming.  The division by the
grid's total magnitude is a per-grid constant, so the recursion drops it and
:func:`curve_objective` reports the full value.  Ties break toward the lower
bin index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCurveError, NoCurveError
from .sst import TFRGrid


@dataclass(frozen=True)
class IFCurve:
    """Per-frame frequency estimate: bin indices plus their Hz values."""

    bins: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self) -> None:
        bins = np.asarray(self.bins, dtype=np.intp)
        freqs = np.asarray(self.frequencies, dtype=np.float64)
        if bins.ndim != 1 or bins.size == 0 or bins.shape != freqs.shape:
            raise InvalidCurveError("bins and frequencies must be matching 1-D arrays")
        bins.setflags(write=False)
        freqs.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "frequencies", freqs)

    def __len__(self) -> int:
        return self.bins.size

    @classmethod
    def from_frequencies(cls, frequencies: np.ndarray, grid: TFRGrid) -> "IFCurve":
        """Snap a per-frame Hz track onto the grid's bins."""
        freqs = np.asarray(frequencies, dtype=float)
        if freqs.shape != (grid.n_frames,):
            raise InvalidCurveError(
                f"expected {grid.n_frames} per-frame values, got {freqs.shape}"
            )
        delta = grid.delta_xi
        base = float(grid.bin_frequencies[0])
        bins = np.clip(np.rint((freqs - base) / delta), 0, grid.n_bins - 1).astype(np.intp)
        return cls(bins, grid.bin_frequencies[bins])

    def mean_frequency(self) -> float:
        return float(np.mean(self.frequencies))


@dataclass(frozen=True)
class ExtractionConfig:
    """Penalty weight, optional prior band, and the log floor.

    ``max_jump_bins`` optionally forbids per-frame jumps larger than that many
    bins (a speed knob; ``None`` keeps the search exact).
    """

    penalty: float = 1.0
    prior: IFCurve | None = None
    prior_halfwidth: float = 0.5
    magnitude_floor: float = 1e-12  # relative to the grid's max magnitude
    max_jump_bins: int | None = None

    def __post_init__(self) -> None:
        if self.penalty < 0:
            raise InvalidCurveError("penalty must be nonnegative")
        if self.prior is not None and self.prior_halfwidth <= 0:
            raise InvalidCurveError("prior_halfwidth must be positive with a prior")
        if self.magnitude_floor <= 0:
            raise InvalidCurveError("magnitude floor must be positive")
        if self.max_jump_bins is not None and self.max_jump_bins < 1:
            raise InvalidCurveError("max_jump_bins must be >= 1")


def _frame_scores(tfr: TFRGrid, config: ExtractionConfig) -> np.ndarray:
    magnitude = tfr.magnitude()
    peak = magnitude.max()
    if peak == 0.0:
        raise NoCurveError("cannot extract a curve from an all-zero grid")
    return np.log(magnitude + config.magnitude_floor * peak)


def _band_limits(tfr: TFRGrid, config: ExtractionConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame inclusive [low, high] admissible bin range."""
    n_bins, n_frames = tfr.values.shape
    if config.prior is None:
        return np.zeros(n_frames, dtype=np.intp), np.full(n_frames, n_bins - 1, dtype=np.intp)
    prior = config.prior
    if len(prior) != n_frames:
        raise InvalidCurveError(
            f"prior has {len(prior)} frames, grid has {n_frames}"
        )
    if np.any(prior.bins < 0) or np.any(prior.bins >= n_bins):
        raise InvalidCurveError("prior bins out of grid range")
    delta = tfr.delta_xi
    base = float(tfr.bin_frequencies[0])
    lo = np.ceil((prior.frequencies - config.prior_halfwidth - base) / delta - 1e-9)
    hi = np.floor((prior.frequencies + config.prior_halfwidth - base) / delta + 1e-9)
    lo = np.clip(lo, 0, n_bins - 1).astype(np.intp)
    hi = np.clip(hi, 0, n_bins - 1).astype(np.intp)
    lo = np.minimum(lo, prior.bins)
    hi = np.maximum(hi, prior.bins)
    return lo, hi


def extract_curve(tfr: TFRGrid, config: ExtractionConfig | None = None) -> IFCurve:
    """Exact maximizer of the penalized curve objective (optionally inside a
    band around ``config.prior``)."""
    config = config or ExtractionConfig()
    scores = _frame_scores(tfr, config)
    lo, hi = _band_limits(tfr, config)
    n_frames = tfr.n_frames

    if config.penalty == 0.0:
        # frames decouple: per-frame argmax inside the admissible band
        bins = np.empty(n_frames, dtype=np.intp)
        for m in range(n_frames):
            bins[m] = lo[m] + int(np.argmax(scores[lo[m] : hi[m] + 1, m]))
        return IFCurve(bins, tfr.bin_frequencies[bins])

    full_band = bool(np.all(lo == 0) and np.all(hi == tfr.n_bins - 1))
    jump_cap = config.max_jump_bins
    if full_band and jump_cap is not None and jump_cap < tfr.n_bins - 1:
        bins = _banded_dp(scores, config.penalty, jump_cap)
    else:
        bins = _windowed_dp(scores, lo, hi, config.penalty)
    return IFCurve(bins, tfr.bin_frequencies[bins])


def _windowed_dp(scores: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 penalty: float) -> np.ndarray:
    n_frames = scores.shape[1]
    widths = hi - lo + 1
    best = scores[lo[0] : hi[0] + 1, 0].astype(np.float64)
    back: list[np.ndarray] = []
    for m in range(1, n_frames):
        prev_bins = lo[m - 1] + np.arange(widths[m - 1])
        cur_bins = lo[m] + np.arange(widths[m])
        jumps = (cur_bins[None, :] - prev_bins[:, None]).astype(np.float64)
        gain = best[:, None] - penalty * jumps**2
        choice = np.argmax(gain, axis=0)
        back.append(choice)
        best = gain[choice, np.arange(widths[m])] + scores[cur_bins, m]

    bins = np.empty(n_frames, dtype=np.intp)
    pos = int(np.argmax(best))
    bins[-1] = lo[-1] + pos
    for m in range(n_frames - 1, 0, -1):
        pos = int(back[m - 1][pos])
        bins[m - 1] = lo[m - 1] + pos
    return bins


def _banded_dp(scores: np.ndarray, penalty: float, jump_cap: int) -> np.ndarray:
    """Full-axis recursion with transitions limited to ``jump_cap`` bins."""
    n_bins, n_frames = scores.shape
    offsets = np.arange(-jump_cap, jump_cap + 1)
    parabola = penalty * offsets.astype(np.float64) ** 2
    best = scores[:, 0].astype(np.float64)
    back = np.empty((n_frames - 1, n_bins), dtype=np.int32)
    pad = np.full(jump_cap, -np.inf)
    for m in range(1, n_frames):
        padded = np.concatenate([pad, best, pad])
        windows = np.lib.stride_tricks.sliding_window_view(padded, 2 * jump_cap + 1)
        gain = windows - parabola[::-1]
        choice = np.argmax(gain, axis=1)
        back[m - 1] = choice + np.arange(n_bins) - jump_cap
        best = gain[np.arange(n_bins), choice] + scores[:, m]

    bins = np.empty(n_frames, dtype=np.intp)
    pos = int(np.argmax(best))
    bins[-1] = pos
    for m in range(n_frames - 1, 0, -1):
        pos = int(back[m - 1][pos])
        bins[m - 1] = pos
    return bins


def curve_objective(tfr: TFRGrid, curve: IFCurve, config: ExtractionConfig | None = None) -> float:
    """Full objective value of a curve, normalization term included."""
    config = config or ExtractionConfig()
    if len(curve) != tfr.n_frames:
        raise InvalidCurveError("curve length does not match the grid")
    magnitude = tfr.magnitude()
    peak = magnitude.max()
    if peak == 0.0:
        raise NoCurveError("objective undefined on an all-zero grid")
    total = magnitude.sum()
    picked = magnitude[curve.bins, np.arange(tfr.n_frames)]
    data_term = np.sum(np.log(picked + config.magnitude_floor * peak) - np.log(total))
    jumps = np.diff(curve.bins.astype(np.float64))
    return float(data_term - config.penalty * np.sum(jumps**2))


def total_squared_jump(curve: IFCurve) -> float:
    """Sum of squared bin jumps between consecutive frames."""
    return float(np.sum(np.diff(curve.bins.astype(np.float64)) ** 2))
