import numpy as np
import pytest

from siftkit import (
    Grid,
    IFCurve,
    InvalidBandError,
    InvalidWindowError,
    Signal,
    SSTConfig,
    TFRGrid,
    WindowSpec,
    bandpass_reconstruct,
    reconstruct_along_curve,
    stft,
    synchrosqueeze,
)

CONFIG = SSTConfig(delta_xi=0.01, max_frequency=10.0)
WINDOW = WindowSpec(length=377)


def complex_tone(nu, n=1200, rate=100.0):
    t = np.arange(n) / rate
    return Signal(np.exp(2j * np.pi * nu * t), rate)


def flat_curve(nu, grid):
    return IFCurve.from_frequencies(np.full(grid.n_frames, nu), grid)


def interior_frames(grid, margin_seconds=2.0):
    rate = 1.0 / grid.frame_dt
    k = int(margin_seconds * rate)
    return slice(k, grid.n_frames - k)


class TestWindowSpec:
    def test_default_matches_stated_shape(self):
        h = WINDOW.samples()
        assert h.size == 377
        assert h[188] == 1.0
        assert np.allclose(h, h[::-1])
        assert np.all(h > 0)
        u_end = 6.0
        assert h[0] == pytest.approx(np.exp(-0.5 * u_end**2), rel=1e-12)

    def test_even_or_short_length_rejected(self):
        with pytest.raises(InvalidWindowError):
            WindowSpec(length=378)
        with pytest.raises(InvalidWindowError):
            WindowSpec(length=1)

    def test_derivative_is_analytic(self):
        rate = 100.0
        h = WINDOW.samples()
        dh = WINDOW.derivative_samples(rate)
        # compare with centered finite differences of the sampled window
        fd = np.gradient(h, 1.0 / rate)
        assert np.max(np.abs(dh[5:-5] - fd[5:-5])) < 1e-3 * np.max(np.abs(dh))


class TestSTFT:
    def test_zero_signal_gives_zero_grid(self):
        s = Signal(np.zeros(800), 100.0)
        grid = stft(s, WINDOW, CONFIG)
        assert np.all(grid.values == 0)
        assert grid.n_bins == 1001
        assert grid.n_frames == 800

    def test_tone_peaks_at_its_bin(self):
        nu = 1.0
        s = complex_tone(nu, n=1000)
        grid = stft(s, WINDOW, CONFIG)
        peak_bins = np.argmax(np.abs(grid.values), axis=0)
        inner = interior_frames(grid)
        assert np.all(peak_bins[inner] == int(round(nu / CONFIG.delta_xi)))

    def test_linearity_in_amplitude(self):
        s = complex_tone(2.0, n=900)
        grid1 = stft(s, WINDOW, CONFIG)
        grid2 = stft(3.5 * s, WINDOW, CONFIG)
        assert np.allclose(grid2.values, 3.5 * grid1.values, rtol=1e-12, atol=1e-15)

    def test_additivity(self):
        a = complex_tone(1.0, n=900)
        b = complex_tone(3.0, n=900)
        ga = stft(a, WINDOW, CONFIG).values
        gb = stft(b, WINDOW, CONFIG).values
        gab = stft(a + b, WINDOW, CONFIG).values
        assert np.allclose(gab, ga + gb, atol=1e-12)

    def test_window_longer_than_signal_rejected(self):
        s = Signal(np.ones(100), 100.0)
        with pytest.raises(InvalidWindowError):
            stft(s, WINDOW, CONFIG)

    def test_time_shift_moves_magnitude_pattern(self):
        rng = np.random.default_rng(11)
        base = rng.normal(size=700)
        shift = 40
        s1 = Signal(base, 100.0)
        s2 = Signal(np.roll(base, shift), 100.0)
        g1 = np.abs(stft(s1, WINDOW, CONFIG).values)
        g2 = np.abs(stft(s2, WINDOW, CONFIG).values)
        inner = slice(300, 400)
        shifted = np.s_[inner.start + shift : inner.stop + shift]
        assert np.max(np.abs(g2[:, shifted] - g1[:, inner])) < 1e-6 * g1.max()


class TestSynchrosqueeze:
    def test_zero_signal(self):
        s = Signal(np.zeros(600), 100.0)
        grid = synchrosqueeze(s, WINDOW, CONFIG)
        assert np.all(grid.values == 0)

    def test_tone_mass_concentrates_within_one_bin(self):
        nu = 2.0
        s = complex_tone(nu, n=1200)
        grid = synchrosqueeze(s, WINDOW, CONFIG)
        mag = np.abs(grid.values)
        target = int(round(nu / CONFIG.delta_xi))
        inner = interior_frames(grid)
        frames = range(inner.start, inner.stop)
        concentrated = 0
        for m in frames:
            column = mag[:, m]
            total = column.sum()
            near = column[target - 1 : target + 2].sum()
            if total > 0 and near / total >= 0.95:
                concentrated += 1
        assert concentrated / len(range(inner.start, inner.stop)) >= 0.95

    def test_magnitude_conservation_above_threshold(self):
        nu = 2.0
        s = complex_tone(nu, n=1200)
        raw = stft(s, WINDOW, CONFIG)
        squeezed = synchrosqueeze(s, WINDOW, CONFIG)
        assert np.abs(squeezed.values).sum() <= np.abs(raw.values).sum() * (1 + 1e-12)
        # per-frame, away from the window's boundary frames, the retained
        # coefficients of a clean tone reassign coherently: no cancellation
        inner = interior_frames(raw)
        raw_mag = np.abs(raw.values[:, inner])
        floor = CONFIG.magnitude_threshold * np.abs(raw.values).max()
        raw_cols = raw_mag.sum(axis=0)
        dropped_cols = np.where(raw_mag <= floor, raw_mag, 0.0).sum(axis=0)
        squeezed_cols = np.abs(squeezed.values[:, inner]).sum(axis=0)
        assert np.all(squeezed_cols <= raw_cols * (1 + 1e-12))
        assert np.all(squeezed_cols >= raw_cols - dropped_cols - 1e-9 * raw_cols)

    def test_sharper_than_stft_for_tone(self):
        nu = 2.0
        s = complex_tone(nu, n=1200)
        raw = stft(s, WINDOW, CONFIG)
        squeezed = synchrosqueeze(s, WINDOW, CONFIG)
        inner = interior_frames(raw)

        def second_moment(grid):
            mag = np.abs(grid.values[:, inner])
            weights = mag.sum(axis=1)
            freqs = grid.bin_frequencies
            total = weights.sum()
            return np.sum(weights * (freqs - nu) ** 2) / total

        assert second_moment(squeezed) < second_moment(raw)


class TestReconstruction:
    def test_unit_tone_amplitude_recovered(self):
        nu = 2.0
        s = complex_tone(nu, n=1200)
        grid = synchrosqueeze(s, WINDOW, CONFIG)
        curve = flat_curve(nu, grid)
        recon = reconstruct_along_curve(grid, curve, 0.1, WINDOW)
        inner = interior_frames(grid)
        amp = np.abs(recon.samples[inner])
        assert np.max(np.abs(amp - 1.0)) < 0.05
        err = np.linalg.norm(recon.samples[inner] - s.samples[inner])
        err /= np.linalg.norm(s.samples[inner])
        assert err < 0.1

    def test_empty_band_warns_and_returns_zero(self):
        nu = 2.005  # off-bin center with a band narrower than half a bin
        s = complex_tone(2.0, n=800)
        grid = synchrosqueeze(s, WINDOW, CONFIG)
        curve = IFCurve(np.full(grid.n_frames, 200, dtype=np.intp),
                        np.full(grid.n_frames, nu))
        with pytest.warns(RuntimeWarning):
            recon = reconstruct_along_curve(grid, curve, 0.004, WINDOW)
        assert np.allclose(recon.samples, 0.0)

    def test_two_tone_cross_contamination_small(self):
        rate = 100.0
        n = 1200
        t = np.arange(n) / rate
        tone1 = np.exp(2j * np.pi * 1.0 * t)
        tone3 = np.exp(2j * np.pi * 3.0 * t)
        s = Signal(tone1 + tone3, rate)
        grid = synchrosqueeze(s, WINDOW, CONFIG)
        curve = flat_curve(3.0, grid)
        recon = reconstruct_along_curve(grid, curve, 0.1, WINDOW)
        inner = interior_frames(grid)
        residual = recon.samples[inner] - tone3[inner]
        leak = np.vdot(tone1[inner], residual) / np.vdot(tone1[inner], tone1[inner])
        assert abs(leak) < 0.1

    def test_small_chirp_reconstruction(self):
        rate = 100.0
        n = 2000
        t = np.arange(n) / rate
        freq = 2.0 + 0.01 * t  # eps-small sweep
        phase = 2.0 * t + 0.005 * t**2
        s = Signal(np.exp(2j * np.pi * phase), rate)
        grid = synchrosqueeze(s, WINDOW, CONFIG)
        curve = IFCurve.from_frequencies(freq, grid)
        recon = reconstruct_along_curve(grid, curve, 0.1, WINDOW)
        inner = interior_frames(grid)
        err = np.linalg.norm(recon.samples[inner] - s.samples[inner])
        err /= np.linalg.norm(s.samples[inner])
        assert err <= 0.1


class TestBandpass:
    def test_tone_inside_band(self):
        rate = 100.0
        t = np.arange(1000) / rate
        s = Signal(np.cos(2 * np.pi * 3.0 * t), rate)  # 30 cycles, integer
        out = bandpass_reconstruct(s, 2.5, 3.5)
        inner = slice(100, 900)
        err = np.linalg.norm(out.samples[inner] - s.samples[inner])
        err /= np.linalg.norm(s.samples[inner])
        assert err <= 1e-2

    def test_tone_outside_band(self):
        rate = 100.0
        t = np.arange(1000) / rate
        s = Signal(np.cos(2 * np.pi * 8.0 * t), rate)
        out = bandpass_reconstruct(s, 1.0, 4.0)
        inner = slice(100, 900)
        ratio = np.sum(out.samples[inner] ** 2) / np.sum(s.samples[inner] ** 2)
        assert ratio <= 1e-4

    def test_full_band_is_identity(self):
        rng = np.random.default_rng(2)
        s = Signal(rng.normal(size=512), 100.0)
        out = bandpass_reconstruct(s, 0.0, 50.0)
        assert np.allclose(out.samples, s.samples, atol=1e-12)

    def test_invalid_band_rejected(self):
        s = Signal(np.ones(100), 100.0)
        with pytest.raises(InvalidBandError):
            bandpass_reconstruct(s, 3.0, 2.0)
        with pytest.raises(InvalidBandError):
            bandpass_reconstruct(s, 0.0, 60.0)


class TestTFRGrid:
    def test_axis_validation(self):
        with pytest.raises(Exception):
            TFRGrid(np.zeros((3, 4)), np.array([0.0, 1.0, 2.0, 1.5]),
                    np.array([0.0, 0.1, 0.2]))

    def test_shape_validation(self):
        with pytest.raises(Exception):
            TFRGrid(np.zeros((3, 4)), np.arange(4.0), np.arange(5.0))
