import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siftkit import (
    ALIFConfig,
    BandwidthProfile,
    Grid,
    IMTSpec,
    InvalidProfileError,
    Signal,
    alif_decompose,
    alif_inner_loop,
    attenuation_error_bound,
    iterate_operator,
    kernel_row,
    moving_average,
    synthesize,
    theoretical_attenuation,
)


def complex_tone(nu, grid):
    t = grid.times()
    return Signal(np.exp(2j * np.pi * nu * t), grid.sample_rate, grid.start_time)


def projection(values, tone_values, window=None):
    """Coefficient of the tone in the values over a window slice."""
    sl = window if window is not None else slice(None)
    ref = tone_values[sl]
    return np.vdot(ref, values[sl]) / np.vdot(ref, ref)


class TestKernelRow:
    @given(sigma=st.floats(min_value=0.02, max_value=1.0),
           center=st.integers(min_value=0, max_value=299))
    @settings(max_examples=30, deadline=None)
    def test_rows_sum_to_one(self, sigma, center):
        grid = Grid(300, 100.0)
        row = kernel_row(BandwidthProfile.constant(sigma, 300), center, grid)
        assert abs(row.sum() - 1.0) < 1e-12

    def test_interior_row_symmetry_constant_sigma(self):
        grid = Grid(401, 100.0)
        row = kernel_row(BandwidthProfile.constant(0.2, 401), 200, grid)
        assert np.allclose(row, row[::-1], atol=1e-15)

    def test_halfwidth_at_inverse_e(self):
        # exp(-(k dt)^2 / sigma^2) = 1/e  =>  k = sigma / dt = 10 samples
        grid = Grid(400, 100.0)
        row = kernel_row(BandwidthProfile.constant(0.1, 400), 200, grid)
        assert row[210] / row[200] == pytest.approx(np.exp(-1.0), rel=1e-12)
        assert row[190] / row[200] == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_truncation_at_exponent_36(self):
        grid = Grid(400, 100.0)
        row = kernel_row(BandwidthProfile.constant(0.1, 400), 200, grid)
        assert row[200 + 61] == 0.0  # 61 samples -> exponent 37.2 > 36
        assert row[200 + 59] > 0.0

    def test_asymmetry_for_varying_profile(self):
        grid = Grid(200, 100.0)
        sigma = np.linspace(0.05, 0.3, 200)
        profile = BandwidthProfile(sigma)
        row_a = kernel_row(profile, 50, grid)
        row_b = kernel_row(profile, 120, grid)
        # weight of x=120 as seen from y=50 differs from x=50 seen from y=120
        assert abs(row_a[120] - row_b[50]) > 0

    def test_invalid_center_rejected(self):
        grid = Grid(100, 100.0)
        with pytest.raises(InvalidProfileError):
            kernel_row(BandwidthProfile.constant(0.1, 100), 100, grid)


class TestMovingAverage:
    def test_preserves_constants(self):
        grid = Grid(500, 100.0)
        sigma = np.linspace(0.05, 0.4, 500)
        s = Signal(np.full(500, 3.25), grid.sample_rate)
        for boundary in ("reflect", "periodic", "none"):
            out = moving_average(s, BandwidthProfile(sigma), ALIFConfig(boundary_extension=boundary))
            assert np.allclose(out.samples, 3.25, atol=1e-12)

    @pytest.mark.parametrize("nu_sigma", [0.25, 0.5, 1.0])
    def test_tone_attenuation_matches_gaussian_transfer(self, nu_sigma):
        nu = 1.0
        sigma = nu_sigma / nu
        grid = Grid(int(30 * 100), 100.0)
        tone = complex_tone(nu, grid)
        out = moving_average(tone, BandwidthProfile.constant(sigma, grid.n),
                             ALIFConfig(boundary_extension="periodic"))
        ratio = projection(out.samples, tone.samples)
        expected = np.exp(-np.pi**2 * nu_sigma**2)
        assert abs(ratio - expected) / expected < 1e-3

    def test_tone_attenuation_below_machine_scale(self):
        # nu*sigma = 2: the ideal factor exp(-4 pi^2) ~ 7.2e-18 lies below the
        # kernel truncation tail (erfc(6) ~ 2.2e-17), so the exact transfer of
        # the truncated row can only match to that tail scale, and a float64
        # application must read as zero.
        import mpmath

        nu, sigma = 1.0, 2.0
        grid = Grid(3000, 100.0)
        row = kernel_row(BandwidthProfile.constant(sigma, grid.n), grid.n // 2, grid)
        offsets = (np.arange(grid.n) - grid.n // 2) / grid.sample_rate
        with mpmath.workdps(50):
            transfer = mpmath.fsum(
                mpmath.mpf(w) * mpmath.cos(2 * mpmath.pi * nu * mpmath.mpf(tau))
                for w, tau in zip(row, offsets) if w != 0.0
            )
            expected = mpmath.exp(-mpmath.pi**2 * (nu * sigma) ** 2)
            tail = mpmath.erfc(mpmath.sqrt(36))
        assert abs(transfer - expected) <= float(tail) + 5e-18
        tone = complex_tone(nu, grid)
        out = moving_average(tone, BandwidthProfile.constant(sigma, grid.n),
                             ALIFConfig(boundary_extension="periodic"))
        assert abs(projection(out.samples, tone.samples)) < 1e-14

    def test_chirp_single_pass_error_bound(self):
        # slowly accelerating sweep filtered at its own local period
        eps = 0.01
        nu = 1.0
        grid = Grid(4000, 100.0)
        t = grid.times()
        phase = nu * (t + 0.5 * eps * t**2)
        freq = nu * (1 + eps * t)
        s = Signal(np.exp(2j * np.pi * phase), grid.sample_rate)
        profile = BandwidthProfile(1.0 / freq)
        out = moving_average(s, profile)
        ideal = np.exp(-np.pi**2) * s.samples
        interior = slice(800, 3200)
        deviation = np.max(np.abs(out.samples[interior] - ideal[interior]))
        bound = attenuation_error_bound(freq, np.ones_like(freq), nu * eps, freq)
        assert deviation <= eps * np.max(bound[interior])

    def test_reflect_commutes_with_time_reversal(self):
        rng = np.random.default_rng(3)
        grid = Grid(300, 100.0)
        s = Signal(rng.normal(size=300), grid.sample_rate)
        profile = BandwidthProfile.constant(0.15, 300)
        forward = moving_average(s, profile).samples
        reversed_in = Signal(s.samples[::-1], grid.sample_rate)
        backward = moving_average(reversed_in, profile).samples[::-1]
        assert np.allclose(forward, backward, atol=1e-12)

    def test_misaligned_profile_rejected(self):
        s = Signal(np.ones(100), 100.0)
        with pytest.raises(Exception):
            moving_average(s, BandwidthProfile.constant(0.1, 50))


class TestIterateOperator:
    def test_zero_iterations_is_identity(self):
        grid = Grid(200, 100.0)
        s = complex_tone(2.0, grid)
        out = iterate_operator(s, BandwidthProfile.constant(0.5, 200), 0)
        assert np.array_equal(out.samples, s.samples)

    def test_three_iterations_on_matched_tone(self):
        nu = 1.0
        grid = Grid(3000, 100.0)
        tone = complex_tone(nu, grid)
        out = iterate_operator(tone, BandwidthProfile.constant(1.0 / nu, grid.n), 3,
                               ALIFConfig(boundary_extension="periodic"))
        ratio = projection(out.samples, tone.samples)
        expected = (1.0 - np.exp(-np.pi**2)) ** 3  # = 0.99984...
        assert abs(ratio - expected) < 1e-9
        assert expected == pytest.approx(0.9998448, abs=1e-6)

    def test_two_tone_modulation_factors(self):
        grid = Grid(3000, 100.0)
        tone1 = complex_tone(1.0, grid)
        tone2 = complex_tone(3.0, grid)
        both = tone1 + tone2
        out = iterate_operator(both, BandwidthProfile.constant(1.0 / 3.0, grid.n), 10,
                               ALIFConfig(boundary_extension="periodic"))
        p1 = projection(out.samples, tone1.samples)
        p2 = projection(out.samples, tone2.samples)
        assert abs(p1 - theoretical_attenuation(1.0, 3.0, 10)) < 1e-6
        assert abs(p2 - theoretical_attenuation(3.0, 3.0, 10)) < 1e-6
        assert theoretical_attenuation(3.0, 3.0, 10) == pytest.approx(0.999483, abs=1e-6)


class TestTheoreticalAttenuation:
    def test_zero_iterations(self):
        assert theoretical_attenuation(2.0, 1.0, 0) == 1.0

    def test_matched_single_pass(self):
        assert theoretical_attenuation(1.5, 1.5, 1) == pytest.approx(
            1.0 - np.exp(-np.pi**2), rel=1e-15)

    def test_monotone_decreasing_in_iterations(self):
        values = [theoretical_attenuation(0.5, 1.0, k) for k in range(0, 15)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_half_ratio_ten_iterations_direct_eval(self):
        direct = (1.0 - np.exp(-np.pi**2 * 0.25)) ** 10
        assert theoretical_attenuation(0.5, 1.0, 10) == pytest.approx(direct, rel=1e-15)


class TestInnerLoop:
    def test_pure_tone_converges_to_itself(self):
        nu = 2.0
        grid = Grid(3000, 100.0)
        tone = complex_tone(nu, grid)
        out, iterations = alif_inner_loop(tone, BandwidthProfile.constant(1.0 / nu, grid.n))
        interior = slice(300, 2700)
        corr = np.abs(np.vdot(out.samples[interior], tone.samples[interior])) / (
            np.linalg.norm(out.samples[interior]) * np.linalg.norm(tone.samples[interior]))
        assert corr > 0.999
        assert iterations >= 1

    def test_zero_signal_single_iteration(self):
        z = Signal(np.zeros(100), 100.0)
        out, iterations = alif_inner_loop(z, BandwidthProfile.constant(0.1, 100))
        assert iterations == 1
        assert np.array_equal(out.samples, z.samples)

    def test_two_tones_keeps_high_suppresses_low(self):
        grid = Grid(3000, 100.0)
        tone1 = complex_tone(1.0, grid)
        tone2 = complex_tone(3.0, grid)
        config = ALIFConfig(boundary_extension="periodic")
        out, iterations = alif_inner_loop(tone1 + tone2,
                                          BandwidthProfile.constant(1.0 / 3.0, grid.n), config)
        corr2 = np.abs(np.vdot(out.samples, tone2.samples)) / (
            np.linalg.norm(out.samples) * np.linalg.norm(tone2.samples))
        assert corr2 > 0.99
        p1 = projection(out.samples, tone1.samples)
        p2 = projection(out.samples, tone2.samples)
        # on the periodic grid the loop is exactly diagonal in the tone basis
        assert abs(p1 - theoretical_attenuation(1.0, 3.0, iterations)) < 2e-2 * abs(
            theoretical_attenuation(1.0, 3.0, iterations)) + 1e-12
        assert abs(p2 - theoretical_attenuation(3.0, 3.0, iterations)) < 1e-3


class TestDecompose:
    def test_trend_only_input(self):
        grid = Grid(500, 100.0)
        ramp = Signal(np.linspace(0.0, 2.0, 500), grid.sample_rate)
        dec = alif_decompose(ramp, lambda r: BandwidthProfile.constant(0.1, 500))
        assert len(dec.imts) == 0
        assert np.array_equal(dec.trend.samples, ramp.samples)
        assert dec.complete

    def test_two_tone_separation(self):
        grid = Grid(3000, 100.0)
        tone1 = synthesize(IMTSpec(lambda t: np.ones_like(t), lambda t: 1.0 * t), grid, real=True)
        tone2 = synthesize(IMTSpec(lambda t: np.ones_like(t), lambda t: 3.0 * t), grid, real=True)
        both = tone1 + tone2
        sigmas = iter([1.0 / 3.0, 1.0])
        config = ALIFConfig(boundary_extension="periodic", max_outer_components=2)
        dec = alif_decompose(both, lambda r: BandwidthProfile.constant(next(sigmas), len(r)),
                             config)
        assert len(dec.imts) == 2
        interior = slice(300, 2700)
        for imt, ref in zip(dec.imts, (tone2, tone1)):
            corr = np.abs(np.vdot(imt.samples[interior], ref.samples[interior])) / (
                np.linalg.norm(imt.samples[interior]) * np.linalg.norm(ref.samples[interior]))
            assert corr > 0.99

    def test_exact_reconstruction_on_random_inputs(self):
        rng = np.random.default_rng(77)
        for trial in range(10):
            n = int(rng.integers(200, 500))
            s = Signal(rng.normal(size=n), 100.0)
            config = ALIFConfig(max_inner_iterations=20, max_outer_components=4)
            dec = alif_decompose(
                s, lambda r: BandwidthProfile.constant(float(rng.uniform(0.03, 0.2)), len(r)),
                config)
            residual = np.linalg.norm(dec.reconstruction().samples - s.samples)
            assert residual <= 1e-10 * np.linalg.norm(s.samples)

    def test_provider_failure_flags_incomplete(self):
        grid = Grid(300, 100.0)
        t = grid.times()
        s = Signal(np.sin(2 * np.pi * 3 * t), grid.sample_rate)

        def provider(r):
            raise RuntimeError("no profile available")

        dec = alif_decompose(s, provider)
        assert not dec.complete
        assert len(dec.imts) == 0
        assert np.array_equal(dec.trend.samples, s.samples)


class TestErrorBound:
    def test_shrinks_when_epsilon_halves(self):
        nu = 1.0
        grid = Grid(4000, 100.0)
        t = grid.times()
        deviations = []
        for eps in (0.01, 0.005, 0.0025):
            phase = nu * (t + 0.5 * eps * t**2)
            freq = nu * (1 + eps * t)
            s = Signal(np.exp(2j * np.pi * phase), grid.sample_rate)
            out = iterate_operator(s, BandwidthProfile(1.0 / freq), 1)
            ideal = (1 - np.exp(-np.pi**2)) * s.samples
            interior = slice(800, 3200)
            deviation = np.max(np.abs(out.samples[interior] - ideal[interior]))
            bound = attenuation_error_bound(freq, np.ones_like(freq), nu * eps, freq)
            assert deviation <= eps * np.max(bound[interior])
            deviations.append(deviation)
        assert deviations[0] > deviations[1] > deviations[2]
