"""Tests for channel sampling, the delay-time CIR, and channel application."""

import numpy as np
import pytest

from otsmlink.channel import (
    ChannelProfile,
    ChannelTaps,
    UnsupportedConfigurationError,
    apply_channel,
    build_H,
    cir_band,
    degrade_csi,
    dt_cir,
    max_doppler_shift,
    sample_channel,
)
from otsmlink.framing import FrameGeometry

RNG_SEED = 31


@pytest.fixture
def geom():
    return FrameGeometry(m_delay=8, n_seq=8, l_max=1, delta_f=10e6 / 8)


@pytest.fixture
def eva_geom():
    return FrameGeometry(m_delay=64, n_seq=64, l_max=26, delta_f=10e6 / 64)


class TestProfiles:
    def test_eva_normalised_delays_at_10mhz(self, eva_geom):
        taps = sample_channel(
            ChannelProfile.eva(), eva_geom, 0.0, 40e9, np.random.default_rng(RNG_SEED)
        )
        np.testing.assert_allclose(taps.delays[1], 0.3)
        np.testing.assert_allclose(taps.delays[-1], 25.1)

    def test_zero_speed_gives_zero_doppler(self, eva_geom):
        taps = sample_channel(
            ChannelProfile.eva(), eva_geom, 0.0, 40e9, np.random.default_rng(RNG_SEED)
        )
        np.testing.assert_array_equal(taps.dopplers, 0.0)

    def test_unit_total_power_monte_carlo(self, eva_geom):
        rng = np.random.default_rng(RNG_SEED)
        total = 0.0
        draws = 100_000
        profile = ChannelProfile.eva()
        powers = profile.linear_powers
        p = powers.size
        # direct vectorised re-draw of the gain model used by sample_channel
        g = np.sqrt(powers / 2.0) * (
            rng.standard_normal((draws, p)) + 1j * rng.standard_normal((draws, p))
        )
        total = np.mean(np.sum(np.abs(g) ** 2, axis=1))
        assert 0.98 <= total <= 1.02

    def test_delay_exceeding_guard_rejected(self, geom):
        with pytest.raises(ValueError, match="l_max"):
            sample_channel(ChannelProfile.eva(), geom, 0.0, 40e9, np.random.default_rng(1))

    def test_truncation_keeps_fitting_taps(self, geom):
        prof = ChannelProfile.eva().truncated(geom.l_max, geom.bandwidth_hz)
        assert len(prof.delays_ns) == 2  # 0 ns and 30 ns fit within l_max=1 at 10 MHz
        np.testing.assert_allclose(np.sum(prof.linear_powers), 1.0)

    def test_jakes_doppler_bounded(self, eva_geom):
        rng = np.random.default_rng(RNG_SEED)
        k_max = max_doppler_shift(480.0, 40e9) * eva_geom.nm / eva_geom.bandwidth_hz
        for _ in range(50):
            taps = sample_channel(ChannelProfile.eva(), eva_geom, 480.0, 40e9, rng)
            assert np.all(np.abs(taps.dopplers) <= k_max + 1e-12)


class TestDtCir:
    def test_integer_delay_is_kronecker(self, geom):
        taps = ChannelTaps([1.0], [1.0], [0.0])
        q = np.arange(geom.frame_len)
        np.testing.assert_allclose(dt_cir(taps, 1, q, geom), 1.0)
        np.testing.assert_allclose(dt_cir(taps, 0, q, geom), 0.0, atol=1e-12)

    def test_pure_doppler_phase_ramp(self, geom):
        k0 = 1.7
        taps = ChannelTaps([1.0], [0.0], [k0])
        q = np.arange(geom.frame_len)
        expected = np.exp(2j * np.pi * k0 * q / geom.nm)
        np.testing.assert_allclose(dt_cir(taps, 0, q, geom), expected, atol=1e-12)

    def test_matches_term_by_term_summation(self, geom):
        rng = np.random.default_rng(RNG_SEED)
        taps = ChannelTaps(
            rng.standard_normal(2) + 1j * rng.standard_normal(2),
            [0.4, 1.0],
            [0.3, -1.2],
        )
        for l in range(geom.l_max + 1):
            for q in [0, 3, geom.frame_len - 1]:
                manual = sum(
                    taps.gains[i]
                    * np.exp(2j * np.pi * taps.dopplers[i] * (q - l) / geom.nm)
                    * np.sinc(l - taps.delays[i])
                    for i in range(2)
                )
                assert abs(dt_cir(taps, l, q, geom) - manual) < 1e-12

    def test_out_of_range_indices_rejected(self, geom):
        taps = ChannelTaps([1.0], [0.0], [0.0])
        with pytest.raises(IndexError):
            dt_cir(taps, geom.l_max + 1, 0, geom)
        with pytest.raises(IndexError):
            dt_cir(taps, 0, geom.frame_len, geom)


class TestApplyChannel:
    def test_identity_path(self, geom):
        rng = np.random.default_rng(RNG_SEED)
        s = rng.standard_normal(geom.frame_len) + 1j * rng.standard_normal(geom.frame_len)
        taps = ChannelTaps([1.0], [0.0], [0.0])
        np.testing.assert_allclose(apply_channel(s, taps, 0.0, None, geom), s, atol=1e-12)

    def test_integer_delay_shifts_signal(self, geom):
        rng = np.random.default_rng(RNG_SEED)
        s = rng.standard_normal(geom.frame_len) + 1j * rng.standard_normal(geom.frame_len)
        taps = ChannelTaps([1.0], [1.0], [0.0])
        r = apply_channel(s, taps, 0.0, None, geom)
        np.testing.assert_allclose(r[1:], s[:-1], atol=1e-12)
        assert abs(r[0]) < 1e-12

    def test_matches_dense_band_matrix(self, geom):
        rng = np.random.default_rng(RNG_SEED + 1)
        for _ in range(20):
            taps = ChannelTaps(
                rng.standard_normal(3) + 1j * rng.standard_normal(3),
                rng.uniform(0, geom.l_max, 3),
                rng.uniform(-2, 2, 3),
            )
            s = rng.standard_normal(geom.frame_len) + 1j * rng.standard_normal(geom.frame_len)
            h = build_H(taps, geom, form="band")
            np.testing.assert_allclose(
                apply_channel(s, taps, 0.0, None, geom), h @ s, atol=1e-10
            )

    def test_noise_statistics(self, geom):
        rng = np.random.default_rng(RNG_SEED + 2)
        sigma_sq = 0.36
        taps = ChannelTaps([0.0], [0.0], [0.0])  # isolate the noise
        samples = []
        n_frames = 1_000_000 // geom.frame_len + 1
        for _ in range(n_frames):
            samples.append(apply_channel(np.zeros(geom.frame_len), taps, sigma_sq, rng, geom))
        w = np.concatenate(samples)
        assert abs(np.mean(np.abs(w) ** 2) - sigma_sq) < 0.01 * sigma_sq
        corr = np.corrcoef(w.real, w.imag)[0, 1]
        assert abs(corr) < 0.01


class TestBuildH:
    def test_identity_channel(self, geom):
        taps = ChannelTaps([1.0], [0.0], [0.0])
        np.testing.assert_allclose(build_H(taps, geom, "band"), np.eye(geom.frame_len), atol=1e-12)
        np.testing.assert_allclose(
            build_H(taps, geom, "cyclic"), np.eye(geom.frame_len), atol=1e-12
        )

    def test_single_cyclic_shift(self, geom):
        taps = ChannelTaps([1.0], [1.0], [0.0])
        h = build_H(taps, geom, "cyclic")
        s = geom.frame_len
        pi = np.zeros((s, s))
        pi[np.arange(s), (np.arange(s) - 1) % s] = 1.0
        np.testing.assert_allclose(h, pi, atol=1e-12)

    def test_band_and_cyclic_agree_off_wrap(self, geom):
        rng = np.random.default_rng(RNG_SEED + 3)
        taps = ChannelTaps(
            rng.standard_normal(2) + 1j * rng.standard_normal(2), [0.0, 1.0], [0.8, -0.5]
        )
        hb = build_H(taps, geom, "band")
        hc = build_H(taps, geom, "cyclic")
        rows = np.arange(geom.l_max, geom.frame_len)  # rows untouched by the wrap
        np.testing.assert_allclose(hb[rows], hc[rows], atol=1e-10)

    def test_cyclic_rejects_fractional_delay(self, geom):
        taps = ChannelTaps([1.0], [0.5], [0.0])
        with pytest.raises(UnsupportedConfigurationError):
            build_H(taps, geom, "cyclic")


class TestDegradeCsi:
    def test_b_zero_exact(self):
        rng = np.random.default_rng(RNG_SEED)
        h = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        np.testing.assert_array_equal(degrade_csi(h, 0.0, rng), h)

    def test_b_one_independent(self):
        rng = np.random.default_rng(RNG_SEED + 1)
        draws = 100_000
        h = (rng.standard_normal(draws) + 1j * rng.standard_normal(draws)) / np.sqrt(2)
        hbar = degrade_csi(h, 1.0, rng)
        corr = np.abs(np.mean(h * np.conj(hbar)))
        assert corr < 0.02

    def test_second_moment(self):
        # E|hbar|^2 = (1-b^2)/P + b^2 with P = 9 paths and b^2 = 0.001
        rng = np.random.default_rng(RNG_SEED + 2)
        b = np.sqrt(0.001)
        p = 9
        draws = 100_000
        h = np.sqrt(1 / (2 * p)) * (
            rng.standard_normal((draws, p)) + 1j * rng.standard_normal((draws, p))
        )
        hbar = degrade_csi(h, b, rng)
        expected = (1 - b * b) / p + b * b
        measured = np.mean(np.abs(hbar) ** 2)
        np.testing.assert_allclose(expected, 0.1120, atol=2e-4)
        assert abs(measured - expected) / expected < 0.02

    def test_variance_mixing_law(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        b = 0.6
        draws = 200_000
        var_h = 0.25
        h = np.sqrt(var_h / 2) * (rng.standard_normal(draws) + 1j * rng.standard_normal(draws))
        hbar = degrade_csi(h, b, rng)
        expected = (1 - b * b) * var_h + b * b
        assert abs(np.var(hbar) - expected) / expected < 0.02

    def test_invalid_b_rejected(self):
        with pytest.raises(ValueError, match="\\[0, 1\\]"):
            degrade_csi(np.ones(3, dtype=complex), 1.5, np.random.default_rng(0))
