import math

import numpy as np
import pytest

from replink.ber import (BerPoint, conditional_ber_qpsk, conditional_ber_rect_qam,
                         diversity_metric, full_stack_ber, semi_analytic_ber,
                         snr_db_to_noise_var, wilson_half_width)
from replink.channel import ChannelConfig, RepeaterSpec
from replink.constellation import ConstellationSpec, make_qam16, make_qpsk
from replink.equalizer import build_state
from replink.numerics import SeededRng, complex_normal, q_function
from replink.waveform import WaveformConfig

TABLE1_WF = WaveformConfig(n_fft=128, m_alloc=72, cp_len=32)
FLAT = ChannelConfig(l_d=1, fading="none", n_fft=128, cp_len=32)


def mc_detect_qpsk(interference, sigma_nu_sq, n_trials, stream):
    """Detection-level oracle: uniform QPSK + offset + noise, zero-threshold
    detection, Gray bit-error counting."""
    gen = SeededRng(55, stream).generator()
    spec = make_qpsk()
    sent = spec.points[gen.integers(0, 4, n_trials)]
    noisy = sent + interference + complex_normal(gen, n_trials, sigma_nu_sq)
    errors = np.sum(np.sign(noisy.real) != np.sign(sent.real))
    errors += np.sum(np.sign(noisy.imag) != np.sign(sent.imag))
    return errors, 2 * n_trials


def mc_detect_rect(spec, interference, sigma_nu_sq, n_trials, stream):
    """Same oracle for any rectangular alphabet, via the axis detector."""
    gen = SeededRng(56, stream).generator()
    idx = gen.integers(0, len(spec.points), n_trials)
    sent_bits = spec.labels[idx]
    noisy = spec.points[idx] + interference + complex_normal(gen, n_trials, sigma_nu_sq)
    detected = spec.detect_bits(noisy[:, None]).reshape(n_trials, -1)
    return int(np.sum(detected != sent_bits)), n_trials * spec.bits_per_symbol


class TestConditionalQpsk:
    def test_interference_free_collapses_to_q(self):
        assert conditional_ber_qpsk(0.0, 1.0) == pytest.approx(q_function(1.0), abs=1e-14)

    def test_symmetries(self):
        value = conditional_ber_qpsk(0.3 + 0.1j, 0.5)
        assert conditional_ber_qpsk(-0.3 - 0.1j, 0.5) == pytest.approx(value, abs=1e-15)
        assert conditional_ber_qpsk(0.3 - 0.1j, 0.5) == pytest.approx(value, abs=1e-15)

    def test_against_detection_monte_carlo(self):
        interference = 0.3 + 0.1j
        sigma_nu_sq = 0.5
        exact = conditional_ber_qpsk(interference, sigma_nu_sq)
        errors, bits = mc_detect_qpsk(interference, sigma_nu_sq, 10**7, 0)
        sigma = math.sqrt(exact * (1 - exact) / bits)
        assert abs(errors / bits - exact) <= 3 * sigma

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(ValueError):
            conditional_ber_qpsk(0.1, 0.0)


class TestConditionalRectQam:
    def test_specializes_to_qpsk(self):
        spec = make_qpsk()
        gen = SeededRng(57, 0).generator()
        for _ in range(100):
            interference = complex(*gen.normal(0, 0.3, 2))
            sigma_nu_sq = float(gen.uniform(0.05, 2.0))
            exact = conditional_ber_qpsk(interference, sigma_nu_sq)
            generic = conditional_ber_rect_qam(spec, interference, sigma_nu_sq)
            assert abs(generic - exact) <= 1e-12

    def test_vanishing_noise_inside_region(self):
        spec = make_qpsk()
        assert conditional_ber_rect_qam(spec, 0.2 + 0.1j, 1e-4) < 1e-15

    def test_qam16_against_detection_monte_carlo(self):
        spec = make_qam16()
        exact = conditional_ber_rect_qam(spec, 0.0, 0.2)
        errors, bits = mc_detect_rect(spec, 0.0, 0.2, 10**7, 1)
        sigma = math.sqrt(exact * (1 - exact) / bits)
        assert abs(errors / bits - exact) <= 3 * sigma

    def test_qam16_with_interference_against_monte_carlo(self):
        spec = make_qam16()
        interference = 0.15 - 0.08j
        exact = conditional_ber_rect_qam(spec, interference, 0.1)
        errors, bits = mc_detect_rect(spec, interference, 0.1, 10**7, 2)
        sigma = math.sqrt(exact * (1 - exact) / bits)
        assert abs(errors / bits - exact) <= 3 * sigma

    def test_non_rectangular_rejected(self):
        phases = np.exp(2j * np.pi * np.arange(8) / 8)
        labels = [(int(b) for b in f"{i ^ (i >> 1):03b}") for i in range(8)]
        psk8 = ConstellationSpec(name="psk8", points=phases,
                                 labels=[list(l) for l in labels])
        from replink.exceptions import ConfigError
        with pytest.raises(ConfigError):
            conditional_ber_rect_qam(psk8, 0.0, 0.5)


class TestSemiAnalytic:
    def test_flat_deterministic_channel_equals_awgn_form(self):
        spec = make_qpsk()
        for snr_db in (0.0, 4.0, 8.0):
            point = semi_analytic_ber(FLAT, TABLE1_WF, spec, snr_db,
                                      n_channels=16, n_interf=8, chunk=8,
                                      rng=SeededRng(58, 0))
            gamma = 10 ** (snr_db / 10)
            assert abs(point.ber - q_function(math.sqrt(gamma))) <= 1e-10

    def test_deterministic_across_calls(self):
        spec = make_qpsk()
        cfg = ChannelConfig(l_d=4, n_fft=128, cp_len=32)
        a = semi_analytic_ber(cfg, TABLE1_WF, spec, 10.0, n_channels=500,
                              n_interf=10, chunk=128, rng=SeededRng(58, 1))
        b = semi_analytic_ber(cfg, TABLE1_WF, spec, 10.0, n_channels=500,
                              n_interf=10, chunk=128, rng=SeededRng(58, 1))
        assert a.ber == b.ber and a.half_width == b.half_width

    def test_counts_validated(self):
        with pytest.raises(ValueError):
            semi_analytic_ber(FLAT, TABLE1_WF, make_qpsk(), 10.0, n_channels=0,
                              n_interf=1, chunk=1, rng=SeededRng(58, 2))

    def test_frozen_selective_channel_matches_detection_mc(self):
        # deterministic two-branch channel: interference is really present
        cfg = ChannelConfig(l_d=1,
                            repeaters=(RepeaterSpec(l_ur=1, l_rg=1, delay=3, gain=1.0),),
                            n_fft=128, cp_len=32, fading="none")
        spec = make_qpsk()
        snr_db = 12.0
        noise_var = snr_db_to_noise_var(snr_db)
        point = semi_analytic_ber(cfg, TABLE1_WF, spec, snr_db, n_channels=40,
                                  n_interf=5000, chunk=40, rng=SeededRng(58, 3))

        # detection-level Monte Carlo on the same frozen channel
        from replink.channel import draw_channel
        ch = draw_channel(cfg, SeededRng(58, 4).generator())
        state = build_state(ch.alloc_response(0, 72), noise_var)
        gen = SeededRng(58, 5).generator()
        n = 400_000
        symbols = spec.points[gen.integers(0, 4, (n, 72))]
        coeff = np.roll(state.circulant_col[::-1], 1).copy()
        coeff[0] = 0.0
        noisy = (symbols[:, 0] + symbols @ coeff
                 + complex_normal(gen, n, state.noise_var_out))
        errors = np.sum(np.sign(noisy.real) != np.sign(symbols[:, 0].real))
        errors += np.sum(np.sign(noisy.imag) != np.sign(symbols[:, 0].imag))
        mc = errors / (2 * n)
        sigma = math.sqrt(mc * (1 - mc) / (2 * n))
        assert abs(point.ber - mc) <= 3 * sigma

    def test_tracks_full_stack_at_high_snr(self):
        # direct link at 25 dB: the two estimators agree within a modest
        # factor (frame errors are bursty, so the full-stack point needs
        # its full frame budget for a stable ratio)
        cfg = ChannelConfig(l_d=4, n_fft=128, cp_len=32)
        spec = make_qpsk()
        semi = semi_analytic_ber(cfg, TABLE1_WF, spec, 25.0, n_channels=1_000_000,
                                 n_interf=50, chunk=700, rng=SeededRng(58, 7))
        full = full_stack_ber(cfg, TABLE1_WF, spec, 25.0, n_frames=100_000,
                              rng=SeededRng(58, 8))
        assert 0.7 <= semi.ber / full.ber <= 1.4

    def test_interference_index_changes_little(self):
        cfg = ChannelConfig(l_d=4, n_fft=128, cp_len=32)
        spec = make_qpsk()
        base = semi_analytic_ber(cfg, TABLE1_WF, spec, 10.0, n_channels=20_000,
                                 n_interf=10, chunk=700, rng=SeededRng(58, 6))
        for index in (1, 17, 36, 71):
            other = semi_analytic_ber(cfg, TABLE1_WF, spec, 10.0, n_channels=20_000,
                                      n_interf=10, chunk=700, rng=SeededRng(58, 6),
                                      interference_index=index)
            assert abs(other.ber - base.ber) <= base.half_width + other.half_width


class TestFullStack:
    def test_error_free_loopback(self):
        point = full_stack_ber(FLAT, TABLE1_WF, make_qpsk(), 200.0, n_frames=50,
                               rng=SeededRng(59, 0))
        assert point.ber == 0.0

    def test_awgn_matches_closed_form(self):
        snr_db = 10 * math.log10(4.0)
        n_frames = 7000  # ~1e6 bits
        point = full_stack_ber(FLAT, TABLE1_WF, make_qpsk(), snr_db,
                               n_frames=n_frames, rng=SeededRng(59, 1))
        expected = q_function(2.0)
        sigma = math.sqrt(expected * (1 - expected) / point.n_effective)
        assert abs(point.ber - expected) <= 3 * sigma

    def test_deterministic_and_chunk_invariant(self):
        cfg = ChannelConfig(l_d=4, n_fft=128, cp_len=32)
        a = full_stack_ber(cfg, TABLE1_WF, make_qpsk(), 8.0, n_frames=3000,
                           rng=SeededRng(59, 2))
        b = full_stack_ber(cfg, TABLE1_WF, make_qpsk(), 8.0, n_frames=3000,
                           rng=SeededRng(59, 2))
        assert a.ber == b.ber

    def test_qam16_runs_and_degrades_vs_qpsk(self):
        cfg = ChannelConfig(l_d=4, n_fft=128, cp_len=32)
        qpsk = full_stack_ber(cfg, TABLE1_WF, make_qpsk(), 12.0, n_frames=4000,
                              rng=SeededRng(59, 3))
        qam = full_stack_ber(cfg, TABLE1_WF, make_qam16(), 12.0, n_frames=4000,
                             rng=SeededRng(59, 3))
        assert qam.ber > qpsk.ber


class TestDiversityMetric:
    def test_definitional_values(self):
        assert diversity_metric(1e-4, 20.0) == pytest.approx(2.0, abs=1e-12)
        assert diversity_metric(0.01, 10.0) == pytest.approx(2.0, abs=1e-12)

    def test_domain_errors(self):
        for ber, snr in ((0.0, 10.0), (1.0, 10.0), (0.5, 0.0), (0.5, -3.0)):
            with pytest.raises(ValueError):
                diversity_metric(ber, snr)


class TestPlumbing:
    def test_ber_point_validation(self):
        with pytest.raises(ValueError):
            BerPoint(snr_db=0.0, ber=0.1, n_effective=0, half_width=0.0)
        with pytest.raises(ValueError):
            BerPoint(snr_db=0.0, ber=1.5, n_effective=10, half_width=0.0)

    def test_wilson_half_width_monotone_in_n(self):
        wide = wilson_half_width(10, 100)
        narrow = wilson_half_width(1000, 10_000)
        assert narrow < wide
        assert wilson_half_width(0, 100) > 0
