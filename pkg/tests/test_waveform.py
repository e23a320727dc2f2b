import numpy as np
import pytest

from replink.channel import ChannelConfig, deterministic_channel, draw_channel
from replink.constellation import make_qpsk
from replink.exceptions import ConfigError
from replink.numerics import SeededRng, unitary_dft
from replink.waveform import (WaveformConfig, apply_channel, modulate,
                              receive_demap)

TABLE1 = WaveformConfig(n_fft=128, m_alloc=72, cp_len=32)


def random_symbols(m, stream=0):
    gen = SeededRng(21, stream).generator()
    return make_qpsk().points[gen.integers(0, 4, m)]


def loopback(cfg, x, ch, noise_var=0.0, stream=1):
    tx = modulate(x, cfg)
    rx = apply_channel(tx, ch, noise_var, SeededRng(22, stream).generator())
    return receive_demap(rx, cfg)


class TestModulate:
    def test_full_allocation_no_prefix_is_identity(self):
        cfg = WaveformConfig(n_fft=16, m_alloc=16, cp_len=0)
        x = random_symbols(16)
        y = loopback(cfg, x, deterministic_channel([1.0], 16))
        # transforms cancel; receive gives the spread vector, despread by hand
        np.testing.assert_allclose(unitary_dft(y, inverse=True), x, atol=1e-12)

    def test_constant_block_occupies_single_tone(self):
        cfg = WaveformConfig(n_fft=16, m_alloc=8, cp_len=0, alloc_start=0)
        tx = modulate(np.ones(8, dtype=complex), cfg)
        spectrum = unitary_dft(tx.time_samples)
        occupied = np.abs(spectrum) > 1e-12
        assert occupied.sum() == 1 and occupied[0]

    def test_table1_block_length(self):
        tx = modulate(random_symbols(72), TABLE1)
        assert len(tx.time_samples) == 160

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            modulate(np.ones(71), TABLE1)

    def test_average_block_energy_accounts_for_prefix(self):
        total = 0.0
        n = 400
        for i in range(n):
            tx = modulate(random_symbols(72, stream=100 + i), TABLE1)
            total += np.sum(np.abs(tx.time_samples) ** 2)
        expected = 72 * (1 + TABLE1.cp_len / TABLE1.n_fft)
        assert total / n == pytest.approx(expected, rel=0.02)


class TestApplyChannel:
    def test_identity_channel_no_noise(self):
        tx = modulate(random_symbols(72), TABLE1)
        out = apply_channel(tx, deterministic_channel([1.0], 128), 0.0,
                            SeededRng(23, 0).generator())
        np.testing.assert_allclose(out, tx.time_samples, atol=1e-12)

    def test_pure_delay_shifts_block(self):
        tx = modulate(random_symbols(72), TABLE1)
        h = np.zeros(3, dtype=complex)
        h[2] = 1.0
        out = apply_channel(tx, deterministic_channel(h, 128), 0.0,
                            SeededRng(23, 1).generator())
        np.testing.assert_allclose(out[2:], tx.time_samples[:-2], atol=1e-12)
        np.testing.assert_allclose(out[:2], 0.0, atol=1e-12)

    def test_zero_channel_leaves_pure_noise(self):
        cfg = WaveformConfig(n_fft=4096, m_alloc=4096, cp_len=0)
        tx = modulate(np.zeros(4096, dtype=complex) + random_symbols(4096), cfg)
        noise_var = 0.3
        total = 0.0
        count = 0
        for k in range(25):
            out = apply_channel(tx, deterministic_channel([0.0], 4096), noise_var,
                                SeededRng(23, 2).generator(block=k))
            total += np.sum(np.abs(out) ** 2)
            count += out.size
        assert total / count == pytest.approx(noise_var, rel=0.02)

    def test_support_violation_rejected(self):
        tx = modulate(random_symbols(72), TABLE1)
        too_long = deterministic_channel(np.ones(34) / np.sqrt(34), 128)
        with pytest.raises(ConfigError):
            apply_channel(tx, too_long, 0.0, SeededRng(23, 3).generator())


class TestReceiveDemap:
    def test_loopback_recovers_spread_vector(self):
        x = random_symbols(72)
        y = loopback(TABLE1, x, deterministic_channel([1.0], 128))
        np.testing.assert_allclose(y, unitary_dft(x), atol=1e-10)

    def test_diagonal_model_on_random_channel(self):
        ch_cfg = ChannelConfig(l_d=4, n_fft=128, cp_len=32)
        ch = draw_channel(ch_cfg, SeededRng(24, 0).generator())
        x = random_symbols(72)
        y = loopback(TABLE1, x, ch)
        spread = unitary_dft(x)
        h_alloc = ch.alloc_response(0, 72)
        mask = np.abs(spread) > 1e-6
        np.testing.assert_allclose(y[mask], (h_alloc * spread)[mask], atol=1e-8)

    def test_diagonalization_max_residual(self):
        # noiseless end-to-end map is exactly diagonal for every valid config
        for alloc_start in (0, 13, 56):
            cfg = WaveformConfig(n_fft=128, m_alloc=72, cp_len=32, alloc_start=alloc_start)
            ch = draw_channel(ChannelConfig(l_d=4,
                                            repeaters=(),
                                            n_fft=128, cp_len=32),
                              SeededRng(24, alloc_start + 1).generator())
            x = random_symbols(72, stream=alloc_start)
            y = loopback(cfg, x, ch)
            model = ch.alloc_response(alloc_start, 72) * unitary_dft(x)
            assert np.max(np.abs(y - model)) <= 1e-8

    def test_circularity_holds_one_past_prefix_then_breaks(self):
        # exact up to support cp_len + 1; the conservative validator already
        # rejects anything longer than cp_len
        gen = SeededRng(24, 9).generator()
        x = random_symbols(72, stream=9)
        for support, exact in ((TABLE1.cp_len + 1, True), (TABLE1.cp_len + 2, False)):
            taps = (gen.standard_normal(support) + 1j * gen.standard_normal(support))
            ch = deterministic_channel(taps / np.linalg.norm(taps), 128)
            tx = modulate(x, TABLE1)
            rx = apply_channel(tx, ch, 0.0, gen, check_support=False)
            y = receive_demap(rx, TABLE1)
            residual = np.max(np.abs(y - ch.alloc_response(0, 72) * unitary_dft(x)))
            assert (residual <= 1e-8) == exact

    def test_energy_accounting(self):
        ch = draw_channel(ChannelConfig(l_d=4, n_fft=128, cp_len=32),
                          SeededRng(24, 20).generator())
        x = random_symbols(72, stream=20)
        y = loopback(TABLE1, x, ch)
        spread = unitary_dft(x)
        expected = np.sum(np.abs(ch.alloc_response(0, 72)) ** 2 * np.abs(spread) ** 2)
        assert np.sum(np.abs(y) ** 2) == pytest.approx(expected, rel=1e-8)

    def test_noise_variance_preserved_through_fft(self):
        noise_var = 0.25
        x = np.zeros(72, dtype=complex)
        total = 0.0
        count = 0
        for k in range(60):
            tx = modulate(x, TABLE1)
            rx = apply_channel(tx, deterministic_channel([1.0], 128), noise_var,
                               SeededRng(24, 30).generator(block=k))
            y = receive_demap(rx, TABLE1)
            total += np.sum(np.abs(y) ** 2)
            count += y.size
        assert total / count == pytest.approx(noise_var, rel=0.02)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            receive_demap(np.ones(159), TABLE1)
