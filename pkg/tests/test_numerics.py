import numpy as np
import pytest
from scipy.integrate import quad

from replink.numerics import (SeededRng, draw_complex_gaussian, q_function,
                              scaled_idft, unitary_dft)


def test_unitary_dft_of_impulse_is_constant():
    impulse = np.zeros(4, dtype=complex)
    impulse[0] = 1.0
    np.testing.assert_allclose(unitary_dft(impulse), np.full(4, 0.5), atol=1e-15)


def test_unitary_idft_of_constant_is_impulse():
    out = unitary_dft(np.full(4, 0.5), inverse=True)
    expected = np.zeros(4, dtype=complex)
    expected[0] = 1.0
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_unitary_round_trip():
    rng = np.random.default_rng(5)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    np.testing.assert_allclose(unitary_dft(unitary_dft(v), inverse=True), v, atol=1e-12)


def test_parseval_energy_preserved():
    rng = np.random.default_rng(6)
    for size in (3, 8, 72, 128):
        v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        energy_in = np.sum(np.abs(v) ** 2)
        energy_out = np.sum(np.abs(unitary_dft(v)) ** 2)
        assert abs(energy_out - energy_in) <= 1e-10 * energy_in


def test_zero_length_rejected():
    with pytest.raises(ValueError):
        unitary_dft(np.array([]))
    with pytest.raises(ValueError):
        scaled_idft(np.array([]))


def test_scaled_idft_of_ones_is_unit_impulse():
    for m in (4, 6, 72):
        out = scaled_idft(np.ones(m))
        assert out[0] == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(out[1:])) < 1e-14


def test_scaled_idft_of_impulse_is_constant():
    np.testing.assert_allclose(scaled_idft(np.array([1.0, 0, 0, 0])),
                               np.full(4, 0.25), atol=1e-15)


def test_scaled_idft_matches_dense_matrix():
    rng = np.random.default_rng(7)
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    n = np.arange(6)
    dense = np.exp(2j * np.pi * np.outer(n, n) / 6) / 6
    np.testing.assert_allclose(scaled_idft(v), dense @ v, atol=1e-12)


def test_scaled_idft_is_unitary_inverse_over_sqrt_m():
    rng = np.random.default_rng(8)
    v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    np.testing.assert_allclose(scaled_idft(v),
                               unitary_dft(v, inverse=True) / np.sqrt(16), atol=1e-13)


class TestQFunction:
    def test_zero_gives_half(self):
        assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_deep_tail_underflows_cleanly(self):
        assert q_function(40.0) < 1e-300
        assert q_function(-40.0) == pytest.approx(1.0, abs=1e-15)

    def test_matches_numerical_integration(self):
        # independent oracle: integrate the standard normal density
        density = lambda t: np.exp(-t**2 / 2) / np.sqrt(2 * np.pi)
        oracle, _ = quad(density, 1.0, np.inf)
        assert q_function(1.0) == pytest.approx(oracle, rel=1e-10)
        assert q_function(1.0) == pytest.approx(0.1586552539, abs=1e-9)

    def test_symmetry(self):
        for x in (0.3, 1.7, 4.2):
            assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_decreasing(self):
        grid = np.linspace(-8, 8, 201)
        values = q_function(grid)
        assert np.all(np.diff(values) < 0)

    def test_tail_bounds(self):
        # x*phi/(1+x^2) <= Q(x) <= phi/x for x > 0
        for x in (0.5, 1.0, 2.0, 5.0, 10.0, 30.0):
            phi = np.exp(-x**2 / 2) / np.sqrt(2 * np.pi)
            q = q_function(x)
            assert x * phi / (1 + x**2) <= q <= phi / x


class TestComplexGaussian:
    def test_zero_variance_gives_zeros(self):
        gen = SeededRng(1).generator()
        assert np.all(draw_complex_gaussian(gen, 16, 0.0) == 0)

    def test_negative_variance_rejected(self):
        gen = SeededRng(1).generator()
        with pytest.raises(ValueError):
            draw_complex_gaussian(gen, 4, -0.5)

    def test_same_seed_and_stream_reproduces(self):
        a = draw_complex_gaussian(SeededRng(42, 3).generator(), 100, 1.0)
        b = draw_complex_gaussian(SeededRng(42, 3).generator(), 100, 1.0)
        np.testing.assert_array_equal(a, b)

    def test_moments_at_large_sample(self):
        samples = draw_complex_gaussian(SeededRng(9, 0).generator(), 10**6, 2.0)
        assert abs(samples.mean()) < 0.01
        var = np.mean(np.abs(samples) ** 2)
        assert 1.98 <= var <= 2.02


class TestSeededRng:
    def test_distinct_streams_differ(self):
        a = SeededRng(5, 0).generator().standard_normal(32)
        b = SeededRng(5, 1).generator().standard_normal(32)
        assert not np.allclose(a, b)

    def test_counter_blocks_reproduce_and_differ(self):
        rng = SeededRng(5, 2)
        a1 = rng.generator(block=4).standard_normal(32)
        a2 = rng.generator(block=4).standard_normal(32)
        b = rng.generator(block=5).standard_normal(32)
        np.testing.assert_array_equal(a1, a2)
        assert not np.allclose(a1, b)

    def test_substream_cross_correlation_small(self):
        n = 10**5
        a = SeededRng(77, 0).generator().standard_normal(n)
        b = SeededRng(77, 1).generator().standard_normal(n)
        corr = np.dot(a - a.mean(), b - b.mean()) / (n * a.std() * b.std())
        assert abs(corr) < 0.02
