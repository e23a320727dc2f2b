"""Random direct plus cascaded-repeater channels.

Each repeater adds a two-hop branch (terminal-to-repeater convolved with
repeater-to-base) that is delayed by the repeater's processing delay and
weighted by its amplitude gain.  The composite impulse response is the
superposition of the direct path and all delayed branches, scaled so that
the ensemble-average total power stays at 1 no matter how many repeaters
are added:

    h[l] = alpha * (h_direct[l] + sum_r gain_r * h_cascade_r[l - delay_r])
    alpha = 1 / sqrt(1 + sum_r gain_r**2)

Analysis helpers compute the matching average power delay profile and the
subcarrier correlation function (the DFT of the profile under uncorrelated
scattering).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .numerics import complex_normal

__all__ = [
    "RepeaterSpec",
    "ChannelConfig",
    "ChannelRealization",
    "Pdp",
    "gen_rayleigh_taps",
    "cascade_branch",
    "draw_channel",
    "draw_channels",
    "freq_response",
    "average_pdp",
    "frequency_correlation",
    "deterministic_channel",
]


@dataclass(frozen=True)
class RepeaterSpec:
    """One repeater branch: hop tap counts, integer processing delay in
    samples, and amplitude gain."""

    l_ur: int
    l_rg: int
    delay: int
    gain: float = 1.0

    def __post_init__(self):
        if self.l_ur < 1 or self.l_rg < 1:
            raise ConfigError(f"hop tap counts must be >= 1, got ({self.l_ur}, {self.l_rg})")
        if not float(self.delay).is_integer() or self.delay < 0:
            raise ConfigError(f"repeater delay must be a nonnegative integer number "
                              f"of samples, got {self.delay!r}")
        object.__setattr__(self, "delay", int(self.delay))
        if self.gain < 0:
            raise ConfigError(f"repeater gain must be >= 0, got {self.gain}")
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def support(self) -> int:
        """Length of the delayed cascaded response (last tap index + 1)."""
        return self.delay + self.l_ur + self.l_rg - 1


@dataclass(frozen=True)
class ChannelConfig:
    """Channel scenario: direct tap count, repeater branches, FFT size and
    cyclic prefix budget.

    ``fading="rayleigh"`` draws i.i.d. equal-power complex Gaussian taps for
    every hop; ``fading="none"`` replaces each hop by fixed real taps of the
    same per-tap power (a deterministic debug channel; with ``l_d=1`` and no
    repeaters it is the flat unit channel).
    """

    l_d: int
    repeaters: tuple[RepeaterSpec, ...] = ()
    n_fft: int = 128
    cp_len: int = 32
    fading: str = "rayleigh"

    def __post_init__(self):
        object.__setattr__(self, "repeaters", tuple(self.repeaters))
        if self.l_d < 0:
            raise ConfigError(f"direct tap count must be >= 0, got {self.l_d}")
        if self.l_d == 0 and not self.repeaters:
            raise ConfigError("channel needs a direct path or at least one repeater")
        if self.n_fft < 1 or self.cp_len < 0:
            raise ConfigError(f"invalid sizes: n_fft={self.n_fft}, cp_len={self.cp_len}")
        if self.fading not in ("rayleigh", "none"):
            raise ConfigError(f"unknown fading mode {self.fading!r}")
        if self.l_d > self.cp_len:
            raise ConfigError(f"direct support {self.l_d} exceeds CP length {self.cp_len}")
        for i, rep in enumerate(self.repeaters):
            if rep.support > self.cp_len:
                raise ConfigError(
                    f"repeater {i} (delay {rep.delay}, hops {rep.l_ur}+{rep.l_rg}) has "
                    f"support {rep.support} > CP length {self.cp_len}")
        if self.support > self.n_fft:
            raise ConfigError(f"channel support {self.support} exceeds FFT size {self.n_fft}")

    @property
    def support(self) -> int:
        """Composite impulse-response length."""
        reps = max((r.support for r in self.repeaters), default=0)
        return max(self.l_d, reps)

    @property
    def power_scale(self) -> float:
        """Amplitude normalization keeping ensemble-average power at 1."""
        total = (1.0 if self.l_d > 0 else 0.0) + sum(r.gain**2 for r in self.repeaters)
        return 1.0 / np.sqrt(total)


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: per-branch taps, the composed impulse response and
    its full-band frequency response."""

    direct: np.ndarray
    cascades: tuple[np.ndarray, ...]
    impulse_response: np.ndarray
    frequency_response: np.ndarray

    @property
    def support(self) -> int:
        return len(self.impulse_response)

    def alloc_response(self, alloc_start: int, m_alloc: int) -> np.ndarray:
        """Frequency response on a contiguous subcarrier allocation."""
        return self.frequency_response[alloc_start:alloc_start + m_alloc]


@dataclass(frozen=True)
class Pdp:
    """Average power per delay tap, normalized to unit total power."""

    powers: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float)
        object.__setattr__(self, "powers", p)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("PDP must be a nonempty 1-D array")
        if np.any(p < 0):
            raise ValueError("PDP entries must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"PDP must sum to 1, got {p.sum()!r}")


def gen_rayleigh_taps(rng: np.random.Generator, n_taps: int, total_power: float) -> np.ndarray:
    """i.i.d. circularly symmetric Gaussian taps splitting total_power equally."""
    if n_taps < 1:
        raise ValueError(f"tap count must be >= 1, got {n_taps}")
    if total_power <= 0:
        raise ValueError(f"total power must be > 0, got {total_power}")
    return complex_normal(rng, (n_taps,), total_power / n_taps)


def cascade_branch(h_ur: np.ndarray, h_rg: np.ndarray) -> np.ndarray:
    """Two-hop cascaded impulse response (linear convolution of the hops)."""
    a = np.asarray(h_ur)
    b = np.asarray(h_rg)
    if a.size == 0 or b.size == 0:
        raise ValueError("hop impulse responses must be nonempty")
    return np.convolve(a, b)


def _convolve_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise linear convolution of two (n, .) arrays via zero-padded FFT."""
    out_len = a.shape[1] + b.shape[1] - 1
    nfft = 1 << (out_len - 1).bit_length()
    spec = np.fft.fft(a, n=nfft, axis=1) * np.fft.fft(b, n=nfft, axis=1)
    return np.fft.ifft(spec, axis=1)[:, :out_len]


def _draw_hop(rng, n, taps, fading):
    if fading == "rayleigh":
        return complex_normal(rng, (n, taps), 1.0 / taps)
    return np.full((n, taps), np.sqrt(1.0 / taps), dtype=complex)


def draw_channels(config: ChannelConfig, rng: np.random.Generator, n: int):
    """Draw ``n`` channel realizations at once.

    Returns (direct, cascades, impulse, spectrum) where direct is (n, l_d),
    cascades is a list of (n, l_ur+l_rg-1) arrays (one per repeater, without
    delay or gain applied), impulse is (n, support) and spectrum (n, n_fft).
    Hop draws happen in a fixed order (direct first, then each repeater's
    two hops), so a given generator state always yields the same channels.
    """
    support = config.support
    alpha = config.power_scale
    impulse = np.zeros((n, support), dtype=complex)

    if config.l_d > 0:
        direct = _draw_hop(rng, n, config.l_d, config.fading)
        impulse[:, :config.l_d] += direct
    else:
        direct = np.zeros((n, 0), dtype=complex)

    cascades = []
    for rep in config.repeaters:
        ur = _draw_hop(rng, n, rep.l_ur, config.fading)
        rg = _draw_hop(rng, n, rep.l_rg, config.fading)
        casc = _convolve_rows(ur, rg)
        cascades.append(casc)
        impulse[:, rep.delay:rep.support] += rep.gain * casc

    impulse *= alpha
    spectrum = np.fft.fft(impulse, n=config.n_fft, axis=1)
    return direct, cascades, impulse, spectrum


def draw_channel(config: ChannelConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one channel realization."""
    direct, cascades, impulse, spectrum = draw_channels(config, rng, 1)
    return ChannelRealization(
        direct=direct[0],
        cascades=tuple(c[0] for c in cascades),
        impulse_response=impulse[0],
        frequency_response=spectrum[0],
    )


def deterministic_channel(h_eff, n_fft: int) -> ChannelRealization:
    """Wrap a fixed impulse response as a realization (test/debug helper)."""
    h = np.asarray(h_eff, dtype=complex)
    return ChannelRealization(
        direct=h.copy(),
        cascades=(),
        impulse_response=h,
        frequency_response=freq_response(h, n_fft),
    )


def freq_response(h_eff, n_fft: int) -> np.ndarray:
    """N-point frequency response of a zero-padded impulse response."""
    h = np.asarray(h_eff)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("impulse response must be a nonempty 1-D vector")
    if len(h) > n_fft:
        raise ValueError(f"impulse support {len(h)} exceeds FFT size {n_fft}")
    return np.fft.fft(h, n=n_fft)


def average_pdp(config: ChannelConfig) -> Pdp:
    """Analytic composite power delay profile of a scenario.

    Assumes zero-mean independent taps, so each cascaded branch profile is
    the convolution of its two equal hop profiles, shifted by the repeater
    delay.  The built-in power normalization makes the result sum to 1.
    """
    weight = config.power_scale**2
    powers = np.zeros(config.support)
    if config.l_d > 0:
        powers[:config.l_d] += weight / config.l_d
    for rep in config.repeaters:
        hop_ur = np.full(rep.l_ur, 1.0 / rep.l_ur)
        hop_rg = np.full(rep.l_rg, 1.0 / rep.l_rg)
        casc = np.convolve(hop_ur, hop_rg)
        powers[rep.delay:rep.support] += weight * rep.gain**2 * casc
    return Pdp(powers)


def frequency_correlation(pdp: Pdp, n_fft: int) -> np.ndarray:
    """Subcarrier correlation across lags 0..n_fft-1: the DFT of the PDP.

    Under uncorrelated scattering this equals the ensemble average of
    ``h[k+lag] * conj(h[k])`` over subcarriers k.  Lag 0 gives exactly 1
    for a normalized profile.
    """
    if len(pdp.powers) > n_fft:
        raise ValueError(f"PDP support {len(pdp.powers)} exceeds FFT size {n_fft}")
    return np.fft.fft(pdp.powers, n=n_fft)
