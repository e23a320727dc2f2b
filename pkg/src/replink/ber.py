"""Bit error rate engines.

Two independent routes to the same quantity:

* ``semi_analytic_ber`` draws random channels, builds the equalizer
  decomposition for each, draws random interfering-symbol vectors, and
  averages the *closed-form* conditional bit error probability (exact
  Q-function expressions, no Gaussian approximation of the residual
  interference) over everything.
* ``full_stack_ber`` runs the actual waveform chain (spread, modulate,
  prefix, convolve, noise, FFT, equalize, despread, hard detect) and
  counts bit errors.

Both are driven by addressable RNG streams split into fixed counter
blocks per chunk of work, so results are bit-reproducible and independent
of how chunks are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelConfig, draw_channels
from .constellation import ConstellationSpec
from .equalizer import build_states, equalize_despread_blocks
from .exceptions import ConfigError
from .numerics import SeededRng, q_function
from .waveform import (WaveformConfig, apply_channel_blocks, modulate_blocks,
                       receive_demap_blocks)

__all__ = [
    "BerPoint",
    "SweepResult",
    "conditional_ber_qpsk",
    "conditional_ber_rect_qam",
    "semi_analytic_ber",
    "full_stack_ber",
    "diversity_metric",
    "snr_db_to_noise_var",
    "wilson_half_width",
]


@dataclass(frozen=True)
class BerPoint:
    """One estimated error rate: the SNR it belongs to, the estimate, the
    evaluation count behind it (conditional-probability terms or bits) and
    a 95% confidence half-width."""

    snr_db: float
    ber: float
    n_effective: int
    half_width: float

    def __post_init__(self):
        if self.n_effective <= 0:
            raise ValueError("n_effective must be positive")
        if not -1e-12 <= self.ber <= 1.0:
            raise ValueError(f"ber out of range: {self.ber}")


@dataclass(frozen=True)
class SweepResult:
    """All points of one scenario sweep in one mode."""

    scenario: str
    mode: str
    points: tuple[BerPoint, ...] = field(default_factory=tuple)
    config_digest: str = ""
    seed: int = 0

    def __post_init__(self):
        snrs = [p.snr_db for p in self.points]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("sweep points must have strictly increasing SNR")


def snr_db_to_noise_var(snr_db: float) -> float:
    """Noise variance for unit-energy symbols over a unit-power channel."""
    return 10.0 ** (-snr_db / 10.0)


def wilson_half_width(errors: float, total: int, z: float = 1.959963984540054) -> float:
    """Half-width of the 95% Wilson score interval for a binomial rate."""
    if total <= 0:
        raise ValueError("total must be positive")
    p = errors / total
    denom = 1.0 + z**2 / total
    return z * math.sqrt(p * (1.0 - p) / total + z**2 / (4.0 * total**2)) / denom


def _qpsk_cond_ber(interference, sigma_r, amplitude: float):
    """Closed-form QPSK conditional BER, broadcasting over arrays.

    Average of the four zero-threshold tail terms: each axis errs with
    probability (Q((a + shift)/sigma_r) + Q((a - shift)/sigma_r)) / 2 where
    shift is that axis's interference component.
    """
    re = np.real(interference)
    im = np.imag(interference)
    return 0.25 * (q_function((amplitude + re) / sigma_r)
                   + q_function((amplitude - re) / sigma_r)
                   + q_function((amplitude + im) / sigma_r)
                   + q_function((amplitude - im) / sigma_r))


def conditional_ber_qpsk(interference: complex, sigma_nu_sq: float) -> float:
    """Exact QPSK bit error probability given the interference offset and
    the post-despread noise variance."""
    if sigma_nu_sq <= 0:
        raise ValueError(f"noise variance must be > 0, got {sigma_nu_sq}")
    sigma_r = math.sqrt(sigma_nu_sq / 2.0)
    return float(_qpsk_cond_ber(complex(interference), sigma_r, 1.0 / math.sqrt(2.0)))


def _axis_transition(levels, edges, shift, sigma_r):
    """P(decide level j | sent level i) for one axis, broadcasting shift.

    Returns an array (..., n_levels, n_levels): the noisy coordinate is
    level_i + shift, regions are the intervals between adjacent edges.
    """
    mu = levels[:, None] + np.asarray(shift)[..., None, None]           # (..., i, 1)
    sig = np.asarray(sigma_r)[..., None, None]
    upper_tails = q_function((edges[None, :] - mu) / sig)               # (..., i, edges)
    return upper_tails[..., :-1] - upper_tails[..., 1:]


def _rect_cond_ber(spec: ConstellationSpec, interference, sigma_r):
    """Generic rectangular-region conditional BER, broadcasting over arrays."""
    levels = spec.axis_levels
    edges = spec.decision_edges
    t_i = _axis_transition(levels, edges, np.real(interference), sigma_r)
    t_q = _axis_transition(levels, edges, np.imag(interference), sigma_r)
    i_idx, q_idx = spec.level_indices()
    hamming = (spec.labels[:, None, :] != spec.labels[None, :, :]).sum(axis=2)
    # weight[a, c, b, d]: Hamming distance between the point at axis levels
    # (a, c) and the decision at axis levels (b, d)
    n_lv = len(levels)
    weight = np.zeros((n_lv, n_lv, n_lv, n_lv))
    weight[i_idx[:, None], q_idx[:, None], i_idx[None, :], q_idx[None, :]] = hamming
    per_symbol = np.einsum("...ab,...cd,acbd->...", t_i, t_q, weight)
    return per_symbol / (spec.bits_per_symbol * len(spec.points))


def conditional_ber_rect_qam(spec: ConstellationSpec, interference: complex,
                             sigma_nu_sq: float) -> float:
    """Conditional BER for any rectangular-region Gray constellation,
    evaluated as Hamming-weighted products of per-axis Q-function
    differences over the decision intervals."""
    if not spec.is_rectangular:
        raise ConfigError(f"{spec.name}: decision regions are not rectangular; "
                          "the closed-form kernel does not apply")
    if sigma_nu_sq <= 0:
        raise ValueError(f"noise variance must be > 0, got {sigma_nu_sq}")
    sigma_r = math.sqrt(sigma_nu_sq / 2.0)
    return float(_rect_cond_ber(spec, np.complex128(interference), np.float64(sigma_r)))


def _check_configs(ch_cfg: ChannelConfig, wf_cfg: WaveformConfig):
    if ch_cfg.n_fft != wf_cfg.n_fft:
        raise ConfigError(f"channel FFT size {ch_cfg.n_fft} != waveform {wf_cfg.n_fft}")
    if ch_cfg.cp_len != wf_cfg.cp_len:
        raise ConfigError(f"channel CP {ch_cfg.cp_len} != waveform CP {wf_cfg.cp_len}")
    if ch_cfg.support > wf_cfg.cp_len:
        raise ConfigError(f"channel support {ch_cfg.support} exceeds CP {wf_cfg.cp_len}")


def semi_analytic_chunk(ch_cfg: ChannelConfig, wf_cfg: WaveformConfig,
                        spec: ConstellationSpec, noise_var: float,
                        n_channels: int, n_interf: int,
                        gen: np.random.Generator,
                        interference_index: int = 0):
    """One chunk of the semi-analytic average.

    Draws ``n_channels`` channels and ``n_interf`` fresh interfering-symbol
    vectors per channel, evaluates the closed-form conditional BER at the
    fixed symbol slot, and returns (sum of per-channel means, sum of their
    squares, channel count).  Degenerate channels (no usable signal)
    contribute the chance rate 0.5.
    """
    m = wf_cfg.m_alloc
    _, _, _, spectrum = draw_channels(ch_cfg, gen, n_channels)
    h_alloc = spectrum[:, wf_cfg.alloc_start:wf_cfg.alloc_start + m]
    eq = build_states(h_alloc, noise_var)

    # Coefficient hitting slot i from slot j is circulant_col[(i - j) mod M];
    # the slot's own coefficient (= 1) is excluded from the interference.
    perm = (interference_index - np.arange(m)) % m
    coeff = eq.circulant_col[:, perm]
    coeff[:, interference_index] = 0.0

    # Single precision is plenty for the interference offsets (they only
    # shift Q-function arguments); the probabilities are evaluated in
    # double precision.
    raw = gen.integers(0, len(spec.points), size=(n_channels, n_interf, m), dtype=np.uint8)
    symbols = spec.points.astype(np.complex64)[raw]
    interf = np.matmul(symbols, coeff.astype(np.complex64)[:, :, None])[:, :, 0]
    interf = interf.astype(np.complex128)

    sigma_r = np.sqrt(eq.noise_var_out / 2.0)[:, None]
    if spec.name == "qpsk":
        cond = _qpsk_cond_ber(interf, sigma_r, spec.axis_levels[-1])
    else:
        cond = _rect_cond_ber(spec, interf, sigma_r)
    per_channel = cond.mean(axis=1)
    per_channel[eq.degenerate] = 0.5
    return float(per_channel.sum()), float(np.dot(per_channel, per_channel)), n_channels


def semi_analytic_ber(ch_cfg: ChannelConfig, wf_cfg: WaveformConfig,
                      spec: ConstellationSpec, snr_db: float,
                      n_channels: int, n_interf: int, chunk: int,
                      rng: SeededRng, interference_index: int = 0) -> BerPoint:
    """Average the closed-form conditional BER over random channels and
    interfering-symbol draws.

    Work proceeds in chunks of up to ``chunk`` channels; chunk k always
    consumes RNG counter block k of ``rng``, so the estimate is identical
    whether chunks run here or are fanned out to workers.
    """
    if min(n_channels, n_interf, chunk) < 1:
        raise ValueError("counts must be >= 1")
    _check_configs(ch_cfg, wf_cfg)
    noise_var = snr_db_to_noise_var(snr_db)

    sums, sumsqs, counts = [], [], 0
    for k, size in enumerate(_chunk_sizes(n_channels, chunk)):
        s, s2, n = semi_analytic_chunk(ch_cfg, wf_cfg, spec, noise_var, size,
                                       n_interf, rng.generator(block=k),
                                       interference_index)
        sums.append(s)
        sumsqs.append(s2)
        counts += n
    return _semi_point(snr_db, sums, sumsqs, counts, n_interf)


def _chunk_sizes(total: int, chunk: int):
    full, rem = divmod(total, chunk)
    return [chunk] * full + ([rem] if rem else [])


def _semi_point(snr_db, sums, sumsqs, n_channels, n_interf) -> BerPoint:
    """Combine per-chunk (sum, sum-of-squares) pairs into one estimate."""
    total = math.fsum(sums)
    total_sq = math.fsum(sumsqs)
    mean = total / n_channels
    var = max(total_sq / n_channels - mean**2, 0.0)
    half = 1.959963984540054 * math.sqrt(var / n_channels)
    return BerPoint(snr_db=snr_db, ber=mean,
                    n_effective=n_channels * n_interf, half_width=half)


def full_stack_chunk(ch_cfg: ChannelConfig, wf_cfg: WaveformConfig,
                     spec: ConstellationSpec, noise_var: float,
                     n_frames: int, gen: np.random.Generator):
    """One batch of waveform Monte Carlo frames.

    Each frame draws its own channel and data block, runs the full chain
    and counts Gray-label bit errors against the sent bits.  Returns
    (error count, bit count); frames with a degenerate equalizer count at
    the chance rate.
    """
    m = wf_cfg.m_alloc
    bits_per_frame = m * spec.bits_per_symbol
    _, _, impulse, spectrum = draw_channels(ch_cfg, gen, n_frames)
    h_alloc = spectrum[:, wf_cfg.alloc_start:wf_cfg.alloc_start + m]

    bits = gen.integers(0, 2, size=(n_frames, bits_per_frame), dtype=np.uint8)
    tx = modulate_blocks(spec.bits_to_symbols(bits), wf_cfg)
    rx = apply_channel_blocks(tx, impulse, noise_var, gen)
    received = receive_demap_blocks(rx, wf_cfg)

    eq = build_states(h_alloc, noise_var)
    safe_gain = np.where(eq.degenerate, 1.0, eq.mean_gain)
    detected = equalize_despread_blocks(received, eq.weights, safe_gain)
    bits_hat = spec.detect_bits(detected)

    frame_errors = (bits != bits_hat).sum(axis=1).astype(float)
    frame_errors[eq.degenerate] = 0.5 * bits_per_frame
    return float(frame_errors.sum()), n_frames * bits_per_frame


def full_stack_ber(ch_cfg: ChannelConfig, wf_cfg: WaveformConfig,
                   spec: ConstellationSpec, snr_db: float, n_frames: int,
                   rng: SeededRng, frames_chunk: int = 2000) -> BerPoint:
    """Waveform Monte Carlo bit error rate with a Wilson 95% half-width."""
    if n_frames < 1:
        raise ValueError("frame count must be >= 1")
    _check_configs(ch_cfg, wf_cfg)
    noise_var = snr_db_to_noise_var(snr_db)

    errors, bits = 0.0, 0
    for k, size in enumerate(_chunk_sizes(n_frames, frames_chunk)):
        e, b = full_stack_chunk(ch_cfg, wf_cfg, spec, noise_var, size,
                                rng.generator(block=k))
        errors += e
        bits += b
    return BerPoint(snr_db=snr_db, ber=errors / bits, n_effective=bits,
                    half_width=wilson_half_width(errors, bits))


def diversity_metric(ber: float, snr_db: float) -> float:
    """Slope-equivalent reliability exponent -log(ber) / log(snr_linear).

    Defined only for 0 < ber < 1 and snr_db > 0 (linear SNR above 1)."""
    if not 0.0 < ber < 1.0:
        raise ValueError(f"ber must lie strictly in (0, 1), got {ber}")
    if snr_db <= 0:
        raise ValueError(f"snr_db must be > 0, got {snr_db}")
    gamma = 10.0 ** (snr_db / 10.0)
    return -math.log(ber) / math.log(gamma)
