"""DFT-spread OFDM transmit/receive chain.

The transmit path spreads a block of data symbols with an orthonormal DFT,
maps the spectrum onto a contiguous subcarrier allocation, OFDM-modulates
with an orthonormal inverse FFT and prepends a cyclic prefix.  The channel
is applied as a true linear convolution per block (the prefix absorbs the
inter-block spill), followed by additive complex Gaussian noise.  The
receive path removes the prefix, applies the forward FFT and extracts the
allocated subcarriers.

As long as the channel support fits the prefix (length <= cp_len + 1), the
end-to-end map is exactly diagonal: each allocated subcarrier sees its own
complex channel coefficient plus white noise.

Single-block functions are thin wrappers over the row-batched versions so
the Monte Carlo driver and the per-block API share one implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .exceptions import ConfigError
from .numerics import complex_normal

__all__ = [
    "WaveformConfig",
    "TxBlock",
    "modulate",
    "apply_channel",
    "receive_demap",
    "modulate_blocks",
    "apply_channel_blocks",
    "receive_demap_blocks",
]


@dataclass(frozen=True)
class WaveformConfig:
    """Block sizes: FFT size, spreading size (= allocated subcarriers),
    cyclic prefix length and first allocated subcarrier index."""

    n_fft: int
    m_alloc: int
    cp_len: int
    alloc_start: int = 0

    def __post_init__(self):
        if not (1 <= self.m_alloc <= self.n_fft):
            raise ConfigError(f"need 1 <= m_alloc <= n_fft, got {self.m_alloc}, {self.n_fft}")
        if self.alloc_start < 0 or self.alloc_start + self.m_alloc > self.n_fft:
            raise ConfigError(f"allocation [{self.alloc_start}, "
                              f"{self.alloc_start + self.m_alloc}) outside FFT size {self.n_fft}")
        if self.cp_len < 0:
            raise ConfigError(f"cp_len must be >= 0, got {self.cp_len}")

    @property
    def block_len(self) -> int:
        return self.n_fft + self.cp_len


@dataclass(frozen=True)
class TxBlock:
    """One transmit block: the data symbols and the CP-extended time samples."""

    symbols: np.ndarray
    time_samples: np.ndarray
    cfg: WaveformConfig


def modulate_blocks(x: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Spread, map and OFDM-modulate rows of data symbols.

    x has shape (blocks, m_alloc); returns (blocks, n_fft + cp_len).
    """
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if x.shape[1] != cfg.m_alloc:
        raise ValueError(f"expected {cfg.m_alloc} symbols per block, got {x.shape[1]}")
    spread = np.fft.fft(x, norm="ortho", axis=1)
    grid = np.zeros((x.shape[0], cfg.n_fft), dtype=complex)
    grid[:, cfg.alloc_start:cfg.alloc_start + cfg.m_alloc] = spread
    core = np.fft.ifft(grid, norm="ortho", axis=1)
    if cfg.cp_len == 0:
        return core
    return np.concatenate([core[:, -cfg.cp_len:], core], axis=1)


def apply_channel_blocks(blocks: np.ndarray, impulses: np.ndarray, noise_var: float,
                         rng: np.random.Generator) -> np.ndarray:
    """Convolve each row with its own channel and add white noise.

    blocks is (n, block_len), impulses (n, support) or (support,) shared by
    all rows.  The linear convolution is truncated to the block span.
    """
    blocks = np.atleast_2d(blocks)
    impulses = np.atleast_2d(np.asarray(impulses, dtype=complex))
    span = blocks.shape[1]
    out_len = span + impulses.shape[1] - 1
    nfft = 1 << (out_len - 1).bit_length()
    spec = np.fft.fft(blocks, n=nfft, axis=1) * np.fft.fft(impulses, n=nfft, axis=1)
    received = np.fft.ifft(spec, axis=1)[:, :span]
    if noise_var > 0:
        received = received + complex_normal(rng, received.shape, noise_var)
    elif noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    return received


def receive_demap_blocks(received: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Remove prefix, FFT and extract the allocated subcarriers, row-wise."""
    received = np.atleast_2d(received)
    if received.shape[1] != cfg.block_len:
        raise ValueError(f"expected blocks of {cfg.block_len} samples, got {received.shape[1]}")
    spectrum = np.fft.fft(received[:, cfg.cp_len:], norm="ortho", axis=1)
    return spectrum[:, cfg.alloc_start:cfg.alloc_start + cfg.m_alloc]


def modulate(x, cfg: WaveformConfig) -> TxBlock:
    """Build one transmit block from a length-m_alloc symbol vector."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or len(x) != cfg.m_alloc:
        raise ValueError(f"expected {cfg.m_alloc} data symbols, got shape {x.shape}")
    time = modulate_blocks(x[None, :], cfg)[0]
    return TxBlock(symbols=x, time_samples=time, cfg=cfg)


def apply_channel(tx: TxBlock, ch: ChannelRealization, noise_var: float,
                  rng: np.random.Generator, check_support: bool = True) -> np.ndarray:
    """Propagate one block through a channel realization plus noise.

    The check enforces the exact circularity bound (support <= cp_len + 1,
    i.e. the channel memory fits the prefix); scenario validation applies
    the stricter support <= cp_len margin at configuration time.
    """
    if check_support and ch.support > tx.cfg.cp_len + 1:
        raise ConfigError(f"channel support {ch.support} does not fit the "
                          f"prefix (cp_len {tx.cfg.cp_len})")
    return apply_channel_blocks(tx.time_samples[None, :], ch.impulse_response,
                                noise_var, rng)[0]


def receive_demap(rx, cfg: WaveformConfig) -> np.ndarray:
    """Recover the frequency-domain symbol vector from one received block."""
    rx = np.asarray(rx)
    if rx.ndim != 1 or len(rx) != cfg.block_len:
        raise ValueError(f"expected {cfg.block_len} received samples, got shape {rx.shape}")
    return receive_demap_blocks(rx[None, :], cfg)[0]
