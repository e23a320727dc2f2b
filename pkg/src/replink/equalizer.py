"""One-tap MMSE equalization, despreading and the exact residual
interference decomposition.

Per subcarrier the MMSE weight is conj(h) / (|h|^2 + noise_var); the
equalized gain per subcarrier is then real and in [0, 1).  After
despreading, dividing by the mean equalized gain puts decisions back on
the constellation scale and turns the combined operation into a circulant
transform of the transmitted symbols whose first-column entry 0 is exactly
1.  Each detected symbol is therefore the sent symbol plus a structured
circular-interference term plus Gaussian noise with a known variance, and
that decomposition is what the semi-analytic error-rate engine consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateFrameError
from .numerics import scaled_idft

__all__ = [
    "EqualizerState",
    "BatchEqualizer",
    "DEGENERATE_GAIN",
    "mmse_weights",
    "build_state",
    "build_states",
    "equalize_despread",
    "equalize_despread_blocks",
    "interference_term",
]

# Mean equalized gains at or below this are treated as "no usable signal".
DEGENERATE_GAIN = 1e-12


@dataclass(frozen=True)
class EqualizerState:
    """Frozen per-allocation equalizer quantities.

    weights: MMSE weights per allocated subcarrier.
    gains: real equalized gains (weight * channel, imaginary dust dropped).
    mean_gain: average of the gains; the decision-scale normalizer.
    circulant_col: first column of the residual-interference circulant
        (entry 0 equals 1 by construction).
    noise_var_out: variance of the noise seen on each detected symbol.
    """

    weights: np.ndarray
    gains: np.ndarray
    mean_gain: float
    circulant_col: np.ndarray
    noise_var_out: float


class BatchEqualizer:
    """Vectorized equalizer quantities for a batch of channels.

    Arrays are stacked row-per-channel; ``degenerate`` flags rows whose mean
    gain collapsed (those rows carry placeholder values and must be handled
    by the caller, e.g. counted at the chance error rate).
    """

    __slots__ = ("weights", "gains", "mean_gain", "circulant_col",
                 "noise_var_out", "degenerate")

    def __init__(self, weights, gains, mean_gain, circulant_col, noise_var_out, degenerate):
        self.weights = weights
        self.gains = gains
        self.mean_gain = mean_gain
        self.circulant_col = circulant_col
        self.noise_var_out = noise_var_out
        self.degenerate = degenerate


def mmse_weights(h_alloc, noise_var: float) -> np.ndarray:
    """Per-subcarrier MMSE weights conj(h) / (|h|^2 + noise_var).

    With zero noise this is the zero-forcing inverse wherever the channel
    is nonzero; subcarriers with h == 0 get weight 0.
    """
    if noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    h = np.asarray(h_alloc, dtype=complex)
    denom = np.abs(h)**2 + noise_var
    out = np.zeros_like(h)
    np.divide(np.conj(h), denom, out=out, where=denom > 0)
    return out


def build_states(h_alloc: np.ndarray, noise_var: float) -> BatchEqualizer:
    """Equalizer quantities for rows of allocation responses (b, m_alloc)."""
    h = np.atleast_2d(np.asarray(h_alloc, dtype=complex))
    w = mmse_weights(h, noise_var)
    gains = (w * h).real
    mean_gain = gains.mean(axis=1)
    degenerate = mean_gain <= DEGENERATE_GAIN
    safe_gain = np.where(degenerate, 1.0, mean_gain)
    col = np.fft.ifft(gains / safe_gain[:, None], axis=1)
    noise_out = noise_var / safe_gain**2 * np.mean(np.abs(w)**2, axis=1)
    return BatchEqualizer(w, gains, mean_gain, col, noise_out, degenerate)


def build_state(h_alloc, noise_var: float) -> EqualizerState:
    """Equalizer state for one allocation response.

    Raises DegenerateFrameError when the mean equalized gain vanishes
    (possible only when every subcarrier is in a total fade).
    """
    h = np.asarray(h_alloc, dtype=complex)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("allocation response must be a nonempty 1-D vector")
    w = mmse_weights(h, noise_var)
    gains = (w * h).real
    mean_gain = float(gains.mean())
    if mean_gain <= DEGENERATE_GAIN:
        raise DegenerateFrameError(f"mean equalized gain {mean_gain:.3e} is degenerate")
    col = scaled_idft(gains / mean_gain)
    noise_out = float(noise_var / mean_gain**2 * np.mean(np.abs(w)**2))
    return EqualizerState(w, gains, mean_gain, col, noise_out)


def equalize_despread_blocks(received: np.ndarray, weights: np.ndarray,
                             mean_gain: np.ndarray) -> np.ndarray:
    """Row-wise equalize + despread: idft(weights * received) / mean_gain."""
    received = np.atleast_2d(received)
    despread = np.fft.ifft(weights * received, norm="ortho", axis=1)
    return despread / np.asarray(mean_gain).reshape(-1, 1)


def equalize_despread(received, state: EqualizerState) -> np.ndarray:
    """Detected symbol vector for one received frequency-domain block."""
    received = np.asarray(received, dtype=complex)
    if received.shape != state.weights.shape:
        raise ValueError(f"expected {state.weights.shape[0]} subcarrier samples, "
                         f"got shape {received.shape}")
    return equalize_despread_blocks(received[None, :], state.weights,
                                    np.array([state.mean_gain]))[0]


def interference_term(circulant_col, symbols, i: int) -> complex:
    """Circular self-interference hitting symbol slot ``i``:
    sum over m >= 1 of circulant_col[m] * symbols[(i - m) mod M]."""
    col = np.asarray(circulant_col)
    sym = np.asarray(symbols)
    if col.shape != sym.shape or col.ndim != 1:
        raise ValueError("circulant column and symbols must be 1-D of equal length")
    m = len(col)
    if not 0 <= i < m:
        raise ValueError(f"symbol index {i} out of range [0, {m})")
    idx = (i - np.arange(1, m)) % m
    return complex(np.dot(col[1:], sym[idx]))
