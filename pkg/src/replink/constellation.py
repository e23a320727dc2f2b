"""Symbol alphabets with Gray bit labels and rectangular decision regions.

Square constellations are described per axis: a sorted list of amplitude
levels plus a Gray bit label per level.  A point's full label is its
in-phase bits followed by its quadrature bits, and hard detection
quantizes each axis independently at the midpoints between levels.  The
all-zero label sits on the most positive amplitudes, so for QPSK a bit b
maps to the amplitude (1 - 2b) / sqrt(2) on its axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError

__all__ = [
    "ConstellationSpec",
    "make_qpsk",
    "make_qam16",
    "make_constellation",
]


def _gray_codes(n_levels: int) -> np.ndarray:
    """Per-level Gray bit labels, ascending amplitude order, zeros on top."""
    bits_per_axis = int(np.log2(n_levels))
    if 2**bits_per_axis != n_levels:
        raise ValueError(f"level count must be a power of two, got {n_levels}")
    idx = n_levels - 1 - np.arange(n_levels)
    gray = idx ^ (idx >> 1)
    return ((gray[:, None] >> np.arange(bits_per_axis - 1, -1, -1)) & 1).astype(np.uint8)


@dataclass(frozen=True)
class ConstellationSpec:
    """Symbol alphabet (unit average energy), per-point bit labels and the
    per-axis amplitude levels defining the rectangular decision regions.

    axis_levels/axis_bits are None for alphabets without a rectangular
    per-axis structure; those are not supported by the closed-form error
    kernels or the axis-wise detector.
    """

    name: str
    points: np.ndarray
    labels: np.ndarray
    axis_levels: np.ndarray | None = None
    axis_bits: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        labels = np.asarray(self.labels, dtype=np.uint8)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)
        if labels.shape[0] != pts.shape[0]:
            raise ValueError("need one label per constellation point")
        energy = np.mean(np.abs(pts)**2)
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"constellation must have unit average energy, got {energy!r}")
        packed = {tuple(row) for row in labels}
        if len(packed) != len(labels):
            raise ValueError("bit labels must be distinct")

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    @property
    def is_rectangular(self) -> bool:
        return self.axis_levels is not None

    @property
    def decision_edges(self) -> np.ndarray:
        """Per-axis decision interval edges, length n_levels + 1."""
        lv = self.axis_levels
        mids = (lv[1:] + lv[:-1]) / 2.0
        return np.concatenate([[-np.inf], mids, [np.inf]])

    def level_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """(in-phase, quadrature) axis level index of every point."""
        i_idx = np.argmin(np.abs(self.points.real[:, None] - self.axis_levels[None, :]), axis=1)
        q_idx = np.argmin(np.abs(self.points.imag[:, None] - self.axis_levels[None, :]), axis=1)
        return i_idx, q_idx

    def bits_to_symbols(self, bits: np.ndarray) -> np.ndarray:
        """Map bit rows (..., k*bits_per_symbol) to symbol rows (..., k)."""
        if not self.is_rectangular:
            raise ConfigError(f"{self.name}: axis-wise mapping needs a rectangular alphabet")
        bits = np.asarray(bits, dtype=np.uint8)
        half = self.axis_bits.shape[1]
        groups = bits.reshape(bits.shape[:-1] + (-1, 2 * half))
        weights = 1 << np.arange(half - 1, -1, -1)
        level_of = np.zeros(1 << half, dtype=np.intp)
        level_of[self.axis_bits @ weights] = np.arange(len(self.axis_levels))
        i_lv = level_of[groups[..., :half] @ weights]
        q_lv = level_of[groups[..., half:] @ weights]
        return self.axis_levels[i_lv] + 1j * self.axis_levels[q_lv]

    def detect_bits(self, symbols: np.ndarray) -> np.ndarray:
        """Hard-detect symbols to bit rows by per-axis quantization."""
        if not self.is_rectangular:
            raise ConfigError(f"{self.name}: axis-wise detection needs a rectangular alphabet")
        symbols = np.asarray(symbols)
        inner = self.decision_edges[1:-1]
        i_lv = np.digitize(symbols.real, inner)
        q_lv = np.digitize(symbols.imag, inner)
        out = np.concatenate([self.axis_bits[i_lv], self.axis_bits[q_lv]], axis=-1)
        shape = symbols.shape[:-1] + (symbols.shape[-1] * self.bits_per_symbol,)
        return out.reshape(shape)


def _square_constellation(name: str, levels: np.ndarray) -> ConstellationSpec:
    levels = np.asarray(levels, dtype=float)
    axis_bits = _gray_codes(len(levels))
    i_idx, q_idx = np.meshgrid(np.arange(len(levels)), np.arange(len(levels)), indexing="ij")
    i_idx, q_idx = i_idx.ravel(), q_idx.ravel()
    points = levels[i_idx] + 1j * levels[q_idx]
    labels = np.concatenate([axis_bits[i_idx], axis_bits[q_idx]], axis=1)
    return ConstellationSpec(name=name, points=points, labels=labels,
                             axis_levels=levels, axis_bits=axis_bits)


def make_qpsk() -> ConstellationSpec:
    """Gray QPSK, components +-1/sqrt(2)."""
    a = 1.0 / np.sqrt(2.0)
    return _square_constellation("qpsk", np.array([-a, a]))


def make_qam16() -> ConstellationSpec:
    """Gray 16-QAM, per-axis levels {-3,-1,1,3}/sqrt(10)."""
    return _square_constellation("qam16", np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0))


_FACTORIES = {"qpsk": make_qpsk, "qam16": make_qam16}


def make_constellation(name: str) -> ConstellationSpec:
    try:
        return _FACTORIES[name.lower()]()
    except KeyError:
        raise ConfigError(f"unknown constellation {name!r}; "
                          f"available: {sorted(_FACTORIES)}") from None
