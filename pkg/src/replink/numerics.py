"""Deterministic RNG streams, unitary spectral transforms and scalar
special functions used throughout the package.

Transform conventions
---------------------
Two fixed conventions are exposed and used consistently:

* ``unitary_dft`` is the energy-preserving (orthonormal) DFT/IDFT pair.
  The waveform chain and the despreading step use it exclusively.
* ``scaled_idft`` carries the full ``1/M`` factor,
  ``c[n] = (1/M) * sum_k v[k] * exp(+2j*pi*k*n/M)``.  It is the transform
  that turns the normalized equalized gains into the first column of the
  residual-interference circulant, which is what makes ``c[0] == 1`` hold
  by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "SeededRng",
    "unitary_dft",
    "scaled_idft",
    "q_function",
    "draw_complex_gaussian",
    "complex_normal",
]


@dataclass(frozen=True)
class SeededRng:
    """Addressable random stream: (seed, stream) selects a Philox key and
    ``generator(block)`` opens disjoint counter blocks inside that stream.

    The same (seed, stream, block) always reproduces the same sample
    sequence, independent of which worker or in which order it is drawn.
    Distinct streams/blocks never overlap (blocks are spaced 2**128
    samples apart in the Philox counter space).
    """

    seed: int
    stream: int = 0

    def generator(self, block: int = 0) -> np.random.Generator:
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF,
                        self.stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        counter = np.array([0, 0, block & 0xFFFFFFFFFFFFFFFF, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def substream(self, stream: int) -> "SeededRng":
        return SeededRng(self.seed, stream)


def _as_vector(v, name: str = "input") -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D vector, got shape {arr.shape}")
    return arr


def unitary_dft(v, inverse: bool = False) -> np.ndarray:
    """Orthonormal DFT (or inverse DFT) of a 1-D vector.

    Energy preserving: ``norm(out) == norm(v)`` up to rounding.  Any
    transform size is accepted; non-power-of-two sizes just take the
    slower mixed-radix path.
    """
    arr = _as_vector(v)
    if inverse:
        return np.fft.ifft(arr, norm="ortho")
    return np.fft.fft(arr, norm="ortho")


def scaled_idft(v) -> np.ndarray:
    """Inverse DFT with the full 1/M normalization.

    ``out[n] = (1/M) * sum_k v[k] * exp(+2j*pi*k*n/M)``.  Equals the
    orthonormal inverse transform divided by sqrt(M).
    """
    arr = _as_vector(v)
    return np.fft.ifft(arr)


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Accepts scalars or arrays.  Evaluated through the complementary error
    function, so it stays accurate far into the tail (underflows cleanly
    to 0 beyond x ~ 38).
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(x / np.sqrt(2.0))
    return out if out.ndim else float(out)


def complex_normal(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with the given total
    variance per sample (variance/2 on each of the real and imaginary parts)."""
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    if variance == 0:
        return np.zeros(shape, dtype=complex)
    if np.isscalar(shape):
        shape = (shape,)
    parts = rng.standard_normal(tuple(shape) + (2,))
    scale = np.sqrt(variance / 2.0)
    return scale * (parts[..., 0] + 1j * parts[..., 1])


def draw_complex_gaussian(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    """n i.i.d. CN(0, variance) samples."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    return complex_normal(rng, (n,), variance)
