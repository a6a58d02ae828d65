"""Transmit chain: bit mapping, precoding, IDFT, guard insertion, oversampling.

The per-symbol operations take and return small dataclasses; the ``*_batch``
helpers act on stacked arrays (one row per symbol) and are what the Monte
Carlo driver calls. Both paths share the same arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import DimensionError, ZeroTailError
from .precoder import GeneratorMatrix

# Per-axis Gray mapping, unit average energy. QPSK: one bit per axis.
# 16QAM: two bits per axis, levels 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3,
# scaled by 1/sqrt(10).
_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)
_QAM16_LEVEL_OF_BITS = np.array([0, 1, 3, 2])  # index by 2*b0 + b1
_QAM16_BITS_OF_LEVEL = np.array([[0, 0], [0, 1], [1, 1], [1, 0]])


@dataclass(frozen=True)
class DataBlock:
    """One block of payload bits with its mapped symbol vector."""

    bits: np.ndarray
    symbols: np.ndarray


@dataclass(frozen=True)
class TimeDomainSymbol:
    """One time-domain block; ``oversampling`` is 1 for critically sampled."""

    samples: np.ndarray
    uw_len: int
    oversampling: int = 1

    @property
    def oversampled(self) -> bool:
        return self.oversampling > 1


def map_bits_batch(bits: np.ndarray, constellation: str) -> np.ndarray:
    """Gray-map rows of bits to symbol rows; bits shape (..., symbols*bps)."""
    bits = np.asarray(bits, dtype=int)
    if constellation == "qpsk":
        pairs = bits.reshape(*bits.shape[:-1], -1, 2)
        return ((1 - 2 * pairs[..., 0]) + 1j * (1 - 2 * pairs[..., 1])) / np.sqrt(2.0)
    if constellation == "16qam":
        quads = bits.reshape(*bits.shape[:-1], -1, 4)
        re = _QAM16_LEVELS[_QAM16_LEVEL_OF_BITS[2 * quads[..., 0] + quads[..., 1]]]
        im = _QAM16_LEVELS[_QAM16_LEVEL_OF_BITS[2 * quads[..., 2] + quads[..., 3]]]
        return re + 1j * im
    raise DimensionError(f"unknown constellation {constellation!r}")


def map_bits(bits: np.ndarray, constellation: str, n_d: int) -> DataBlock:
    """Gray-map a bit vector to ``n_d`` unit-average-energy symbols."""
    bits = np.asarray(bits, dtype=int).ravel()
    bps = {"qpsk": 2, "16qam": 4}.get(constellation)
    if bps is None:
        raise DimensionError(f"unknown constellation {constellation!r}")
    if bits.size != bps * n_d:
        raise DimensionError(f"{constellation} needs {bps * n_d} bits, got {bits.size}")
    return DataBlock(bits=bits, symbols=map_bits_batch(bits, constellation))


def precode_and_map(d: DataBlock, g: GeneratorMatrix, b: np.ndarray) -> np.ndarray:
    """Frequency-domain block ``b @ g @ d``; zero subcarriers stay exactly zero."""
    return b @ (g.g @ d.symbols)


def to_time_domain(x_tilde: np.ndarray, cfg: SystemConfig) -> TimeDomainSymbol:
    """Inverse unitary DFT of a length-n_total frequency block."""
    x_tilde = np.asarray(x_tilde, dtype=complex)
    if x_tilde.shape[-1] != cfg.n_total:
        raise DimensionError(f"expected length {cfg.n_total}, got {x_tilde.shape[-1]}")
    samples = np.fft.ifft(x_tilde) * np.sqrt(cfg.n_total)
    return TimeDomainSymbol(samples=samples, uw_len=cfg.n_uw, oversampling=1)


def insert_uw(x: TimeDomainSymbol, uw: np.ndarray) -> TimeDomainSymbol:
    """Add the known guard sequence onto the zero tail of a critical block."""
    uw = np.asarray(uw, dtype=complex)
    if x.oversampled:
        raise DimensionError("guard insertion operates on critically sampled blocks")
    if uw.size != x.uw_len:
        raise DimensionError(f"guard length {uw.size} != {x.uw_len}")
    if x.uw_len == 0:
        return x
    tail = x.samples[-x.uw_len :]
    scale = max(np.linalg.norm(x.samples), 1.0)
    if np.max(np.abs(tail)) > 1e-9 * scale:
        raise ZeroTailError("time-domain tail is not zero; generator is broken")
    samples = x.samples.copy()
    samples[-x.uw_len :] += uw
    return TimeDomainSymbol(samples=samples, uw_len=x.uw_len, oversampling=1)


def oversample_batch(x_tilde: np.ndarray, l: int) -> np.ndarray:
    """Frequency-domain zero-padding interpolation of FFT-ordered blocks.

    Zeros are inserted at the spectral midpoint and the result is scaled so
    that mean power per sample is preserved. Rows are symbols.
    """
    x_tilde = np.atleast_2d(np.asarray(x_tilde, dtype=complex))
    n = x_tilde.shape[-1]
    if l == 1:
        return np.fft.ifft(x_tilde) * np.sqrt(n)
    half = (n + 1) // 2
    padded = np.zeros((x_tilde.shape[0], l * n), dtype=complex)
    padded[:, :half] = x_tilde[:, :half]
    padded[:, (l - 1) * n + half :] = x_tilde[:, half:]
    # l * sqrt(n) = sqrt(l) * unitary-IDFT scale, so mean power is preserved
    return np.fft.ifft(padded) * (l * np.sqrt(n))


def oversample(x_tilde: np.ndarray, l: int, cfg: SystemConfig) -> TimeDomainSymbol:
    """Length l*n_total waveform of one frequency block (l = 1 is the IDFT)."""
    if l < 1:
        raise DimensionError(f"oversampling factor must be >= 1, got {l}")
    x_tilde = np.asarray(x_tilde, dtype=complex)
    if x_tilde.shape[-1] != cfg.n_total:
        raise DimensionError(f"expected length {cfg.n_total}, got {x_tilde.shape[-1]}")
    samples = oversample_batch(x_tilde[None, :], l)[0]
    return TimeDomainSymbol(samples=samples, uw_len=cfg.n_uw, oversampling=l)


def uw_frequency_vector(cfg: SystemConfig) -> np.ndarray:
    """Unitary DFT of the guard-only block [0; uw], length n_total."""
    td = np.zeros(cfg.n_total, dtype=complex)
    if cfg.n_uw:
        td[-cfg.n_uw :] = cfg.uw_vector()
    return np.fft.fft(td) / np.sqrt(cfg.n_total)
