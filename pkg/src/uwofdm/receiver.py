"""Receiver: frequency-domain processing, linear detection, demapping.

Detection is the best linear unbiased estimate under white frequency-domain
noise: with the channel diagonal on the modulated subcarriers and the
generator's orthonormal columns, the normal matrix reduces to the identity
for a flat channel and stays well conditioned except in deep fades, where a
tiny ridge keeps the sweep alive and the block is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, modulated_indices
from .errors import DimensionError
from .impairments import ChannelRealization
from .precoder import GeneratorMatrix
from .txchain import _QAM16_BITS_OF_LEVEL, _QAM16_LEVELS

_COND_LIMIT = 1e12
_RIDGE = 1e-12


@dataclass(frozen=True)
class DetectionContext:
    """Per-block knowns: channel on the modulated subcarriers, generator, noise level."""

    h_dr: np.ndarray
    g: GeneratorMatrix
    noise_var: float


def channel_on_modulated(ch: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    """Diagonal of the channel restricted to the modulated subcarriers."""
    return ch.freq_response[modulated_indices(cfg)]


def fd_receive(
    y_td: np.ndarray, uw: np.ndarray, ch: ChannelRealization, cfg: SystemConfig
) -> np.ndarray:
    """DFT, subcarrier down-selection, and removal of the known guard part.

    The guard sequence sits inside the DFT window, so its faded contribution
    is deterministic and is subtracted exactly (a no-op for the zero guard).
    """
    y_td = np.asarray(y_td, dtype=complex)
    if y_td.size != cfg.n_total:
        raise DimensionError(f"expected {cfg.n_total} samples, got {y_td.size}")
    kept = modulated_indices(cfg)
    y_fd = (np.fft.fft(y_td) / np.sqrt(cfg.n_total))[kept]
    uw = np.asarray(uw, dtype=complex)
    if uw.size and np.any(uw):
        guard_td = np.zeros(cfg.n_total, dtype=complex)
        guard_td[-uw.size :] = uw
        guard_fd = np.fft.fft(guard_td) / np.sqrt(cfg.n_total)
        y_fd = y_fd - ch.freq_response[kept] * guard_fd[kept]
    return y_fd


def blue_detect(y_tilde: np.ndarray, ctx: DetectionContext) -> np.ndarray:
    """Least-squares data estimate through the faded generator.

    Deep fades that push the normal matrix past a 1e12 condition number are
    regularized with a 1e-12 ridge instead of aborting the surrounding sweep.
    """
    d_hat, _ = blue_detect_flagged(y_tilde, ctx)
    return d_hat


def blue_detect_flagged(
    y_tilde: np.ndarray, ctx: DetectionContext
) -> tuple[np.ndarray, bool]:
    phi = ctx.h_dr[:, None] * ctx.g.g
    gram = phi.conj().T @ phi
    rhs = phi.conj().T @ y_tilde
    eig = np.linalg.eigvalsh(gram)
    flagged = bool(eig[0] <= 0 or eig[-1] / eig[0] > _COND_LIMIT)
    if flagged:
        gram = gram + _RIDGE * np.eye(gram.shape[0])
    return np.linalg.solve(gram, rhs), flagged


def invert_rotation(d_hat: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """Undo the transmitter's data-domain phase rotations (genie side info)."""
    return d_hat * np.conj(rotation)


def detection_eigenvalues(g: GeneratorMatrix, h_dr: np.ndarray) -> np.ndarray:
    """Eigenvalues of the effective detection matrix for one channel draw.

    Their spread governs the diversity behaviour of the linear detector at
    moderate SNR; a flatter spectrum detects better.
    """
    phi = h_dr[:, None] * g.g
    return np.linalg.eigvalsh(phi.conj().T @ phi)


def eigenvalue_spread(g: GeneratorMatrix, h_dr: np.ndarray) -> float:
    """Max/min eigenvalue ratio of the effective detection matrix."""
    eig = detection_eigenvalues(g, h_dr)
    return float(eig[-1] / eig[0])


def demap_symbols(d_hat: np.ndarray, constellation: str) -> np.ndarray:
    """Minimum-distance hard decisions, returned as a flat bit vector."""
    d_hat = np.asarray(d_hat).ravel()
    if constellation == "qpsk":
        bits = np.empty((d_hat.size, 2), dtype=int)
        bits[:, 0] = d_hat.real < 0
        bits[:, 1] = d_hat.imag < 0
        return bits.ravel()
    if constellation == "16qam":
        bits = np.empty((d_hat.size, 4), dtype=int)
        for axis, col in ((d_hat.real, 0), (d_hat.imag, 2)):
            level = np.abs(axis[:, None] - _QAM16_LEVELS[None, :]).argmin(axis=1)
            bits[:, col : col + 2] = _QAM16_BITS_OF_LEVEL[level]
        return bits.ravel()
    raise DimensionError(f"unknown constellation {constellation!r}")


def demap_and_count(
    d_hat: np.ndarray, reference_bits: np.ndarray, constellation: str
) -> tuple[int, int]:
    """Hard-demap and count bit errors against the transmitted bits."""
    decided = demap_symbols(d_hat, constellation)
    reference_bits = np.asarray(reference_bits, dtype=int).ravel()
    if decided.size != reference_bits.size:
        raise DimensionError(
            f"bit count mismatch: {decided.size} vs {reference_bits.size}"
        )
    return int(np.sum(decided != reference_bits)), int(reference_bits.size)
