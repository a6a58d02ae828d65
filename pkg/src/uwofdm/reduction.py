"""PAPR metric and candidate-selection schemes (SLM, PTS, and combinations).

Rotations are always applied in the data domain, before the generator
matrix: arbitrary per-subcarrier phases would leave the null space that
creates the time-domain guard zeros, but any unit-modulus rotation of the
data vector keeps every candidate a valid guard-preserving block. PTS phase
factors on contiguous data sub-blocks are the same thing expressed through
linearity: the partial time-domain sequences are superposed with the phase
weights.

The ``*_batch`` searchers process one row per symbol and are shared by the
per-symbol operations and the Monte Carlo driver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import DegenerateInputError, DimensionError, SearchSpaceError
from .precoder import GeneratorMatrix
from .txchain import DataBlock, TimeDomainSymbol, oversample_batch, uw_frequency_vector

_MAX_SEARCH = 10**6
_CANDIDATE_GROUP = 64  # limits peak memory of the exhaustive PTS sweep


@dataclass(frozen=True)
class TransmitCandidate:
    """Selected waveform plus the information needed to undo the selection."""

    waveform: TimeDomainSymbol
    papr_db: float
    side_info: object
    rotation: np.ndarray  # per-data-symbol unit phasor applied at the transmitter


def _window_len(total: int, uw_len: int, oversampling: int, window: str) -> int:
    if window == "data_only":
        return total - uw_len * oversampling
    return total


def papr_db_batch(
    waveforms: np.ndarray, uw_len: int = 0, oversampling: int = 1, window: str = "full"
) -> np.ndarray:
    """Peak-to-average power in dB per row of ``waveforms``."""
    w = np.atleast_2d(waveforms)
    n = _window_len(w.shape[-1], uw_len, oversampling, window)
    power = np.abs(w[:, :n]) ** 2
    mean = power.mean(axis=-1)
    if np.any(mean == 0):
        raise DegenerateInputError("all-zero waveform has no PAPR")
    return 10.0 * np.log10(power.max(axis=-1) / mean)


def papr_db(x: TimeDomainSymbol, window: str = "full") -> float:
    """PAPR of one block over the configured window (guard included by default)."""
    return float(
        papr_db_batch(x.samples[None, :], x.uw_len, x.oversampling, window)[0]
    )


def slm_rotations(
    rng: np.random.Generator, u: int, phase_set: tuple, n_d: int
) -> np.ndarray:
    """(u, n_d) candidate rotations; row 0 is the identity candidate."""
    phases = np.asarray(phase_set, dtype=complex)
    rot = np.ones((u, n_d), dtype=complex)
    if u > 1:
        idx = rng.integers(0, phases.size, size=(u - 1, n_d))
        rot[1:] = phases[idx]
    return rot


def pts_masks(n_d: int, v: int) -> np.ndarray:
    """(v, n_d) 0/1 masks for contiguous sub-blocks; the last takes any remainder."""
    if v > n_d:
        raise DimensionError(f"cannot split {n_d} data symbols into {v} sub-blocks")
    bounds = [round(i * n_d / v) for i in range(v + 1)]
    masks = np.zeros((v, n_d))
    for i in range(v):
        masks[i, bounds[i] : bounds[i + 1]] = 1.0
    return masks


def pts_phase_table(phase_set: tuple, v: int) -> np.ndarray:
    """(w^v, v) exhaustive phase combinations in a fixed enumeration order."""
    w = len(phase_set)
    if w**v > _MAX_SEARCH:
        raise SearchSpaceError(f"{w}^{v} phase combinations exceed {_MAX_SEARCH}")
    return np.array(list(itertools.product(phase_set, repeat=v)), dtype=complex)


def pts_partition(d: DataBlock, v: int) -> list[np.ndarray]:
    """Split the data vector into v sparse vectors that sum back to it."""
    masks = pts_masks(d.symbols.size, v)
    return [d.symbols * m for m in masks]


def _uw_wave(cfg: SystemConfig) -> np.ndarray | None:
    if cfg.n_uw == 0 or not np.any(cfg.uw_vector()):
        return None
    return oversample_batch(uw_frequency_vector(cfg)[None, :], cfg.oversampling)[0]


def slm_search_batch(
    d_batch: np.ndarray,
    rotations: np.ndarray,
    bg: np.ndarray,
    cfg: SystemConfig,
    uw_wave: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pick the lowest-PAPR rotation candidate per symbol.

    d_batch is (B, n_data), rotations (B, u, n_data). Returns per-symbol
    (papr_db, candidate index, applied rotation, winning waveform).
    """
    n_sym, u, _ = rotations.shape
    cand = d_batch[:, None, :] * rotations
    x_tilde = cand @ bg.T
    waves = oversample_batch(
        x_tilde.reshape(n_sym * u, cfg.n_total), cfg.oversampling
    ).reshape(n_sym, u, -1)
    if uw_wave is not None:
        waves = waves + uw_wave
    paprs = papr_db_batch(
        waves.reshape(n_sym * u, -1), cfg.n_uw, cfg.oversampling, cfg.papr_window
    ).reshape(n_sym, u)
    best = np.argmin(paprs, axis=1)
    rows = np.arange(n_sym)
    return paprs[rows, best], best, rotations[rows, best], waves[rows, best]


def pts_search_batch(
    d_batch: np.ndarray,
    masks: np.ndarray,
    phase_table: np.ndarray,
    bg: np.ndarray,
    cfg: SystemConfig,
    uw_wave: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Exhaustive phase search over partial waveforms, one row per symbol.

    Returns per-symbol (papr_db, phase-combination index, equivalent
    data-domain rotation, winning waveform). Candidates are scanned in
    fixed groups so peak memory stays bounded.
    """
    n_sym = d_batch.shape[0]
    v = masks.shape[0]
    partial_d = d_batch[:, None, :] * masks[None, :, :]
    x_tilde = partial_d @ bg.T
    partials = oversample_batch(
        x_tilde.reshape(n_sym * v, cfg.n_total), cfg.oversampling
    ).reshape(n_sym, v, -1)

    n_cand = phase_table.shape[0]
    best_papr = np.full(n_sym, np.inf)
    best_idx = np.zeros(n_sym, dtype=int)
    win_len = _window_len(
        partials.shape[-1], cfg.n_uw, cfg.oversampling, cfg.papr_window
    )
    for start in range(0, n_cand, _CANDIDATE_GROUP):
        block = phase_table[start : start + _CANDIDATE_GROUP]
        waves = np.einsum("cv,svn->scn", block, partials)
        if uw_wave is not None:
            waves = waves + uw_wave
        power = np.abs(waves[:, :, :win_len]) ** 2
        paprs = 10.0 * np.log10(power.max(axis=-1) / power.mean(axis=-1))
        group_best = np.argmin(paprs, axis=1)
        rows = np.arange(n_sym)
        group_papr = paprs[rows, group_best]
        improved = group_papr < best_papr
        best_papr[improved] = group_papr[improved]
        best_idx[improved] = group_best[improved] + start

    best_phases = phase_table[best_idx]
    rotation = best_phases @ masks
    waves = np.einsum("sv,svn->sn", best_phases, partials)
    if uw_wave is not None:
        waves = waves + uw_wave
    return best_papr, best_idx, rotation, waves


def slm_select(
    d: DataBlock,
    g: GeneratorMatrix,
    u: int,
    phase_set: tuple,
    rng: np.random.Generator,
    cfg: SystemConfig,
) -> TransmitCandidate:
    """Transmit the lowest-PAPR of u data-domain rotation candidates.

    Candidate 0 is the unrotated block, so selection can never do worse
    than no selection.
    """
    if u < 1:
        raise DimensionError("need at least one candidate")
    bg = _bg(g, cfg)
    rot = slm_rotations(rng, u, phase_set, cfg.n_data)[None, :, :]
    papr, idx, rotation, wave = slm_search_batch(
        d.symbols[None, :], rot, bg, cfg, _uw_wave(cfg)
    )
    tds = TimeDomainSymbol(wave[0], uw_len=cfg.n_uw, oversampling=cfg.oversampling)
    return TransmitCandidate(
        waveform=tds, papr_db=float(papr[0]), side_info=int(idx[0]), rotation=rotation[0]
    )


def pts_select(
    d: DataBlock,
    g: GeneratorMatrix,
    v: int,
    phase_set: tuple,
    cfg: SystemConfig,
) -> TransmitCandidate:
    """Exhaustive sub-block phase search; side info is the phase vector."""
    bg = _bg(g, cfg)
    masks = pts_masks(cfg.n_data, v)
    table = pts_phase_table(phase_set, v)
    papr, idx, rotation, wave = pts_search_batch(
        d.symbols[None, :], masks, table, bg, cfg, _uw_wave(cfg)
    )
    tds = TimeDomainSymbol(wave[0], uw_len=cfg.n_uw, oversampling=cfg.oversampling)
    return TransmitCandidate(
        waveform=tds,
        papr_db=float(papr[0]),
        side_info=tuple(table[int(idx[0])]),
        rotation=rotation[0],
    )


def scheme_generator_kind(scheme: str) -> str:
    """Which generator a scheme transmits with: 'prp' or 'baseline'."""
    return "prp" if scheme.startswith("prp") else "baseline"


def reduce(
    d: DataBlock,
    scheme: str,
    generators: dict[str, GeneratorMatrix],
    cfg: SystemConfig,
    rng: np.random.Generator,
) -> TransmitCandidate:
    """Dispatch one data block through the selected scheme."""
    g = generators[scheme_generator_kind(scheme)]
    if scheme in ("none", "prp"):
        bg = _bg(g, cfg)
        x_tilde = (bg @ d.symbols)[None, :]
        wave = oversample_batch(x_tilde, cfg.oversampling)
        uw_wave = _uw_wave(cfg)
        if uw_wave is not None:
            wave = wave + uw_wave
        papr = papr_db_batch(wave, cfg.n_uw, cfg.oversampling, cfg.papr_window)
        tds = TimeDomainSymbol(wave[0], uw_len=cfg.n_uw, oversampling=cfg.oversampling)
        return TransmitCandidate(
            waveform=tds,
            papr_db=float(papr[0]),
            side_info=None,
            rotation=np.ones(cfg.n_data, dtype=complex),
        )
    if scheme in ("slm", "prp-slm"):
        return slm_select(d, g, cfg.slm_candidates, cfg.phase_set, rng, cfg)
    if scheme in ("pts", "prp-pts"):
        return pts_select(d, g, cfg.pts_subblocks, cfg.phase_set, cfg)
    raise DimensionError(f"unknown scheme {scheme!r}")


def _bg(g: GeneratorMatrix, cfg: SystemConfig) -> np.ndarray:
    """n_total x n_data combined map: generator columns placed on their subcarriers."""
    from .config import modulated_indices

    bg = np.zeros((cfg.n_total, cfg.n_data), dtype=complex)
    bg[modulated_indices(cfg), :] = g.g
    return bg
