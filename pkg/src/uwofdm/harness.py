"""Experiment orchestration: PAPR/BER/PSD sweeps and the design report.

Every experiment is a pure function of its spec: all randomness is derived
per symbol index from the master seed (see :mod:`uwofdm.seeding`), symbols
are processed in fixed-size chunks, and chunk results are merged in index
order. Worker count therefore never changes any output byte.

Detection noise is drawn in the frequency domain on the modulated
subcarriers (the unitary-DFT image of white time-domain noise) and is
combined with the detector output of the noiseless received block. Because
the detector is linear this is the physical model computed term by term,
with one deliberate twist: the genie inversion of candidate-search phase
rotations is applied to the signal term only. Unit-modulus rotations of
circularly-symmetric noise do not change its law, so BER statistics are
untouched, and the phase-search schemes become transparent realization by
realization under shared seeds, matching their exact algebraic behaviour.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SystemConfig, config_hash, config_meta, modulated_indices, validate
from .errors import DimensionError
from .impairments import RappParams, power_delay_profile, rapp_amplify
from .linops import build_structural
from .metrics import (
    KIND_BER,
    CurveResult,
    ccdf,
    curve_filename,
    default_ccdf_thresholds,
    oobr_db,
    welch_psd,
    write_curve_csv,
)
from .precoder import (
    KIND_BASELINE_HAAR,
    KIND_BASELINE_IDENTITY,
    KIND_PRP,
    GeneratorMatrix,
    build_target_d,
    design_baseline_generator,
    design_prp_generator,
    solve_procrustes,
    solve_unconstrained,
)
from .reduction import (
    papr_db_batch,
    pts_masks,
    pts_phase_table,
    scheme_generator_kind,
    slm_rotations,
    slm_search_batch,
    pts_search_batch,
)
from .seeding import STREAM_CHANNEL, STREAM_DATA, STREAM_HAAR, STREAM_NOISE, STREAM_SLM, run_rng, symbol_rng
from .txchain import map_bits_batch, oversample_batch, uw_frequency_vector

EXPERIMENTS = ("design", "papr", "ber", "psd")


@dataclass
class ExperimentSpec:
    """Everything one experiment run depends on."""

    experiment: str
    config: SystemConfig
    schemes: tuple[str, ...] = ("none",)
    sweep: tuple[str, tuple] | None = None
    n_symbols: int = 10_000
    output_dir: str | None = None
    snr_db: tuple[float, ...] = (0, 5, 10, 15, 20, 25, 30, 35, 40)
    hpa_mode: str = "off"  # off | on | both
    target_errors: int = 200
    batch_size: int = 512
    workers: int = 1
    ccdf_thresholds: tuple[float, ...] = ()
    psd_segment_len: int | None = None
    psd_overlap: float = 0.5
    psd_window: str = "hann"
    oobr_offsets: tuple[float, ...] = (0.02, 0.06)
    eig_draws: int = 200
    make_plots: bool = True
    dump_matrices: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DimensionError(f"experiment must be one of {EXPERIMENTS}")
        if self.n_symbols < 1:
            raise DimensionError("n_symbols must be >= 1")


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

_SWEEP_ALIASES = {"nr": "n_red", "n_red": "n_red", "n_uw": "n_uw", "n_zero": "n_zero"}


def expand_sweep(spec: ExperimentSpec) -> list[SystemConfig]:
    """Configs for each sweep point (or just the base config)."""
    if spec.sweep is None:
        return [spec.config]
    name, values = spec.sweep
    key = _SWEEP_ALIASES.get(name)
    if key is None:
        raise DimensionError(f"unsupported sweep parameter {name!r}")
    return [validate(dataclasses.replace(spec.config, **{key: int(v)})) for v in values]


def block_energy(cfg: SystemConfig) -> float:
    """Average transmit energy of one critically sampled block (guard included)."""
    return cfg.n_data + float(np.sum(np.abs(cfg.uw_vector()) ** 2))


def noise_var_for_ebn0(cfg: SystemConfig, ebn0_db: float) -> float:
    """Per-sample complex noise variance for a target Eb/N0 in dB."""
    bits_per_block = cfg.n_data * cfg.bits_per_symbol()
    return block_energy(cfg) / (bits_per_block * 10.0 ** (ebn0_db / 10.0))


def hpa_params(cfg: SystemConfig) -> RappParams:
    """Fixed amplifier operating point: mean power of the data-bearing samples."""
    mean_power = cfg.n_data / (cfg.n_total - cfg.n_uw)
    return RappParams(knee=cfg.hpa.knee, backoff_db=cfg.hpa.backoff_db, mean_power=mean_power)


def in_band_edge(cfg: SystemConfig) -> float:
    """Outer edge of the modulated band, normalized to the oversampled rate."""
    idx = modulated_indices(cfg)
    centered = np.where(idx < cfg.n_total / 2, idx, idx - cfg.n_total)
    k_max = int(np.max(np.abs(centered)))
    return (k_max + 0.5) / (cfg.n_total * cfg.oversampling)


_GENERATOR_CACHE: dict[tuple[str, str], GeneratorMatrix] = {}


def get_generator(cfg: SystemConfig, kind: str) -> GeneratorMatrix:
    """Design (or fetch) the generator for a config; one design per setting."""
    key = (config_hash(cfg), kind)
    cached = _GENERATOR_CACHE.get(key)
    if cached is not None:
        return cached
    sm = build_structural(cfg)
    if kind == KIND_PRP:
        gen = design_prp_generator(sm, cfg)
    elif kind == KIND_BASELINE_IDENTITY:
        gen = design_baseline_generator(sm, cfg, kind)
    elif kind == KIND_BASELINE_HAAR:
        gen = design_baseline_generator(sm, cfg, kind, rng=run_rng(cfg.seed, STREAM_HAAR))
    else:
        raise DimensionError(f"unknown generator kind {kind!r}")
    _GENERATOR_CACHE[key] = gen
    return gen


def generators_for_schemes(cfg: SystemConfig, schemes: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Generator matrices needed by a scheme list, keyed 'prp'/'baseline'."""
    out: dict[str, np.ndarray] = {}
    for scheme in schemes:
        role = scheme_generator_kind(scheme)
        if role not in out:
            kind = KIND_PRP if role == "prp" else KIND_BASELINE_IDENTITY
            out[role] = get_generator(cfg, kind).g
    return out


def _bg_matrix(cfg: SystemConfig, g: np.ndarray) -> np.ndarray:
    bg = np.zeros((cfg.n_total, g.shape[1]), dtype=complex)
    bg[modulated_indices(cfg), :] = g
    return bg


def _uw_wave(cfg: SystemConfig) -> np.ndarray | None:
    if cfg.n_uw == 0 or not np.any(cfg.uw_vector()):
        return None
    return oversample_batch(uw_frequency_vector(cfg)[None, :], cfg.oversampling)[0]


def _draw_bits(cfg: SystemConfig, start: int, stop: int) -> np.ndarray:
    n_bits = cfg.n_data * cfg.bits_per_symbol()
    bits = np.empty((stop - start, n_bits), dtype=int)
    for row, i in enumerate(range(start, stop)):
        bits[row] = symbol_rng(cfg.seed, STREAM_DATA, i).integers(0, 2, size=n_bits)
    return bits


def _draw_slm_rotations(cfg: SystemConfig, start: int, stop: int) -> np.ndarray:
    rot = np.empty((stop - start, cfg.slm_candidates, cfg.n_data), dtype=complex)
    for row, i in enumerate(range(start, stop)):
        rng = symbol_rng(cfg.seed, STREAM_SLM, i)
        rot[row] = slm_rotations(rng, cfg.slm_candidates, cfg.phase_set, cfg.n_data)
    return rot


def _draw_channels(cfg: SystemConfig, start: int, stop: int) -> np.ndarray:
    """Per-symbol channel transfer functions on all subcarriers (B, n_total)."""
    n = stop - start
    if not cfg.channel.enabled:
        return np.ones((n, cfg.n_total), dtype=complex)
    l_c = cfg.channel.n_taps
    profile = power_delay_profile(l_c, cfg.channel.decay)
    taps = np.empty((n, l_c), dtype=complex)
    for row, i in enumerate(range(start, stop)):
        rng = symbol_rng(cfg.seed, STREAM_CHANNEL, i)
        taps[row] = np.sqrt(profile / 2.0) * (
            rng.standard_normal(l_c) + 1j * rng.standard_normal(l_c)
        )
    return np.fft.fft(taps, n=cfg.n_total, axis=-1)


def _draw_unit_noise(cfg: SystemConfig, start: int, stop: int) -> np.ndarray:
    """Unit-variance complex noise on the modulated subcarriers (B, n_mod)."""
    n = stop - start
    noise = np.empty((n, cfg.n_mod), dtype=complex)
    for row, i in enumerate(range(start, stop)):
        rng = symbol_rng(cfg.seed, STREAM_NOISE, i)
        noise[row] = (
            rng.standard_normal(cfg.n_mod) + 1j * rng.standard_normal(cfg.n_mod)
        ) / np.sqrt(2.0)
    return noise


def _scheme_waveforms(
    cfg: SystemConfig,
    scheme: str,
    gmat: np.ndarray,
    symbols: np.ndarray,
    slm_rot: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(papr_db, rotation, oversampled waveform) per symbol row."""
    bg = _bg_matrix(cfg, gmat)
    uw_wave = _uw_wave(cfg)
    if scheme in ("none", "prp"):
        x_tilde = symbols @ bg.T
        waves = oversample_batch(x_tilde, cfg.oversampling)
        if uw_wave is not None:
            waves = waves + uw_wave
        paprs = papr_db_batch(waves, cfg.n_uw, cfg.oversampling, cfg.papr_window)
        rotation = np.ones_like(symbols)
        return paprs, rotation, waves
    if scheme in ("slm", "prp-slm"):
        paprs, _, rotation, waves = slm_search_batch(symbols, slm_rot, bg, cfg, uw_wave)
        return paprs, rotation, waves
    if scheme in ("pts", "prp-pts"):
        masks = pts_masks(cfg.n_data, cfg.pts_subblocks)
        table = pts_phase_table(cfg.phase_set, cfg.pts_subblocks)
        paprs, _, rotation, waves = pts_search_batch(symbols, masks, table, bg, cfg, uw_wave)
        return paprs, rotation, waves
    raise DimensionError(f"unknown scheme {scheme!r}")


def _run_chunks(task, args_list, workers: int):
    """Yield task results in submission order, optionally via a process pool."""
    if workers <= 1:
        for args in args_list:
            yield task(args)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(task, args_list, chunksize=1)


def _chunk_ranges(n_symbols: int, batch: int) -> list[tuple[int, int]]:
    return [(s, min(s + batch, n_symbols)) for s in range(0, n_symbols, batch)]


# ---------------------------------------------------------------------------
# PAPR experiment
# ---------------------------------------------------------------------------


def _papr_chunk_task(args) -> dict[str, np.ndarray]:
    cfg, schemes, gmats, start, stop = args
    bits = _draw_bits(cfg, start, stop)
    symbols = map_bits_batch(bits, cfg.constellation)
    needs_slm = any(s in ("slm", "prp-slm") for s in schemes)
    slm_rot = _draw_slm_rotations(cfg, start, stop) if needs_slm else None
    out = {}
    for scheme in schemes:
        gmat = gmats[scheme_generator_kind(scheme)]
        paprs, _, _ = _scheme_waveforms(cfg, scheme, gmat, symbols, slm_rot)
        out[scheme] = paprs
    return out


def run_papr_experiment(spec: ExperimentSpec) -> list[CurveResult]:
    """CCDF of the oversampled PAPR for each scheme (and sweep point)."""
    thresholds = (
        np.asarray(spec.ccdf_thresholds)
        if spec.ccdf_thresholds
        else default_ccdf_thresholds()
    )
    curves: list[CurveResult] = []
    for cfg in expand_sweep(spec):
        gmats = generators_for_schemes(cfg, spec.schemes)
        args_list = [
            (cfg, spec.schemes, gmats, start, stop)
            for start, stop in _chunk_ranges(spec.n_symbols, spec.batch_size)
        ]
        per_scheme: dict[str, list[np.ndarray]] = {s: [] for s in spec.schemes}
        for result in _run_chunks(_papr_chunk_task, args_list, spec.workers):
            for scheme in spec.schemes:
                per_scheme[scheme].append(result[scheme])
        for scheme in spec.schemes:
            samples = np.concatenate(per_scheme[scheme])
            curve = ccdf(samples, thresholds)
            curve.meta = config_meta(cfg) | {
                "kind": curve.kind,
                "scheme": scheme,
                "n_symbols": str(spec.n_symbols),
                "pts_partition": "adjacent",
            }
            curves.append(curve)
    _emit(curves, spec)
    return curves


# ---------------------------------------------------------------------------
# BER experiment
# ---------------------------------------------------------------------------


def _ber_chunk_task(args) -> dict[tuple[str, str], np.ndarray]:
    cfg, schemes, gmats, variants, noise_vars, start, stop = args
    n = stop - start
    bits = _draw_bits(cfg, start, stop)
    symbols = map_bits_batch(bits, cfg.constellation)
    needs_slm = any(s in ("slm", "prp-slm") for s in schemes)
    slm_rot = _draw_slm_rotations(cfg, start, stop) if needs_slm else None
    freq = _draw_channels(cfg, start, stop)
    kept = modulated_indices(cfg)
    h_dr = freq[:, kept]
    unit_noise = _draw_unit_noise(cfg, start, stop)
    uw_td = np.zeros(cfg.n_total, dtype=complex)
    uw_fd_kept = None
    if cfg.n_uw and np.any(cfg.uw_vector()):
        uw_td[-cfg.n_uw :] = cfg.uw_vector()
        uw_fd_kept = uw_frequency_vector(cfg)[kept]
    params = hpa_params(cfg)

    out: dict[tuple[str, str], np.ndarray] = {}
    habs2 = np.abs(h_dr) ** 2
    grams: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for role in {scheme_generator_kind(s) for s in schemes}:
        g = gmats[role]
        gram = np.einsum("ij,bi,ik->bjk", g.conj(), habs2, g, optimize=True)
        eig = np.linalg.eigvalsh(gram)
        bad = (eig[:, 0] <= 0) | (eig[:, -1] / np.maximum(eig[:, 0], 1e-300) > 1e12)
        if np.any(bad):
            gram = gram + bad[:, None, None] * (1e-12 * np.eye(g.shape[1]))
        grams[role] = (gram, bad)

    for scheme in schemes:
        role = scheme_generator_kind(scheme)
        g = gmats[role]
        gram, _ = grams[role]
        rotation = np.ones_like(symbols)
        x_rot = symbols
        if scheme not in ("none", "prp"):
            _, rotation, _ = _scheme_waveforms(cfg, scheme, g, symbols, slm_rot)
            x_rot = symbols * rotation
        # noise term of the detector output, shared by every SNR point
        rhs_noise = np.einsum("ij,bi->bj", g.conj(), h_dr.conj() * unit_noise)
        d_noise = np.linalg.solve(gram, rhs_noise[..., None])[..., 0]
        for variant in variants:
            if variant == "on":
                x_td = np.fft.ifft(x_rot @ _bg_matrix(cfg, g).T, axis=-1) * np.sqrt(cfg.n_total)
                x_td = rapp_amplify(x_td + uw_td, params)
                y_fd = (np.fft.fft(x_td, axis=-1) / np.sqrt(cfg.n_total)) * freq
                y_clean = y_fd[:, kept]
                if uw_fd_kept is not None:
                    y_clean = y_clean - h_dr * uw_fd_kept
            else:
                y_clean = h_dr * (x_rot @ g.T)
            rhs_clean = np.einsum("ij,bi->bj", g.conj(), h_dr.conj() * y_clean)
            d_clean = np.linalg.solve(gram, rhs_clean[..., None])[..., 0]
            d_clean = d_clean * rotation.conj()
            errors = np.empty((len(noise_vars), n), dtype=np.int32)
            for k, nv in enumerate(noise_vars):
                d_hat = d_clean + np.sqrt(nv) * d_noise
                decided = _demap_batch(d_hat, cfg.constellation)
                errors[k] = np.sum(decided != bits, axis=-1)
            out[(scheme, variant)] = errors
    return out


def _demap_batch(d_hat: np.ndarray, constellation: str) -> np.ndarray:
    from .receiver import demap_symbols

    flat = demap_symbols(d_hat.ravel(), constellation)
    return flat.reshape(d_hat.shape[0], -1)


def run_ber_experiment(spec: ExperimentSpec) -> list[CurveResult]:
    """Monte Carlo BER over the SNR grid, stopping per point at the first
    chunk boundary where the error target is met (or at the symbol cap)."""
    variants = {"off": ("off",), "on": ("on",), "both": ("off", "on")}[spec.hpa_mode]
    curves: list[CurveResult] = []
    for cfg in expand_sweep(spec):
        gmats = generators_for_schemes(cfg, spec.schemes)
        noise_vars = [noise_var_for_ebn0(cfg, s) for s in spec.snr_db]
        ranges = _chunk_ranges(spec.n_symbols, spec.batch_size)
        args_list = [
            (cfg, spec.schemes, gmats, variants, noise_vars, start, stop)
            for start, stop in ranges
        ]
        n_snr = len(spec.snr_db)
        bits_per_block = cfg.n_data * cfg.bits_per_symbol()
        acc_err = {
            (s, v): np.zeros(n_snr, dtype=np.int64) for s in spec.schemes for v in variants
        }
        acc_bits = {k: np.zeros(n_snr, dtype=np.int64) for k in acc_err}
        active = {k: np.ones(n_snr, dtype=bool) for k in acc_err}
        for (start, stop), result in zip(
            ranges, _run_chunks(_ber_chunk_task, args_list, spec.workers)
        ):
            chunk_bits = (stop - start) * bits_per_block
            for key, errors in result.items():
                mask = active[key]
                acc_err[key][mask] += errors.sum(axis=1)[mask]
                acc_bits[key][mask] += chunk_bits
                active[key] &= acc_err[key] < spec.target_errors
            if not any(m.any() for m in active.values()):
                break
        for scheme in spec.schemes:
            for variant in variants:
                key = (scheme, variant)
                y = acc_err[key] / np.maximum(acc_bits[key], 1)
                hpa_cfg = dataclasses.replace(cfg.hpa, enabled=(variant == "on"))
                cfg_v = validate(dataclasses.replace(cfg, hpa=hpa_cfg))
                curve = CurveResult(kind=KIND_BER, x=np.asarray(spec.snr_db, float), y=y)
                curve.meta = config_meta(cfg_v) | {
                    "kind": KIND_BER,
                    "scheme": scheme,
                    "hpa_state": variant,
                    "n_symbols": str(spec.n_symbols),
                    "target_errors": str(spec.target_errors),
                    "bit_errors": ",".join(str(int(e)) for e in acc_err[key]),
                    "bit_count": ",".join(str(int(b)) for b in acc_bits[key]),
                    "ebn0_def": "block_energy_per_bit_over_N0_critical_rate",
                    "hpa_stage": "critical",
                }
                curves.append(curve)
    _emit(curves, spec)
    return curves


# ---------------------------------------------------------------------------
# PSD experiment
# ---------------------------------------------------------------------------


def _psd_chunk_task(args) -> dict[str, np.ndarray]:
    cfg, schemes, gmats, start, stop = args
    bits = _draw_bits(cfg, start, stop)
    symbols = map_bits_batch(bits, cfg.constellation)
    needs_slm = any(s in ("slm", "prp-slm") for s in schemes)
    slm_rot = _draw_slm_rotations(cfg, start, stop) if needs_slm else None
    out = {}
    for scheme in schemes:
        gmat = gmats[scheme_generator_kind(scheme)]
        _, _, waves = _scheme_waveforms(cfg, scheme, gmat, symbols, slm_rot)
        out[scheme] = waves
    return out


def run_psd_experiment(spec: ExperimentSpec) -> list[CurveResult]:
    """Welch PSD of the concatenated oversampled stream, before and after
    the amplifier, plus out-of-band levels at the configured offsets."""
    curves: list[CurveResult] = []
    for cfg in expand_sweep(spec):
        gmats = generators_for_schemes(cfg, spec.schemes)
        seg = spec.psd_segment_len or cfg.n_total * cfg.oversampling
        edge = in_band_edge(cfg)
        params = hpa_params(cfg)
        args_list = [
            (cfg, spec.schemes, gmats, start, stop)
            for start, stop in _chunk_ranges(spec.n_symbols, spec.batch_size)
        ]
        streams: dict[str, list[np.ndarray]] = {s: [] for s in spec.schemes}
        for result in _run_chunks(_psd_chunk_task, args_list, spec.workers):
            for scheme in spec.schemes:
                streams[scheme].append(result[scheme].ravel())
        for scheme in spec.schemes:
            stream = np.concatenate(streams[scheme])
            for stage, sig in (("pre", stream), ("post", rapp_amplify(stream, params))):
                curve = welch_psd(
                    sig, seg, spec.psd_overlap, spec.psd_window, in_band_edge=edge
                )
                oobr = {
                    f"oobr_db_at_{off:g}": f"{oobr_db(curve, edge, off):.6f}"
                    for off in spec.oobr_offsets
                }
                curve.meta = config_meta(cfg) | oobr | {
                    "kind": curve.kind,
                    "scheme": f"{scheme}-{stage}",
                    "stage": stage,
                    "n_symbols": str(spec.n_symbols),
                    "band_edge": f"{edge:.8f}",
                    "hpa_stage": "oversampled",
                }
                curves.append(curve)
    _emit(curves, spec)
    return curves


# ---------------------------------------------------------------------------
# Design report
# ---------------------------------------------------------------------------


@dataclass
class DesignReport:
    passed: bool
    lines: list[str] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _check(report: DesignReport, name: str, ok: bool, detail: str = "") -> None:
    report.lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
    if not ok:
        report.passed = False


def run_design_report(spec: ExperimentSpec) -> DesignReport:
    """Build all matrices/generators, run the invariant suite, dump artifacts."""
    report = DesignReport(passed=True)
    out_dir = Path(spec.output_dir) if spec.output_dir else None
    for cfg in expand_sweep(spec):
        tag = f"n_red={cfg.n_red}"
        report.lines.append(
            f"design {tag}: n_total={cfg.n_total} n_uw={cfg.n_uw} n_zero={cfg.n_zero} "
            f"n_data={cfg.n_data} n_mod={cfg.n_mod} [{config_hash(cfg)}]"
        )
        try:
            _design_one(report, cfg, spec, out_dir)
        except Exception as exc:  # report the failure, keep the sweep going
            _check(report, f"{tag}: construction", False, f"{type(exc).__name__}: {exc}")
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "design_report.txt").write_text(report.text, encoding="utf-8")
    return report


def _design_one(
    report: DesignReport, cfg: SystemConfig, spec: ExperimentSpec, out_dir: Path | None
) -> None:
    tag = f"n_red={cfg.n_red}"
    sm = build_structural(cfg)
    eye_err = np.max(np.abs(sm.f_n @ sm.f_n.conj().T - np.eye(cfg.n_total)))
    _check(report, f"{tag}: DFT unitarity", eye_err < 1e-10, f"max err {eye_err:.2e}")
    stack_ok = np.array_equal(np.vstack([sm.a, sm.q]), sm.f_n.conj().T @ sm.b)
    _check(report, f"{tag}: row split exactly reproduces the mapped IDFT", stack_ok)
    qy = np.linalg.norm(sm.q @ sm.y)
    _check(report, f"{tag}: null-space annihilation", qy <= 1e-9, f"|q y| = {qy:.2e}")
    ortho = np.max(np.abs(sm.y.conj().T @ sm.y - np.eye(sm.y.shape[1])))
    _check(report, f"{tag}: basis orthonormality", ortho < 1e-10, f"max err {ortho:.2e}")
    smin = np.linalg.svd(sm.z, compute_uv=False)[-1]
    _check(report, f"{tag}: z full column rank", smin > 1e-8, f"sigma_min {smin:.2e}")

    target = build_target_d(cfg.n_total - cfg.n_uw, cfg.n_data)
    sol = solve_procrustes(sm.z, target)
    trace_gap = abs(sol.trace_value - float(np.sum(sol.singular_values[: cfg.n_data])))
    _check(report, f"{tag}: trace equals singular-value sum", trace_gap < 1e-8, f"gap {trace_gap:.2e}")
    try:
        unc = solve_unconstrained(sm.z, target)
        res_unc = float(np.linalg.norm(sm.z @ unc - target, "fro") ** 2)
        _check(
            report,
            f"{tag}: unconstrained fit is a lower bound",
            res_unc <= sol.residual + 1e-9,
            f"{res_unc:.6f} <= {sol.residual:.6f}",
        )
    except Exception as exc:
        _check(report, f"{tag}: unconstrained fit", False, str(exc))

    rng_check = run_rng(cfg.seed, STREAM_HAAR)
    gens = {
        KIND_PRP: get_generator(cfg, KIND_PRP),
        KIND_BASELINE_IDENTITY: get_generator(cfg, KIND_BASELINE_IDENTITY),
        KIND_BASELINE_HAAR: get_generator(cfg, KIND_BASELINE_HAAR),
    }
    fhb = sm.f_n.conj().T @ sm.b
    for kind, gen in gens.items():
        ortho = np.max(np.abs(gen.g.conj().T @ gen.g - np.eye(cfg.n_data)))
        _check(report, f"{tag}: {kind} columns orthonormal", ortho < 1e-9, f"max err {ortho:.2e}")
        tr = abs(np.trace(gen.g.conj().T @ gen.g).real - cfg.n_data)
        _check(report, f"{tag}: {kind} energy normalization", tr < 1e-8, f"gap {tr:.2e}")
        worst = 0.0
        for _ in range(100):
            d = (rng_check.standard_normal(cfg.n_data) + 1j * rng_check.standard_normal(cfg.n_data)) / np.sqrt(2)
            tail = fhb @ (gen.g @ d)
            worst = max(worst, np.max(np.abs(tail[-cfg.n_uw :])) / np.linalg.norm(d))
        _check(report, f"{tag}: {kind} guard tail", worst <= 1e-9, f"worst {worst:.2e}")

    prp = gens[KIND_PRP]
    report.values[f"residual[{tag}]"] = prp.residual
    report.values[f"residual_per_symbol[{tag}]"] = prp.residual / cfg.n_data
    report.lines.append(
        f"  target misfit {prp.residual:.6f} ({prp.residual / cfg.n_data:.6f} per data symbol); "
        f"singular values [{sol.singular_values.min():.4f}, {sol.singular_values.max():.4f}]"
    )

    if spec.eig_draws > 0 and cfg.channel.n_taps >= 1:
        spreads = {KIND_PRP: [], KIND_BASELINE_HAAR: []}
        from .impairments import sample_channel
        from .receiver import eigenvalue_spread

        kept = modulated_indices(cfg)
        rng_eig = run_rng(cfg.seed, STREAM_CHANNEL)
        for _ in range(spec.eig_draws):
            ch = sample_channel(cfg.channel.n_taps, cfg.channel.decay, rng_eig, cfg.n_total)
            h_dr = ch.freq_response[kept]
            for kind in spreads:
                spreads[kind].append(eigenvalue_spread(gens[kind], h_dr))
        mean_prp = float(np.mean(spreads[KIND_PRP]))
        mean_haar = float(np.mean(spreads[KIND_BASELINE_HAAR]))
        report.values[f"eig_spread_prp[{tag}]"] = mean_prp
        report.values[f"eig_spread_haar[{tag}]"] = mean_haar
        report.lines.append(
            f"  detection eigenvalue spread over {spec.eig_draws} channel draws: "
            f"prp {mean_prp:.2f} vs haar baseline {mean_haar:.2f}"
        )

    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for kind, gen in gens.items():
            write_matrix_csv(gen.g, out_dir / f"generator_{kind}_{config_hash(cfg)}.csv")
    if spec.dump_matrices:
        dump_dir = Path(spec.dump_matrices)
        dump_dir.mkdir(parents=True, exist_ok=True)
        for name, mat in (("a", sm.a), ("q", sm.q), ("y", sm.y), ("z", sm.z)):
            write_matrix_csv(mat, dump_dir / f"{name}_{config_hash(cfg)}.csv")


def write_matrix_csv(m: np.ndarray, path: str | Path) -> Path:
    """Complex matrix as CSV: two columns (re, im), row-major entries."""
    path = Path(path)
    m = np.asarray(m)
    lines = [f"# shape={m.shape[0]}x{m.shape[1]}", "re,im"]
    for value in m.ravel():
        lines.append(f"{float(value.real)!r},{float(value.imag)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _emit(curves: list[CurveResult], spec: ExperimentSpec) -> None:
    if spec.output_dir is None:
        return
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for curve in curves:
        write_curve_csv(curve, out_dir / curve_filename(curve))
    if spec.make_plots and curves:
        from .plotting import render_curves

        render_curves(curves, out_dir)


def run_experiment(spec: ExperimentSpec):
    """Single entry point used by the CLI."""
    if spec.experiment == "papr":
        return run_papr_experiment(spec)
    if spec.experiment == "ber":
        return run_ber_experiment(spec)
    if spec.experiment == "psd":
        return run_psd_experiment(spec)
    if spec.experiment == "design":
        return run_design_report(spec)
    raise DimensionError(f"unknown experiment {spec.experiment!r}")
