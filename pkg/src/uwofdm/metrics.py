"""Curve estimators (CCDF, Welch PSD, out-of-band level) and CSV emission."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal as sp_signal

from .errors import DegenerateInputError, DimensionError

KIND_CCDF = "ccdf"
KIND_BER = "ber"
KIND_PSD = "psd"


@dataclass
class CurveResult:
    """One named (x, y) series with run metadata.

    ``samples`` optionally carries the raw per-symbol values the curve was
    estimated from (never written to CSV); tests and summary statistics use
    them directly.
    """

    kind: str
    x: np.ndarray
    y: np.ndarray
    meta: dict[str, str] = field(default_factory=dict)
    samples: np.ndarray | None = None


def ccdf(papr_samples: np.ndarray, thresholds: np.ndarray) -> CurveResult:
    """Empirical probability that a sample exceeds each threshold."""
    samples = np.asarray(papr_samples, dtype=float).ravel()
    if samples.size == 0:
        raise DegenerateInputError("CCDF of an empty sample set")
    thresholds = np.asarray(thresholds, dtype=float)
    y = np.array([(samples > t).mean() for t in thresholds])
    return CurveResult(kind=KIND_CCDF, x=thresholds, y=y, samples=samples)


def default_ccdf_thresholds(lo: float = 4.0, hi: float = 13.0, step: float = 0.1) -> np.ndarray:
    return np.round(np.arange(lo, hi + step / 2, step), 6)


def papr_at_ccdf(samples: np.ndarray, level: float) -> float:
    """Threshold (dB) at which the empirical CCDF crosses ``level``."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise DegenerateInputError("quantile of an empty sample set")
    return float(np.quantile(samples, 1.0 - level))


def bootstrap_quantile_gap(
    samples_a: np.ndarray,
    samples_b: np.ndarray,
    level: float,
    rng: np.random.Generator,
    n_boot: int = 1000,
) -> tuple[float, float]:
    """Two-sided 95% bootstrap interval for quantile(a) - quantile(b).

    When both sample sets share symbol indices the resampling is paired,
    which is the case for shared-seed scheme comparisons.
    """
    a = np.asarray(samples_a, dtype=float).ravel()
    b = np.asarray(samples_b, dtype=float).ravel()
    q = 1.0 - level
    gaps = np.empty(n_boot)
    paired = a.size == b.size
    for i in range(n_boot):
        if paired:
            idx = rng.integers(0, a.size, size=a.size)
            gaps[i] = np.quantile(a[idx], q) - np.quantile(b[idx], q)
        else:
            ia = rng.integers(0, a.size, size=a.size)
            ib = rng.integers(0, b.size, size=b.size)
            gaps[i] = np.quantile(a[ia], q) - np.quantile(b[ib], q)
    return float(np.quantile(gaps, 0.025)), float(np.quantile(gaps, 0.975))


def welch_psd(
    stream: np.ndarray,
    segment_len: int,
    overlap: float = 0.5,
    window: str = "hann",
    in_band_edge: float | None = None,
) -> CurveResult:
    """Averaged windowed periodogram on a [-0.5, 0.5) normalized-frequency axis.

    The level is expressed in dB relative to the mean over the in-band
    region (|f| <= in_band_edge), or over all bins when no edge is given.
    """
    stream = np.asarray(stream, dtype=complex).ravel()
    if segment_len > stream.size:
        raise DimensionError(
            f"segment length {segment_len} exceeds stream length {stream.size}"
        )
    win = {"hann": "hann", "rect": "boxcar"}[window.lower()]
    freqs, pxx = sp_signal.welch(
        stream,
        fs=1.0,
        window=win,
        nperseg=segment_len,
        noverlap=int(overlap * segment_len),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    pxx = np.fft.fftshift(pxx)
    if in_band_edge is None:
        ref = pxx.mean()
    else:
        mask = np.abs(freqs) <= in_band_edge
        if not np.any(mask):
            raise DimensionError("in-band region contains no PSD bins")
        ref = pxx[mask].mean()
    y = 10.0 * np.log10(np.maximum(pxx, 1e-300) / ref)
    return CurveResult(kind=KIND_PSD, x=freqs, y=y)


def oobr_db(psd: CurveResult, band_edge: float, offset: float, half_width_bins: int = 2) -> float:
    """PSD level (dB, relative to in-band mean) near band_edge + offset.

    Averaged in linear power over a small window of bins centered on the
    query frequency.
    """
    f0 = band_edge + offset
    if not -0.5 <= f0 < 0.5:
        raise DimensionError(f"query frequency {f0} outside the Nyquist range")
    df = float(psd.x[1] - psd.x[0])
    half = half_width_bins * df
    mask = np.abs(psd.x - f0) <= half + 1e-12
    if not np.any(mask):
        raise DimensionError("PSD grid does not cover the query window")
    return float(10.0 * np.log10(np.mean(10.0 ** (psd.y[mask] / 10.0))))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def curve_filename(curve: CurveResult) -> str:
    scheme = curve.meta.get("scheme", "na")
    confighash = curve.meta.get("confighash", "00000000")
    return f"{curve.kind}_{scheme}_{confighash}.csv"


def write_curve_csv(curve: CurveResult, path: str | Path) -> Path:
    """One row per (x, y); metadata as '# key=value' header lines.

    Values are written with full-precision repr so reruns of a deterministic
    experiment produce byte-identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}={v}" for k, v in sorted(curve.meta.items())]
    lines.append("x,y")
    for xv, yv in zip(curve.x, curve.y):
        lines.append(f"{float(xv)!r},{float(yv)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_curve_csv(path: str | Path) -> CurveResult:
    """Inverse of :func:`write_curve_csv` (kind recovered from metadata)."""
    meta: dict[str, str] = {}
    xs: list[float] = []
    ys: list[float] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line and line != "x,y":
            a, b = line.split(",")
            xs.append(float(a))
            ys.append(float(b))
    return CurveResult(
        kind=meta.get("kind", "unknown"), x=np.array(xs), y=np.array(ys), meta=meta
    )
