import numpy as np
import pytest

from uwofdm.errors import DegenerateInputError, DimensionError
from uwofdm.metrics import (
    CurveResult,
    bootstrap_quantile_gap,
    ccdf,
    curve_filename,
    default_ccdf_thresholds,
    oobr_db,
    papr_at_ccdf,
    read_curve_csv,
    welch_psd,
    write_curve_csv,
)


# ---------------------------------------------------------------------------
# CCDF
# ---------------------------------------------------------------------------


def test_ccdf_direct_count():
    curve = ccdf(np.array([1.0, 2.0, 3.0]), np.array([2.5]))
    assert curve.y[0] == pytest.approx(1.0 / 3.0)


def test_ccdf_extremes():
    curve = ccdf(np.array([5.0, 6.0]), np.array([0.0, 10.0]))
    assert curve.y[0] == 1.0
    assert curve.y[1] == 0.0


def test_ccdf_monotone_non_increasing():
    rng = np.random.default_rng(0)
    curve = ccdf(rng.normal(8, 1, 5000), default_ccdf_thresholds())
    assert np.all(np.diff(curve.y) <= 0)
    assert np.all((curve.y >= 0) & (curve.y <= 1))


def test_ccdf_empty_raises():
    with pytest.raises(DegenerateInputError):
        ccdf(np.array([]), np.array([1.0]))


def test_papr_at_ccdf_is_matching_quantile():
    rng = np.random.default_rng(1)
    samples = rng.normal(9, 1, 100000)
    x = papr_at_ccdf(samples, 1e-2)
    assert np.mean(samples > x) == pytest.approx(1e-2, rel=0.05)


def test_bootstrap_gap_detects_shift():
    rng = np.random.default_rng(2)
    a = rng.normal(9, 1, 4000)
    b = a - 1.0  # paired, exactly 1 dB lower
    lo, hi = bootstrap_quantile_gap(a, b, 1e-1, np.random.default_rng(3), n_boot=300)
    assert lo <= 1.0 <= hi
    assert lo > 0.5


# ---------------------------------------------------------------------------
# Welch PSD
# ---------------------------------------------------------------------------


def test_psd_pure_tone_peak():
    n = 256 * 64
    k = 10
    tone = np.exp(2j * np.pi * k * np.arange(n) / 256)
    curve = welch_psd(tone, 256, 0.5, "hann")
    peak_idx = np.argmax(curve.y)
    assert curve.x[peak_idx] == pytest.approx(10 / 256, abs=1e-9)
    assert curve.y[peak_idx] - np.median(curve.y) >= 40.0


def test_psd_white_noise_flat():
    rng = np.random.default_rng(4)
    n_seg = 300
    noise = (rng.standard_normal(256 * n_seg) + 1j * rng.standard_normal(256 * n_seg)) / np.sqrt(2)
    curve = welch_psd(noise, 256, 0.5, "hann")
    assert np.max(np.abs(curve.y)) < 1.0


def test_psd_deterministic():
    rng = np.random.default_rng(5)
    sig = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    a = welch_psd(sig, 256, 0.5, "hann")
    b = welch_psd(sig.copy(), 256, 0.5, "hann")
    assert np.array_equal(a.y, b.y)


def test_psd_convergence_with_segments():
    rng = np.random.default_rng(6)
    noise = (rng.standard_normal(256 * 1200) + 1j * rng.standard_normal(256 * 1200)) / np.sqrt(2)
    half = welch_psd(noise[: 256 * 600], 256)
    full = welch_psd(noise, 256)
    assert np.max(np.abs(full.y - half.y)) < 0.5


def test_psd_segment_too_long():
    with pytest.raises(DimensionError):
        welch_psd(np.ones(100, dtype=complex), 256)


def test_psd_rect_window_supported():
    rng = np.random.default_rng(7)
    sig = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    curve = welch_psd(sig, 256, 0.5, "rect")
    assert curve.x.size == 256


def test_psd_in_band_normalization():
    rng = np.random.default_rng(8)
    sig = rng.standard_normal(256 * 200) + 1j * rng.standard_normal(256 * 200)
    curve = welch_psd(sig, 256, 0.5, "hann", in_band_edge=0.1)
    mask = np.abs(curve.x) <= 0.1
    linear = 10 ** (curve.y[mask] / 10)
    assert np.mean(linear) == pytest.approx(1.0, rel=1e-9)


# ---------------------------------------------------------------------------
# out-of-band level
# ---------------------------------------------------------------------------


def test_oobr_in_band_query_near_zero():
    rng = np.random.default_rng(9)
    sig = rng.standard_normal(256 * 400) + 1j * rng.standard_normal(256 * 400)
    curve = welch_psd(sig, 256, 0.5, "hann", in_band_edge=0.5)
    assert abs(oobr_db(curve, 0.0, 0.1)) < 0.5


def test_oobr_tone_far_off_band():
    n = 256 * 64
    tone = np.exp(2j * np.pi * 5 * np.arange(n) / 256)
    curve = welch_psd(tone, 256, 0.5, "hann", in_band_edge=0.05)
    assert oobr_db(curve, 0.05, 0.3) <= -40.0


def test_oobr_rejects_out_of_nyquist():
    curve = welch_psd(np.ones(1024, dtype=complex), 256)
    with pytest.raises(DimensionError):
        oobr_db(curve, 0.4, 0.2)


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------


def test_csv_roundtrip_and_naming(tmp_path):
    curve = CurveResult(
        kind="ccdf",
        x=np.array([1.0, 2.0]),
        y=np.array([0.5, 0.25]),
        meta={"scheme": "prp", "confighash": "deadbeef", "kind": "ccdf"},
    )
    assert curve_filename(curve) == "ccdf_prp_deadbeef.csv"
    path = write_curve_csv(curve, tmp_path / curve_filename(curve))
    back = read_curve_csv(path)
    assert np.array_equal(back.x, curve.x)
    assert np.array_equal(back.y, curve.y)
    assert back.meta["scheme"] == "prp"


def test_csv_bytes_stable(tmp_path):
    curve = CurveResult(
        kind="ber",
        x=np.array([0.0, 5.0]),
        y=np.array([0.1234567890123456, 1e-7]),
        meta={"scheme": "none", "confighash": "0" * 8, "kind": "ber"},
    )
    p1 = write_curve_csv(curve, tmp_path / "a.csv")
    p2 = write_curve_csv(curve, tmp_path / "b.csv")
    assert p1.read_bytes() == p2.read_bytes()
