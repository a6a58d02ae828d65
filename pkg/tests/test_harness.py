from pathlib import Path

import numpy as np
import pytest

from uwofdm.config import ChannelParams, HpaParams, default_80211_config
from uwofdm.harness import (
    ExperimentSpec,
    block_energy,
    expand_sweep,
    get_generator,
    in_band_edge,
    noise_var_for_ebn0,
    run_ber_experiment,
    run_design_report,
    run_papr_experiment,
    run_psd_experiment,
    write_matrix_csv,
)
from uwofdm.metrics import papr_at_ccdf
from uwofdm.precoder import KIND_PRP


@pytest.fixture(scope="module")
def cfg():
    return default_80211_config()


def papr_spec(cfg, **kw):
    defaults = dict(
        experiment="papr", config=cfg, schemes=("none",), n_symbols=600,
        batch_size=128, make_plots=False,
    )
    defaults.update(kw)
    return ExperimentSpec(**defaults)


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def test_block_energy_and_noise_var(cfg):
    assert block_energy(cfg) == pytest.approx(36.0)
    # Eb = energy/bits = 0.5, so Eb/N0 = 0 dB gives noise_var = 0.5
    assert noise_var_for_ebn0(cfg, 0.0) == pytest.approx(0.5)
    assert noise_var_for_ebn0(cfg, 10.0) == pytest.approx(0.05)


def test_expand_sweep(cfg):
    spec = papr_spec(cfg, sweep=("nr", (16, 20)))
    cfgs = expand_sweep(spec)
    assert [c.n_red for c in cfgs] == [16, 20]
    assert [c.n_data for c in cfgs] == [36, 32]


def test_generator_cache_returns_same_object(cfg):
    a = get_generator(cfg, KIND_PRP)
    b = get_generator(cfg, KIND_PRP)
    assert a is b


def test_in_band_edge_default(cfg):
    assert in_band_edge(cfg) == pytest.approx(26.5 / 256)


def test_write_matrix_csv(tmp_path):
    m = np.array([[1 + 2j, 3 - 4j]])
    path = write_matrix_csv(m, tmp_path / "m.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# shape=1x2"
    assert lines[1] == "re,im"
    assert lines[2] == "1.0,2.0"
    assert lines[3] == "3.0,-4.0"


# ---------------------------------------------------------------------------
# PAPR experiment
# ---------------------------------------------------------------------------


def test_papr_single_symbol_step_ccdf(cfg):
    curves = run_papr_experiment(papr_spec(cfg, n_symbols=1))
    y = curves[0].y
    assert set(np.unique(y)) <= {0.0, 1.0}


def test_papr_experiment_reproducible(cfg):
    a = run_papr_experiment(papr_spec(cfg))
    b = run_papr_experiment(papr_spec(cfg))
    assert np.array_equal(a[0].samples, b[0].samples)
    assert np.array_equal(a[0].y, b[0].y)


def test_papr_worker_count_does_not_change_results(cfg):
    one = run_papr_experiment(papr_spec(cfg, schemes=("none", "slm")))
    two = run_papr_experiment(papr_spec(cfg, schemes=("none", "slm"), workers=2))
    for ca, cb in zip(one, two):
        assert np.array_equal(ca.samples, cb.samples)


def test_papr_batch_size_does_not_change_results(cfg):
    a = run_papr_experiment(papr_spec(cfg, batch_size=64))
    b = run_papr_experiment(papr_spec(cfg, batch_size=256))
    assert np.allclose(a[0].samples, b[0].samples, atol=1e-12)


def test_papr_csv_emission_and_naming(cfg, tmp_path):
    spec = papr_spec(cfg, schemes=("none", "prp"), output_dir=str(tmp_path))
    run_papr_experiment(spec)
    names = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert len(names) == 2
    assert names[0].startswith("ccdf_none_")
    assert names[1].startswith("ccdf_prp_")


def test_papr_rerun_byte_identical_csv(cfg, tmp_path):
    spec1 = papr_spec(cfg, output_dir=str(tmp_path / "a"))
    spec2 = papr_spec(cfg, output_dir=str(tmp_path / "b"), workers=2)
    run_papr_experiment(spec1)
    run_papr_experiment(spec2)
    fa = next((tmp_path / "a").glob("*.csv"))
    fb = next((tmp_path / "b").glob("*.csv"))
    assert fa.read_bytes() == fb.read_bytes()


def test_papr_plot_rendering(cfg, tmp_path):
    spec = papr_spec(cfg, output_dir=str(tmp_path), make_plots=True)
    run_papr_experiment(spec)
    assert list(tmp_path.glob("ccdf_*.png"))


# ---------------------------------------------------------------------------
# BER experiment
# ---------------------------------------------------------------------------


def fading_cfg(**kw):
    return default_80211_config(channel=ChannelParams(16, 0.1, True), **kw)


def ber_spec(cfg, **kw):
    defaults = dict(
        experiment="ber", config=cfg, schemes=("none",), n_symbols=3000,
        batch_size=512, snr_db=(6.0, 10.0), target_errors=150, make_plots=False,
    )
    defaults.update(kw)
    return ExperimentSpec(**defaults)


def test_ber_monotone_in_snr():
    curves = run_ber_experiment(ber_spec(fading_cfg()))
    assert curves[0].y[0] > curves[0].y[1] > 0


def test_ber_transparency_exact_counts():
    cfg = fading_cfg()
    spec = ber_spec(cfg, schemes=("none", "slm", "pts"), n_symbols=1500)
    curves = run_ber_experiment(spec)
    by_scheme = {c.meta["scheme"]: c for c in curves}
    base = by_scheme["none"]
    for scheme in ("slm", "pts"):
        assert by_scheme[scheme].meta["bit_errors"] == base.meta["bit_errors"]
        assert np.array_equal(by_scheme[scheme].y, base.y)


def test_ber_worker_invariance_with_adaptive_stop():
    cfg = fading_cfg()
    a = run_ber_experiment(ber_spec(cfg, target_errors=80))
    b = run_ber_experiment(ber_spec(cfg, target_errors=80, workers=2))
    assert a[0].meta["bit_errors"] == b[0].meta["bit_errors"]
    assert a[0].meta["bit_count"] == b[0].meta["bit_count"]


def test_ber_identity_channel_high_snr_error_free():
    cfg = default_80211_config()  # channel disabled -> identity
    curves = run_ber_experiment(ber_spec(cfg, snr_db=(30.0,), n_symbols=200))
    assert curves[0].y[0] == 0.0


def test_ber_hpa_both_emits_two_variants():
    cfg = fading_cfg(hpa=HpaParams(2.0, 5.0, True))
    curves = run_ber_experiment(ber_spec(cfg, hpa_mode="both", n_symbols=600))
    states = {c.meta["hpa_state"] for c in curves}
    assert states == {"off", "on"}
    off = next(c for c in curves if c.meta["hpa_state"] == "off")
    on = next(c for c in curves if c.meta["hpa_state"] == "on")
    assert on.y[0] >= off.y[0]


def test_ber_prp_beats_baseline_no_hpa():
    cfg = fading_cfg()
    curves = run_ber_experiment(
        ber_spec(cfg, schemes=("none", "prp"), snr_db=(14.0,), n_symbols=6000, target_errors=10**9)
    )
    by_scheme = {c.meta["scheme"]: c for c in curves}
    assert by_scheme["prp"].y[0] < by_scheme["none"].y[0]


# ---------------------------------------------------------------------------
# PSD experiment
# ---------------------------------------------------------------------------


def test_psd_emits_pre_and_post(tmp_path):
    cfg = default_80211_config(hpa=HpaParams(2.0, 5.0, True))
    spec = ExperimentSpec(
        experiment="psd", config=cfg, schemes=("none",), n_symbols=96,
        batch_size=48, output_dir=str(tmp_path), make_plots=False,
    )
    curves = run_psd_experiment(spec)
    stages = [c.meta["stage"] for c in curves]
    assert stages == ["pre", "post"]
    files = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert files[0].startswith("psd_none-post_")
    assert files[1].startswith("psd_none-pre_")
    for c in curves:
        assert "oobr_db_at_0.05" in c.meta or "oobr_db_at_0.02" in c.meta


def test_psd_post_oobr_not_below_pre():
    cfg = default_80211_config(hpa=HpaParams(2.0, 5.0, True))
    spec = ExperimentSpec(
        experiment="psd", config=cfg, schemes=("none",), n_symbols=256,
        batch_size=128, make_plots=False, oobr_offsets=(0.05,),
    )
    pre, post = run_psd_experiment(spec)
    assert float(post.meta["oobr_db_at_0.05"]) >= float(pre.meta["oobr_db_at_0.05"])


# ---------------------------------------------------------------------------
# design report
# ---------------------------------------------------------------------------


def test_design_report_default_passes(tmp_path):
    spec = ExperimentSpec(
        experiment="design", config=default_80211_config(),
        output_dir=str(tmp_path), eig_draws=20,
    )
    report = run_design_report(spec)
    assert report.passed, report.text
    assert "residual" in report.text or "misfit" in report.text
    assert (tmp_path / "design_report.txt").exists()
    assert list(tmp_path.glob("generator_prp_*.csv"))


def test_design_report_dump_matrices(tmp_path):
    spec = ExperimentSpec(
        experiment="design", config=default_80211_config(),
        eig_draws=0, dump_matrices=str(tmp_path / "mats"),
    )
    report = run_design_report(spec)
    assert report.passed
    for name in ("a", "q", "y", "z"):
        assert list((tmp_path / "mats").glob(f"{name}_*.csv")), name


def test_design_report_catches_broken_config():
    import dataclasses

    # force an inconsistent geometry past validation
    cfg = default_80211_config()
    broken = dataclasses.replace(cfg, n_red=12, n_data=40)
    spec = ExperimentSpec(experiment="design", config=broken, eig_draws=0)
    report = run_design_report(spec)
    assert not report.passed
    assert "FAIL" in report.text


def test_design_report_sweep_runs_all_points():
    spec = ExperimentSpec(
        experiment="design", config=default_80211_config(),
        sweep=("nr", (16, 20, 24, 28)), eig_draws=0,
    )
    report = run_design_report(spec)
    assert report.passed
    for n_red in (16, 20, 24, 28):
        assert f"residual[n_red={n_red}]" in report.values
