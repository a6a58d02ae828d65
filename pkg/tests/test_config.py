import dataclasses

import numpy as np
import pytest

from uwofdm.config import (
    ChannelParams,
    HpaParams,
    SystemConfig,
    config_from_dict,
    config_hash,
    default_80211_config,
    default_zero_indices,
    load_config,
    modulated_indices,
    validate,
)
from uwofdm.errors import ConfigError, DimensionError


def make_raw(**overrides):
    base = dict(
        n_total=64,
        n_uw=16,
        n_red=16,
        n_zero=12,
        zero_subcarrier_indices=default_zero_indices(64, 12),
    )
    base.update(overrides)
    return SystemConfig(**base)


def test_validate_derives_default_dimensions():
    cfg = validate(make_raw())
    assert cfg.n_data == 36
    assert cfg.n_mod == 52


def test_validate_small_arithmetic():
    cfg = validate(
        make_raw(
            n_total=8, n_uw=2, n_red=2, n_zero=2, zero_subcarrier_indices=(0, 4),
            channel=ChannelParams(n_taps=2),
        )
    )
    assert cfg.n_data == 4
    assert cfg.n_mod == 6


def test_validate_rejects_insufficient_redundancy():
    with pytest.raises(DimensionError, match="n_red"):
        validate(make_raw(n_red=12))


def test_validate_idempotent():
    cfg = validate(make_raw())
    assert validate(cfg) == cfg


def test_validate_names_violated_constraint():
    with pytest.raises(DimensionError, match="zero_subcarrier_indices"):
        validate(make_raw(zero_subcarrier_indices=(0, 1)))
    with pytest.raises(DimensionError, match="distinct"):
        validate(make_raw(zero_subcarrier_indices=(0,) * 12))
    with pytest.raises(DimensionError, match="oversampling"):
        validate(make_raw(oversampling=0))
    with pytest.raises(DimensionError, match="unit magnitude"):
        validate(make_raw(phase_set=(1.0, 0.5j)))
    with pytest.raises(DimensionError, match="guard"):
        validate(make_raw(channel=ChannelParams(n_taps=18)))
    with pytest.raises(DimensionError, match="n_data"):
        validate(make_raw(n_red=52, n_zero=12))


def test_default_config_matches_reference_dimensions():
    cfg = default_80211_config()
    assert cfg.n_data == 36
    assert cfg.n_zero == 12
    assert len(cfg.zero_subcarrier_indices) == 12
    assert cfg.zero_subcarrier_indices == (0, 27, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37)
    assert validate(cfg) == cfg


def test_sweep_family_dimensions():
    # fixed modulated count 52 while redundancy grows
    expected = {16: 36, 20: 32, 24: 28, 28: 24}
    for n_red, n_data in expected.items():
        cfg = default_80211_config(n_red=n_red)
        assert cfg.n_mod == 52
        assert cfg.n_data == n_data


def test_modulated_indices_complement_zero_set():
    cfg = default_80211_config()
    kept = modulated_indices(cfg)
    assert kept.size == 52
    assert set(kept) | set(cfg.zero_subcarrier_indices) == set(range(64))


def test_config_hash_stable_and_sensitive():
    a = default_80211_config()
    b = default_80211_config()
    assert config_hash(a) == config_hash(b)
    c = default_80211_config(seed=999)
    assert config_hash(a) != config_hash(c)


def test_bits_per_symbol():
    assert default_80211_config().bits_per_symbol() == 2
    assert default_80211_config(constellation="16qam").bits_per_symbol() == 4


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        config_from_dict({"n_total": 64, "n_uw": 16, "n_red": 16, "n_zero": 12, "bogus": 1})
    with pytest.raises(ConfigError, match="unknown hpa keys"):
        config_from_dict(
            {"n_total": 64, "n_uw": 16, "n_red": 16, "n_zero": 12, "hpa": {"nope": 2}}
        )


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "system.toml"
    path.write_text(
        "\n".join(
            [
                "n_total = 64",
                "n_uw = 16",
                "n_red = 16",
                "n_zero = 12",
                'constellation = "16qam"',
                "oversampling = 2",
                "seed = 777",
                'phase_set = ["1", "-1", "1j", "-1j"]',
                "[hpa]",
                "knee = 3.0",
                "backoff_db = 4.0",
                "enabled = true",
                "[channel]",
                "n_taps = 8",
                "decay = 0.2",
            ]
        )
    )
    cfg = load_config(str(path))
    assert cfg.constellation == "16qam"
    assert cfg.oversampling == 2
    assert cfg.seed == 777
    assert cfg.hpa == HpaParams(knee=3.0, backoff_db=4.0, enabled=True)
    assert cfg.channel.n_taps == 8
    assert cfg.zero_subcarrier_indices == default_zero_indices(64, 12)
    assert cfg.phase_set == (1 + 0j, -1 + 0j, 1j, -1j)


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.toml")


def test_frozen_config_is_immutable():
    cfg = default_80211_config()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.n_total = 128


def test_uw_vector_default_zero():
    cfg = default_80211_config()
    assert np.all(cfg.uw_vector() == 0)
    cfg2 = default_80211_config(uw_samples=tuple([1 + 0j] * 16))
    assert np.all(cfg2.uw_vector() == 1)
