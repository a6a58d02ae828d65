"""System configuration: parameters, validation, and file loading.

A validated ``SystemConfig`` is immutable and carries the derived counts
``n_data`` (data symbols per block) and ``n_mod`` (modulated subcarriers),
so it can be shared read-only across parallel workers.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CONSTELLATIONS = ("qpsk", "16qam")
SCHEMES = ("none", "prp", "pts", "slm", "prp-pts", "prp-slm")
PAPR_WINDOWS = ("full", "data_only")


@dataclass(frozen=True)
class HpaParams:
    """Smooth-saturation amplifier settings (knee factor, clip level above mean power)."""

    knee: float = 2.0
    backoff_db: float = 5.0
    enabled: bool = False


@dataclass(frozen=True)
class ChannelParams:
    """Frequency-selective Rayleigh channel settings (tap count, exponential decay)."""

    n_taps: int = 16
    decay: float = 0.1
    enabled: bool = False


@dataclass(frozen=True)
class SystemConfig:
    """All knobs of one simulated system.

    ``n_data`` and ``n_mod`` are derived by :func:`validate`; they stay at -1
    on a raw, unvalidated instance.
    """

    n_total: int
    n_uw: int
    n_red: int
    n_zero: int
    zero_subcarrier_indices: tuple[int, ...]
    uw_samples: tuple[complex, ...] = ()
    constellation: str = "qpsk"
    oversampling: int = 4
    scheme: str = "none"
    pts_subblocks: int = 4
    slm_candidates: int = 4
    phase_set: tuple[complex, ...] = (1 + 0j, -1 + 0j, 1j, -1j)
    hpa: HpaParams = field(default_factory=HpaParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    seed: int = 12345
    papr_window: str = "full"
    n_data: int = -1
    n_mod: int = -1

    @property
    def is_validated(self) -> bool:
        return self.n_data > 0

    def bits_per_symbol(self) -> int:
        return {"qpsk": 2, "16qam": 4}[self.constellation]

    def uw_vector(self) -> np.ndarray:
        uw = np.zeros(self.n_uw, dtype=complex)
        if self.uw_samples:
            uw[:] = np.asarray(self.uw_samples, dtype=complex)
        return uw


def default_zero_indices(n_total: int, n_zero: int) -> tuple[int, ...]:
    """DC plus a band-edge block centered on the Nyquist bin."""
    if n_zero <= 0:
        return ()
    k = n_zero - 1
    start = n_total // 2 - k // 2
    return (0,) + tuple(range(start, start + k))


def validate(raw: SystemConfig) -> SystemConfig:
    """Check every invariant and return a copy with derived counts attached.

    Raises DimensionError naming the violated constraint. Idempotent.
    """
    c = raw
    if c.n_total < 1:
        raise DimensionError(f"n_total must be >= 1, got {c.n_total}")
    if not 0 <= c.n_uw < c.n_total:
        raise DimensionError(f"n_uw must lie in [0, n_total), got {c.n_uw}")
    if c.n_red < c.n_uw:
        raise DimensionError(f"n_red >= n_uw required, got n_red={c.n_red} < n_uw={c.n_uw}")
    n_data = c.n_total - c.n_red - c.n_zero
    n_mod = c.n_total - c.n_zero
    if n_data <= 0:
        raise DimensionError(f"derived n_data = n_total - n_red - n_zero = {n_data} must be > 0")
    zs = tuple(int(i) for i in c.zero_subcarrier_indices)
    if len(zs) != c.n_zero:
        raise DimensionError(
            f"zero_subcarrier_indices has {len(zs)} entries, n_zero={c.n_zero}"
        )
    if len(set(zs)) != len(zs):
        raise DimensionError("zero_subcarrier_indices must be distinct")
    if zs and not all(0 <= i < c.n_total for i in zs):
        raise DimensionError("zero_subcarrier_indices must lie in [0, n_total)")
    if c.uw_samples and len(c.uw_samples) != c.n_uw:
        raise DimensionError(
            f"uw_samples has {len(c.uw_samples)} entries, n_uw={c.n_uw}"
        )
    if c.constellation not in CONSTELLATIONS:
        raise DimensionError(f"constellation must be one of {CONSTELLATIONS}")
    if c.oversampling < 1:
        raise DimensionError(f"oversampling must be >= 1, got {c.oversampling}")
    if c.scheme not in SCHEMES:
        raise DimensionError(f"scheme must be one of {SCHEMES}")
    if c.pts_subblocks < 1:
        raise DimensionError("pts_subblocks must be >= 1")
    if c.slm_candidates < 1:
        raise DimensionError("slm_candidates must be >= 1")
    if not c.phase_set:
        raise DimensionError("phase_set must not be empty")
    for w in c.phase_set:
        if abs(abs(complex(w)) - 1.0) > 1e-12:
            raise DimensionError(f"phase_set entry {w} is not unit magnitude")
    if c.hpa.knee <= 0:
        raise DimensionError("hpa.knee must be > 0")
    if c.channel.n_taps < 1:
        raise DimensionError("channel.n_taps must be >= 1")
    if c.channel.n_taps - 1 > c.n_uw:
        raise DimensionError(
            f"channel memory n_taps-1={c.channel.n_taps - 1} exceeds guard n_uw={c.n_uw}"
        )
    if c.papr_window not in PAPR_WINDOWS:
        raise DimensionError(f"papr_window must be one of {PAPR_WINDOWS}")
    return dataclasses.replace(
        c,
        zero_subcarrier_indices=zs,
        uw_samples=tuple(complex(u) for u in c.uw_samples),
        phase_set=tuple(complex(w) for w in c.phase_set),
        n_data=n_data,
        n_mod=n_mod,
    )


def default_80211_config(**overrides) -> SystemConfig:
    """64-subcarrier configuration with 16-sample guard, 16 redundant and 12
    zero subcarriers (DC + 11 band-edge), QPSK, 4x oversampling, zero UW."""
    base = dict(
        n_total=64,
        n_uw=16,
        n_red=16,
        n_zero=12,
        zero_subcarrier_indices=default_zero_indices(64, 12),
        uw_samples=(),
        constellation="qpsk",
        oversampling=4,
        scheme="none",
        pts_subblocks=4,
        slm_candidates=4,
        phase_set=(1 + 0j, -1 + 0j, 1j, -1j),
        hpa=HpaParams(),
        channel=ChannelParams(),
        seed=12345,
        papr_window="full",
    )
    base.update(overrides)
    return validate(SystemConfig(**base))


def modulated_indices(cfg: SystemConfig) -> np.ndarray:
    """Subcarrier indices kept by the mapping matrix, in increasing order."""
    zero = set(cfg.zero_subcarrier_indices)
    return np.array([k for k in range(cfg.n_total) if k not in zero], dtype=int)


def config_hash(cfg: SystemConfig) -> str:
    """Stable 8-hex-digit digest of the full configuration contents."""
    parts = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, (HpaParams, ChannelParams)):
            v = dataclasses.astuple(v)
        parts.append(f"{f.name}={v!r}")
    blob = ";".join(parts).encode()
    return hashlib.sha256(blob).hexdigest()[:8]


def config_meta(cfg: SystemConfig) -> dict[str, str]:
    """Flat key/value view of a config for CSV metadata headers."""
    meta = {
        "n_total": str(cfg.n_total),
        "n_uw": str(cfg.n_uw),
        "n_red": str(cfg.n_red),
        "n_zero": str(cfg.n_zero),
        "n_data": str(cfg.n_data),
        "n_mod": str(cfg.n_mod),
        "constellation": cfg.constellation,
        "oversampling": str(cfg.oversampling),
        "pts_subblocks": str(cfg.pts_subblocks),
        "slm_candidates": str(cfg.slm_candidates),
        "hpa": f"knee={cfg.hpa.knee};backoff_db={cfg.hpa.backoff_db};enabled={cfg.hpa.enabled}",
        "channel": f"n_taps={cfg.channel.n_taps};decay={cfg.channel.decay};enabled={cfg.channel.enabled}",
        "seed": str(cfg.seed),
        "papr_window": cfg.papr_window,
        "confighash": config_hash(cfg),
    }
    return meta


# ---------------------------------------------------------------------------
# Config file handling
# ---------------------------------------------------------------------------

_SCALAR_KEYS = {
    "n_total": int,
    "n_uw": int,
    "n_red": int,
    "n_zero": int,
    "constellation": str,
    "oversampling": int,
    "scheme": str,
    "pts_subblocks": int,
    "slm_candidates": int,
    "seed": int,
    "papr_window": str,
}
_LIST_KEYS = ("zero_subcarrier_indices", "uw_samples", "phase_set")
_HPA_KEYS = {"knee": float, "backoff_db": float, "enabled": bool}
_CHANNEL_KEYS = {"n_taps": int, "decay": float, "enabled": bool}


def parse_complex(value) -> complex:
    """Accept a number, a ``"re+imj"`` string, or a ``[re, im]`` pair."""
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex value {value!r}") from exc
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"cannot parse complex value {value!r}")


def config_from_dict(data: dict) -> SystemConfig:
    """Build and validate a SystemConfig from a flat key/value mapping.

    Unknown keys are errors, so a typo in a config file never silently
    falls back to a default.
    """
    kwargs: dict = {}
    data = dict(data)
    for key, conv in _SCALAR_KEYS.items():
        if key in data:
            kwargs[key] = conv(data.pop(key))
    if "zero_subcarrier_indices" in data:
        kwargs["zero_subcarrier_indices"] = tuple(int(i) for i in data.pop("zero_subcarrier_indices"))
    if "uw_samples" in data:
        kwargs["uw_samples"] = tuple(parse_complex(v) for v in data.pop("uw_samples"))
    if "phase_set" in data:
        kwargs["phase_set"] = tuple(parse_complex(v) for v in data.pop("phase_set"))
    for section, keys, cls in (
        ("hpa", _HPA_KEYS, HpaParams),
        ("channel", _CHANNEL_KEYS, ChannelParams),
    ):
        if section in data:
            sub = dict(data.pop(section))
            unknown = set(sub) - set(keys)
            if unknown:
                raise ConfigError(f"unknown {section} keys: {sorted(unknown)}")
            kwargs[section] = cls(**{k: keys[k](v) for k, v in sub.items()})
    if data:
        raise ConfigError(f"unknown config keys: {sorted(data)}")

    if "n_total" not in kwargs:
        raise ConfigError("config must set n_total")
    for required in ("n_uw", "n_red", "n_zero"):
        if required not in kwargs:
            raise ConfigError(f"config must set {required}")
    if "zero_subcarrier_indices" not in kwargs:
        kwargs["zero_subcarrier_indices"] = default_zero_indices(
            kwargs["n_total"], kwargs["n_zero"]
        )
    return validate(SystemConfig(**kwargs))


def load_config(path: str) -> SystemConfig:
    """Load a TOML config file whose keys mirror the SystemConfig fields."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_dict(data)
