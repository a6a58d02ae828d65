"""Batch command line: design | papr | ber | psd.

Configuration comes from a TOML file (``--config``) or the built-in
64-subcarrier default, with a per-key override flag for every field.
Exit codes: 0 success, 1 invariant failure in the design report,
2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness
from .config import (
    SystemConfig,
    config_from_dict,
    default_80211_config,
    load_config,
    parse_complex,
    validate,
)
from .errors import ConfigError, DimensionError, UwofdmError


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v != "")


def _complex_list(text: str) -> tuple[complex, ...]:
    return tuple(parse_complex(v) for v in text.split(",") if v != "")


def _snr_grid(text: str) -> tuple[float, ...]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected a:b:step") from exc
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("expected a <= b and step > 0")
    grid = []
    v = lo
    while v <= hi + 1e-9:
        grid.append(round(v, 9))
        v += step
    return tuple(grid)


def _sweep(text: str) -> tuple[str, tuple[int, ...]]:
    name, _, values = text.partition("=")
    if not values:
        raise argparse.ArgumentTypeError("expected name=v1,v2,...")
    return name.strip(), _int_list(values)


_CONFIG_FLAGS = {
    # dest -> (config field path, parser)
    "n_total": ("n_total", int),
    "n_uw": ("n_uw", int),
    "n_red": ("n_red", int),
    "n_zero": ("n_zero", int),
    "zero_subcarrier_indices": ("zero_subcarrier_indices", _int_list),
    "uw_samples": ("uw_samples", _complex_list),
    "constellation": ("constellation", str),
    "oversampling": ("oversampling", int),
    "pts_subblocks": ("pts_subblocks", int),
    "slm_candidates": ("slm_candidates", int),
    "phase_set": ("phase_set", _complex_list),
    "papr_window": ("papr_window", str),
    "hpa_knee": ("hpa.knee", float),
    "hpa_backoff_db": ("hpa.backoff_db", float),
    "channel_taps": ("channel.n_taps", int),
    "channel_decay": ("channel.decay", float),
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML config file")
    p.add_argument("--scheme", default="none", help="comma list: none,prp,pts,slm,prp-pts,prp-slm")
    p.add_argument("--symbols", type=int, default=10_000, help="Monte Carlo symbols per point")
    p.add_argument("--seed", type=int, default=None, help="master RNG seed (overrides config)")
    p.add_argument("--sweep", type=_sweep, default=None, metavar="NAME=V1,V2,...",
                   help="parameter sweep, e.g. nr=16,20,24,28")
    p.add_argument("--out", default=None, metavar="DIR", help="output directory for CSV/PNG")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--batch-size", type=int, default=512, help="symbols per Monte Carlo chunk")
    plot = p.add_mutually_exclusive_group()
    plot.add_argument("--plot", dest="plot", action="store_true", default=True)
    plot.add_argument("--no-plot", dest="plot", action="store_false")
    for dest, (path, conv) in _CONFIG_FLAGS.items():
        flag = "--" + dest.replace("_", "-")
        p.add_argument(flag, dest=f"cfg_{dest}", type=conv, default=None,
                       help=f"override config key {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwofdm",
        description="UW-OFDM PAPR/BER/PSD experiments with a precomputed "
        "PAPR-reducing generator matrix and PTS/SLM candidate search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="build matrices, run the invariant suite")
    _add_common(p_design)
    p_design.add_argument("--dump-matrices", metavar="DIR", default=None,
                          help="also write the structural matrices as CSV")
    p_design.add_argument("--eig-draws", type=int, default=200,
                          help="channel draws for the eigenvalue-spread diagnostic")

    p_papr = sub.add_parser("papr", help="PAPR CCDF per scheme")
    _add_common(p_papr)

    p_ber = sub.add_parser("ber", help="BER over an SNR grid per scheme")
    _add_common(p_ber)
    p_ber.add_argument("--snr", type=_snr_grid, default=(0, 5, 10, 15, 20, 25, 30, 35, 40),
                       metavar="A:B:STEP", help="Eb/N0 grid in dB")
    p_ber.add_argument("--hpa", choices=("on", "off", "both"), default="off")
    p_ber.add_argument("--channel", choices=("on", "off"), default="on",
                       help="fading channel (off = identity channel)")
    p_ber.add_argument("--target-errors", type=int, default=200,
                       help="stop a point once this many bit errors are seen")

    p_psd = sub.add_parser("psd", help="Welch PSD before/after the amplifier")
    _add_common(p_psd)
    return parser


def _apply_overrides(cfg: SystemConfig, args: argparse.Namespace) -> SystemConfig:
    updates: dict = {}
    hpa = dataclasses.asdict(cfg.hpa)
    channel = dataclasses.asdict(cfg.channel)
    for dest, (path, _) in _CONFIG_FLAGS.items():
        value = getattr(args, f"cfg_{dest}")
        if value is None:
            continue
        if path.startswith("hpa."):
            hpa[path.split(".", 1)[1]] = value
        elif path.startswith("channel."):
            channel[path.split(".", 1)[1]] = value
        else:
            updates[path] = value
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "hpa", None) is not None:
        hpa["enabled"] = args.hpa in ("on", "both")
    if getattr(args, "channel", None) is not None:
        channel["enabled"] = args.channel == "on"
    from .config import ChannelParams, HpaParams

    updates["hpa"] = HpaParams(**hpa)
    updates["channel"] = ChannelParams(**channel)
    return validate(dataclasses.replace(cfg, **updates))


def _build_spec(args: argparse.Namespace) -> harness.ExperimentSpec:
    cfg = load_config(args.config) if args.config else default_80211_config()
    cfg = _apply_overrides(cfg, args)
    schemes = tuple(s.strip() for s in args.scheme.split(",") if s.strip())
    spec = harness.ExperimentSpec(
        experiment=args.command,
        config=cfg,
        schemes=schemes,
        sweep=args.sweep,
        n_symbols=args.symbols,
        output_dir=args.out,
        workers=args.workers,
        batch_size=args.batch_size,
        make_plots=args.plot,
    )
    if args.command == "ber":
        spec.snr_db = tuple(args.snr)
        spec.hpa_mode = args.hpa
        spec.target_errors = args.target_errors
    if args.command == "design":
        spec.dump_matrices = args.dump_matrices
        spec.eig_draws = args.eig_draws
    return spec


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = _build_spec(args)
    except (ConfigError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = harness.run_experiment(spec)
    except UwofdmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "design":
        print(result.text, end="")
        return 0 if result.passed else 1
    for curve in result:
        kind = curve.meta.get("kind", curve.kind)
        scheme = curve.meta.get("scheme", "")
        print(f"{kind} {scheme}: {len(curve.x)} points")
    if spec.output_dir:
        print(f"wrote output to {spec.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
