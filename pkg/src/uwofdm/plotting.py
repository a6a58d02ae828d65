"""Render experiment curves to PNG files next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import KIND_BER, KIND_CCDF, KIND_PSD, CurveResult

_AXIS_LABELS = {
    KIND_CCDF: ("PAPR threshold [dB]", "CCDF"),
    KIND_BER: ("Eb/N0 [dB]", "BER"),
    KIND_PSD: ("normalized frequency", "PSD [dB rel. in-band]"),
}


def _group_key(curve: CurveResult) -> tuple[str, str]:
    return curve.kind, curve.meta.get("confighash", "00000000")


def render_curves(curves: list[CurveResult], out_dir: str | Path) -> list[Path]:
    """One figure per (kind, config), schemes overlaid; returns written paths."""
    out_dir = Path(out_dir)
    groups: dict[tuple[str, str], list[CurveResult]] = {}
    for curve in curves:
        groups.setdefault(_group_key(curve), []).append(curve)

    written: list[Path] = []
    for (kind, confighash), group in groups.items():
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        for curve in group:
            label = curve.meta.get("scheme", "?")
            if curve.meta.get("hpa_state") == "on":
                label += " (hpa)"
            if kind in (KIND_CCDF, KIND_BER):
                ax.semilogy(curve.x, curve.y, label=label)
            else:
                ax.plot(curve.x, curve.y, label=label, linewidth=0.9)
        xlabel, ylabel = _AXIS_LABELS.get(kind, ("x", "y"))
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, which="both", alpha=0.4)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / f"{kind}_{confighash}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
