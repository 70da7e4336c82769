"""Bound-curve figure: measurement counts against window length, one curve
per step length, with the parameter-count caps as reference lines.

Usage: stft-plot-bounds figure1.csv [-o out.png]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import SchemaError, read_csv_columns

COLUMNS = ("L", "W", "known", "blind", "cap_known", "cap_blind")


def plot_bounds(csv_path, output_path=None) -> Path:
    """Render the two-panel bound figure; returns the image path."""
    csv_path = Path(csv_path)
    data = read_csv_columns(csv_path, COLUMNS)
    out = Path(output_path) if output_path else csv_path.with_suffix(".png")

    Ls = sorted(set(data["L"]))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    panels = (("known", "cap_known", "known window"), ("blind", "cap_blind", "unknown window"))
    for ax, (col, cap_col, title) in zip(axes, panels):
        for L in Ls:
            pts = sorted(
                (w, v) for L_i, w, v in zip(data["L"], data["W"], data[col]) if L_i == L
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"L={int(L)}")
        cap = sorted(set(zip(data["W"], data[cap_col])))
        ax.plot([c[0] for c in cap], [c[1] for c in cap], "k--", linewidth=1.2,
                label="parameter cap")
        ax.set_xlabel("window length W")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("measurement count")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="bound-curve CSV (L,W,known,blind,cap_known,cap_blind)")
    ap.add_argument("-o", "--output", default=None, help="image path (default: next to input)")
    args = ap.parse_args(argv)
    try:
        out = plot_bounds(args.csv, args.output)
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}")
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
