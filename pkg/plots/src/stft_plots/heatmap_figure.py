"""Success-rate / iteration-count heatmap over the (L, W) grid for one K.

Usage: stft-plot-heatmap figure4.csv --K 8 [--column success_rate] [-o out.png]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_csv_columns

BASE_COLUMNS = ("K", "L", "W")


def plot_heatmap(csv_path, K, column="success_rate", output_path=None,
                 vmin=None, vmax=None) -> Path:
    """Render a W-by-L heatmap of `column` at the given K; returns the path."""
    csv_path = Path(csv_path)
    data = read_csv_columns(csv_path, BASE_COLUMNS + (column,))
    rows = [
        (L, W, v)
        for k, L, W, v in zip(data["K"], data["L"], data["W"], data[column])
        if k == float(K)
    ]
    if not rows:
        raise SchemaError(f"K={K} not present in {csv_path}")
    out = Path(output_path) if output_path else csv_path.with_name(
        f"{csv_path.stem}_K{int(K)}_{column}.png"
    )

    Ls = sorted({r[0] for r in rows})
    Ws = sorted({r[1] for r in rows})
    grid = np.full((len(Ws), len(Ls)), np.nan)
    for L, W, v in rows:
        grid[Ws.index(W), Ls.index(L)] = v

    if column == "success_rate":
        vmin = 0.0 if vmin is None else vmin
        vmax = 1.0 if vmax is None else vmax

    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis",
                   vmin=vmin, vmax=vmax,
                   extent=(min(Ls) - 0.5, max(Ls) + 0.5, min(Ws) - 0.5, max(Ws) + 0.5))
    ax.set_xticks(Ls)
    ax.set_yticks(Ws)
    ax.set_xlabel("step length L")
    ax.set_ylabel("window length W")
    ax.set_title(f"{column} (K={int(K)})")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(out, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="grid CSV (K,L,W,success_rate,mean_iterations,...)")
    ap.add_argument("--K", type=int, required=True)
    ap.add_argument("--column", default="success_rate")
    ap.add_argument("-o", "--output", default=None)
    ap.add_argument("--vmin", type=float, default=None)
    ap.add_argument("--vmax", type=float, default=None)
    args = ap.parse_args(argv)
    try:
        out = plot_heatmap(args.csv, args.K, args.column, args.output, args.vmin, args.vmax)
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}")
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
