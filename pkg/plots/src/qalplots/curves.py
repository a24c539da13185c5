"""Accuracy-vs-queries curves with one-sigma bands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import CsvError, load_curves, write_sidecar


def plot_curves(curves: dict) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for strategy in sorted(curves):
        c = curves[strategy]
        ax.plot(c["query_idx"], c["mean_acc"], marker="o", markersize=3,
                label=strategy)
        ax.fill_between(c["query_idx"], c["mean_acc"] - c["std_acc"],
                        c["mean_acc"] + c["std_acc"], alpha=0.2)
    ax.set_xlabel("labels queried")
    ax.set_ylabel("mean correct rate")
    ax.set_ylim(0.0, 1.0)
    ax.legend()
    fig.tight_layout()
    return fig


def render_curves(csv_path, out_path) -> Path:
    fig = plot_curves(load_curves(csv_path))
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    write_sidecar(out_path, [csv_path])
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render mean-accuracy-vs-queries curves from a tidy CSV")
    parser.add_argument("curve_csv")
    parser.add_argument("out_image")
    args = parser.parse_args(argv)
    try:
        out = render_curves(args.curve_csv, args.out_image)
    except (CsvError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
