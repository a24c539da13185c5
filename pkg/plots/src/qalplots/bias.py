"""Query-class-composition bars per strategy."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import CsvError, load_bias, write_sidecar


def plot_bias(table: dict) -> plt.Figure:
    strategies = sorted(table)
    classes = sorted({name for counts in table.values() for name in counts})
    width = 0.8 / len(classes)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    base = np.arange(len(strategies))
    for k, name in enumerate(classes):
        heights = [table[s].get(name, 0) for s in strategies]
        ax.bar(base + (k - (len(classes) - 1) / 2.0) * width, heights,
               width=width, label=name)
    ax.set_xticks(base)
    ax.set_xticklabels(strategies, rotation=15, ha="right")
    ax.set_ylabel("samples queried")
    ax.legend(title="class")
    fig.tight_layout()
    return fig


def render_bias(csv_path, out_path) -> Path:
    fig = plot_bias(load_bias(csv_path))
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    write_sidecar(out_path, [csv_path])
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render per-strategy class composition of queried samples")
    parser.add_argument("bias_csv")
    parser.add_argument("out_image")
    args = parser.parse_args(argv)
    try:
        out = render_bias(args.bias_csv, args.out_image)
    except (CsvError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
