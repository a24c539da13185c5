"""Decision-boundary heatmap with numbered query markers."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import CsvError, check_antipodal, load_grid, load_queries, write_sidecar


def plot_boundary(xs, ys, grid, queries=()) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    mesh = ax.pcolormesh(xs, ys, grid, cmap="RdBu_r", vmin=0.0, vmax=1.0,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label="P(class 1)")
    if grid.min() < 0.5 < grid.max():
        ax.contour(xs, ys, grid, levels=[0.5], colors="k", linewidths=1.2)
    for q, _, x, y, _ in queries:
        ax.plot([x], [y], marker="x", color="k", markersize=7)
        ax.annotate(str(q), (x, y), textcoords="offset points", xytext=(4, 4),
                    fontsize=8)
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    ax.set_aspect("equal")
    fig.tight_layout()
    return fig


def render_boundary(grid_path, out_path, queries_path=None,
                    check_sign_symmetry: bool = False, tol: float = 1e-9) -> Path:
    xs, ys, grid = load_grid(grid_path)
    if check_sign_symmetry:
        check_antipodal(xs, ys, grid, tol)
    queries = load_queries(queries_path) if queries_path else ()
    fig = plot_boundary(xs, ys, grid, queries)
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    inputs = [grid_path] + ([queries_path] if queries_path else [])
    write_sidecar(out_path, inputs)
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render a probability heatmap with 0.5 contour and query markers")
    parser.add_argument("grid_csv")
    parser.add_argument("out_image")
    parser.add_argument("--queries", default=None, help="queried-sample CSV overlay")
    parser.add_argument("--check-antipodal", action="store_true",
                        help="require P(x) = P(-x) on the lattice before rendering")
    parser.add_argument("--tol", type=float, default=1e-9)
    args = parser.parse_args(argv)
    try:
        out = render_boundary(args.grid_csv, args.out_image, args.queries,
                              check_sign_symmetry=args.check_antipodal, tol=args.tol)
    except (CsvError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
