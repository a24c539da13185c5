"""Renderer and loader checks against shipped samples and synthetic files."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import pytest

from qalplots import (CsvError, check_antipodal, load_bias, load_curves,
                      load_grid, load_queries, render_bias, render_boundary,
                      render_curves)
from qalplots.bias import main as bias_main
from qalplots.boundary import main as boundary_main
from qalplots.curves import main as curves_main

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# --------------------------------------------------------------------------
# Curve file loading
# --------------------------------------------------------------------------

def test_load_curves_shipped_sample():
    curves = load_curves(SAMPLES / "curves_ring.csv")
    assert len(curves) == 3
    for c in curves.values():
        assert c["query_idx"][0] == 0
        assert np.all(np.diff(c["query_idx"]) == 1)
        assert np.all((0.0 <= c["mean_acc"]) & (c["mean_acc"] <= 1.0))
        assert np.all(c["std_acc"] >= 0.0)


def test_load_curves_reports_bad_row(tmp_path):
    p = write(tmp_path, "bad.csv",
              "strategy,query_idx,mean_acc,std_acc,n_seeds\n"
              "RANDOM,0,0.5,0.1,4\n"
              "RANDOM,1,oops,0.1,4\n")
    with pytest.raises(CsvError) as err:
        load_curves(p)
    assert err.value.row == 3
    assert "oops" in str(err.value)


def test_load_curves_rejects_gap_in_query_indices(tmp_path):
    p = write(tmp_path, "gap.csv",
              "strategy,query_idx,mean_acc,std_acc,n_seeds\n"
              "RANDOM,0,0.5,0.1,4\n"
              "RANDOM,2,0.6,0.1,4\n")
    with pytest.raises(CsvError, match="not contiguous"):
        load_curves(p)


def test_load_curves_rejects_out_of_range_mean(tmp_path):
    p = write(tmp_path, "range.csv",
              "strategy,query_idx,mean_acc,std_acc,n_seeds\n"
              "RANDOM,0,1.5,0.1,4\n")
    with pytest.raises(CsvError, match="outside"):
        load_curves(p)


def test_load_curves_rejects_empty_and_headerless(tmp_path):
    header_only = write(tmp_path, "empty.csv",
                        "strategy,query_idx,mean_acc,std_acc,n_seeds\n")
    with pytest.raises(CsvError, match="no data rows"):
        load_curves(header_only)
    wrong = write(tmp_path, "wrong.csv", "a,b\n1,2\n")
    with pytest.raises(CsvError, match="header"):
        load_curves(wrong)


# --------------------------------------------------------------------------
# Grid loading and the sign-symmetry check
# --------------------------------------------------------------------------

def test_load_grid_shipped_sample_is_rectangular():
    xs, ys, grid = load_grid(SAMPLES / "boundary_grid.csv")
    assert grid.shape == (len(ys), len(xs))
    assert np.all((0.0 <= grid) & (grid <= 1.0))


def test_shipped_grid_is_antipodal():
    xs, ys, grid = load_grid(SAMPLES / "boundary_grid.csv")
    assert check_antipodal(xs, ys, grid, tol=1e-9) <= 1e-9


def test_antipodal_check_rejects_broken_grid():
    xs, ys, grid = load_grid(SAMPLES / "boundary_grid.csv")
    grid = grid.copy()
    grid[0, 0] += 0.2
    with pytest.raises(ValueError, match="not antipodal"):
        check_antipodal(xs, ys, grid)


def test_load_grid_rejects_ragged_lattice(tmp_path):
    p = write(tmp_path, "ragged.csv",
              "x0,x1,p1\n0.0,0.0,0.5\n1.0,0.0,0.5\n0.0,1.0,0.5\n")
    with pytest.raises(CsvError, match="lattice"):
        load_grid(p)


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------

def test_render_curves_writes_image_and_sidecar(tmp_path):
    out = render_curves(SAMPLES / "curves_ring.csv", tmp_path / "curves.png")
    assert out.stat().st_size > 0
    sidecar = Path(str(out) + ".sha256")
    digest = hashlib.sha256((SAMPLES / "curves_ring.csv").read_bytes()).hexdigest()
    assert sidecar.read_text() == f"{digest}  curves_ring.csv\n"


def test_render_boundary_with_queries(tmp_path):
    out = render_boundary(SAMPLES / "boundary_grid.csv", tmp_path / "b.png",
                          SAMPLES / "queries_ring.csv", check_sign_symmetry=True)
    assert out.stat().st_size > 0
    assert len(Path(str(out) + ".sha256").read_text().splitlines()) == 2


def test_render_boundary_without_queries(tmp_path):
    out = render_boundary(SAMPLES / "boundary_grid.csv", tmp_path / "plain.png")
    assert out.stat().st_size > 0


def test_render_boundary_constant_half_grid(tmp_path):
    rows = ["x0,x1,p1"]
    for x in (-1.0, 0.0, 1.0):
        for y in (-1.0, 0.0, 1.0):
            rows.append(f"{x},{y},0.5")
    p = write(tmp_path, "flat.csv", "\n".join(rows) + "\n")
    out = render_boundary(p, tmp_path / "flat.png", check_sign_symmetry=True)
    assert out.stat().st_size > 0


def test_render_bias_shipped_sample(tmp_path):
    out = render_bias(SAMPLES / "bias_board.csv", tmp_path / "bias.png")
    assert out.stat().st_size > 0


def test_queries_loader_sorts_by_query_index():
    queries = load_queries(SAMPLES / "queries_ring.csv")
    idx = [q[0] for q in queries]
    assert idx == sorted(idx)


def test_bias_loader_counts_nonnegative():
    table = load_bias(SAMPLES / "bias_board.csv")
    assert table
    for counts in table.values():
        assert all(v >= 0 for v in counts.values())


# --------------------------------------------------------------------------
# Command line entry points
# --------------------------------------------------------------------------

def test_cli_curves_success_and_failure(tmp_path, capsys):
    assert curves_main([str(SAMPLES / "curves_ring.csv"),
                        str(tmp_path / "ok.png")]) == 0
    bad = write(tmp_path, "bad.csv",
                "strategy,query_idx,mean_acc,std_acc,n_seeds\nR,0,x,0,1\n")
    assert curves_main([str(bad), str(tmp_path / "no.png")]) == 1
    assert not (tmp_path / "no.png").exists()
    assert "bad.csv:2" in capsys.readouterr().err


def test_cli_boundary_antipodal_flag(tmp_path, capsys):
    args = [str(SAMPLES / "boundary_grid.csv"), str(tmp_path / "b.png"),
            "--check-antipodal"]
    assert boundary_main(args) == 0
    # perturb one corner: the flagged run must now fail before rendering
    xs, ys, grid = load_grid(SAMPLES / "boundary_grid.csv")
    rows = ["x0,x1,p1"]
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            p = grid[j, i] + (0.1 if (i == j == 0) else 0.0)
            rows.append(f"{float(x)!r},{float(y)!r},{float(p)!r}")
    broken = write(tmp_path, "broken.csv", "\n".join(rows) + "\n")
    assert boundary_main([str(broken), str(tmp_path / "nope.png"),
                          "--check-antipodal"]) == 1
    assert "not antipodal" in capsys.readouterr().err


def test_cli_bias_success(tmp_path):
    assert bias_main([str(SAMPLES / "bias_board.csv"),
                      str(tmp_path / "bias.png")]) == 0
