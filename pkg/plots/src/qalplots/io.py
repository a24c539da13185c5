"""CSV loading, validation, and checksum sidecars.

The renderers draw exactly what the benchmark exported; every loader
validates its file against the published column contract and reports the
offending row number on failure.  A `.sha256` sidecar written next to each
image records the digests of the inputs it was rendered from.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

CURVE_HEADER = ["strategy", "query_idx", "mean_acc", "std_acc", "n_seeds"]
GRID_HEADER = ["x0", "x1", "p1"]
QUERY_HEADER = ["query_idx", "sample_id", "x0", "x1", "label"]
BIAS_HEADER = ["strategy", "class_name", "n_queried"]


class CsvError(ValueError):
    """Malformed input file; `row` is the 1-based line number."""

    def __init__(self, path, row: int, message: str):
        self.path = Path(path)
        self.row = row
        super().__init__(f"{self.path}:{row}: {message}")


def _read_rows(path, header: list[str]) -> list[list[str]]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CsvError(path, 1, "empty file")
    got = lines[0].split(",")
    if got != header:
        raise CsvError(path, 1, f"expected header {','.join(header)!r}, got {lines[0]!r}")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise CsvError(path, i, f"expected {len(header)} columns, got {len(cells)}")
        rows.append(cells)
    if not rows:
        raise CsvError(path, 1, "no data rows")
    return rows


def _parse(path, row_no: int, cell: str, kind, what: str):
    try:
        return kind(cell)
    except ValueError:
        raise CsvError(path, row_no, f"bad {what} {cell!r}") from None


def load_curves(path) -> dict[str, dict[str, np.ndarray]]:
    """Per-strategy arrays (query_idx, mean_acc, std_acc, n_seeds), validated.

    query_idx must be contiguous from 0 within each strategy; means must lie
    in [0, 1] and standard deviations must be nonnegative.
    """
    table: dict[str, list[tuple]] = {}
    for i, cells in enumerate(_read_rows(path, CURVE_HEADER), start=0):
        row_no = i + 2
        strategy = cells[0]
        q = _parse(path, row_no, cells[1], int, "query index")
        mean = _parse(path, row_no, cells[2], float, "mean accuracy")
        std = _parse(path, row_no, cells[3], float, "std")
        n = _parse(path, row_no, cells[4], int, "seed count")
        if not 0.0 <= mean <= 1.0:
            raise CsvError(path, row_no, f"mean accuracy {mean} outside [0, 1]")
        if std < 0.0:
            raise CsvError(path, row_no, f"negative std {std}")
        table.setdefault(strategy, []).append((q, mean, std, n))
    out = {}
    for strategy, rows in table.items():
        rows.sort()
        qs = [r[0] for r in rows]
        if qs != list(range(len(qs))):
            raise CsvError(Path(path), 1,
                           f"strategy {strategy!r} query indices {qs} not contiguous from 0")
        arr = np.array(rows, dtype=float)
        out[strategy] = {"query_idx": arr[:, 0].astype(int), "mean_acc": arr[:, 1],
                         "std_acc": arr[:, 2], "n_seeds": arr[:, 3].astype(int)}
    return out


def load_grid(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rectangular probability lattice as (x axis, y axis, P[yi, xi])."""
    pts = []
    for i, cells in enumerate(_read_rows(path, GRID_HEADER), start=2):
        x = _parse(path, i, cells[0], float, "x0")
        y = _parse(path, i, cells[1], float, "x1")
        p = _parse(path, i, cells[2], float, "probability")
        pts.append((x, y, p))
    xs = np.array(sorted({p[0] for p in pts}))
    ys = np.array(sorted({p[1] for p in pts}))
    if len(pts) != len(xs) * len(ys):
        raise CsvError(Path(path), 1,
                       f"{len(pts)} points do not fill a {len(xs)}x{len(ys)} lattice")
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {v: k for k, v in enumerate(xs)}
    yi = {v: k for k, v in enumerate(ys)}
    for x, y, p in pts:
        grid[yi[y], xi[x]] = p
    if np.isnan(grid).any():
        raise CsvError(Path(path), 1, "duplicate lattice points leave holes")
    return xs, ys, grid


def check_antipodal(xs: np.ndarray, ys: np.ndarray, grid: np.ndarray,
                    tol: float = 1e-9) -> float:
    """Largest |P(x) - P(-x)| over the lattice; raises if not sign-symmetric."""
    if not (np.allclose(xs, -xs[::-1]) and np.allclose(ys, -ys[::-1])):
        raise ValueError("lattice axes are not symmetric about the origin")
    dev = float(np.abs(grid - grid[::-1, ::-1]).max())
    if dev > tol:
        raise ValueError(f"grid is not antipodal: max |P(x)-P(-x)| = {dev:.3e}")
    return dev


def load_queries(path) -> list[tuple[int, int, float, float, int]]:
    out = []
    for i, cells in enumerate(_read_rows(path, QUERY_HEADER), start=2):
        out.append((_parse(path, i, cells[0], int, "query index"),
                    _parse(path, i, cells[1], int, "sample id"),
                    _parse(path, i, cells[2], float, "x0"),
                    _parse(path, i, cells[3], float, "x1"),
                    _parse(path, i, cells[4], int, "label")))
    return sorted(out)


def load_bias(path) -> dict[str, dict[str, int]]:
    table: dict[str, dict[str, int]] = {}
    for i, cells in enumerate(_read_rows(path, BIAS_HEADER), start=2):
        count = _parse(path, i, cells[2], int, "count")
        if count < 0:
            raise CsvError(path, i, f"negative count {count}")
        table.setdefault(cells[0], {})[cells[1]] = count
    return table


def write_sidecar(out_image, inputs) -> Path:
    """Record sha256 digests of the rendered inputs next to the image."""
    lines = []
    for p in inputs:
        p = Path(p)
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        lines.append(f"{digest}  {p.name}")
    sidecar = Path(str(out_image) + ".sha256")
    sidecar.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return sidecar
