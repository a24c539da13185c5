"""Deterministic dataset generation, labeling, splitting, serialization.

Two tasks ship: a ring of points labeled by the sign of a rotated cosine of
the polar angle, and terminal tic-tac-toe boards labeled by the winner.
Generation draws only uniform variates from a seeded PCG64 stream and maps
them through deterministic transforms, so a (task, n, seed) triple pins the
dataset bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CIRCLE, DRAW, CROSS = 0, 1, 2
TTT_CLASS_NAMES = ("circle", "draw", "cross")

GENERATOR_NAME = "pcg64"
PHASE = 0.58
RADIUS_MEAN = 0.5
RADIUS_STD = 0.15

# all 8 winning lines of the 3x3 grid, row-major cells
LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8),
         (0, 3, 6), (1, 4, 7), (2, 5, 8),
         (0, 4, 8), (2, 4, 6))

N_TERMINAL_BOARDS = 958  # distinct end positions reachable by legal play


@dataclass(frozen=True)
class Dataset:
    task: str  # "donut" | "ttt"
    features: np.ndarray
    labels: np.ndarray
    seed: int

    def __len__(self) -> int:
        return len(self.labels)

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


@dataclass(frozen=True)
class SplitDataset:
    pool: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int


def donut_label(theta: float) -> int:
    return 1 if np.cos(2.0 * theta + PHASE) > 0.0 else 0


def gen_donut(n: int, seed: int) -> Dataset:
    """Points at Gaussian radius around a ring, labeled by polar angle.

    The radius uses a Box-Muller transform of two uniforms so the stream
    consumes exactly three uniforms per sample; the generation-time angle
    labels the sample even when the sampled radius is negative.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random((n, 3))
    z = np.sqrt(-2.0 * np.log(1.0 - u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])
    r = RADIUS_MEAN + RADIUS_STD * z
    theta = 2.0 * np.pi * u[:, 2]
    features = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    labels = (np.cos(2.0 * theta + PHASE) > 0.0).astype(np.int64)
    return Dataset("donut", features, labels, seed)


def board_label(g) -> int:
    """Winner of a terminal board: circle 0, draw 1, cross 2."""
    g = np.asarray(g, dtype=int)
    if g.shape != (9,) or not np.all(np.isin(g, (-1, 0, 1))):
        raise ValueError("board must be 9 cells of -1/0/+1")
    cross = any(all(g[i] == 1 for i in line) for line in LINES)
    circle = any(all(g[i] == -1 for i in line) for line in LINES)
    if cross and circle:
        raise ValueError("board has two winners")
    if cross:
        return CROSS
    if circle:
        return CIRCLE
    if np.any(g == 0):
        raise ValueError("board is not terminal")
    return DRAW


def _play_game(rng: np.random.Generator) -> tuple[int, ...]:
    board = [0] * 9
    mark = 1  # crosses move first
    for _ in range(9):
        empty = [i for i in range(9) if board[i] == 0]
        board[empty[rng.integers(len(empty))]] = mark
        won = any(all(board[i] == mark for i in line) for line in LINES)
        if won:
            return tuple(board)
        mark = -mark
    return tuple(board)


def gen_ttt(n: int, seed: int) -> Dataset:
    """Distinct terminal boards from uniformly random legal play."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > N_TERMINAL_BOARDS:
        raise ValueError(f"only {N_TERMINAL_BOARDS} distinct terminal boards exist")
    rng = np.random.default_rng(seed)
    seen: set[tuple[int, ...]] = set()
    boards: list[tuple[int, ...]] = []
    while len(boards) < n:
        final = _play_game(rng)
        if final not in seen:
            seen.add(final)
            boards.append(final)
    features = np.array(boards, dtype=np.int64)
    labels = np.array([board_label(b) for b in boards], dtype=np.int64)
    return Dataset("ttt", features, labels, seed)


def split(dataset: Dataset, seed: int) -> SplitDataset:
    """Random permutation sliced 3:1:1 into pool/validation/test.

    Sizes are floor-based with the remainder going to the pool.
    """
    n = len(dataset)
    if n < 5:
        raise ValueError("need at least 5 samples to split 3:1:1")
    unit = n // 5
    perm = np.random.default_rng(seed).permutation(n)
    pool = perm[: n - 2 * unit]
    validation = perm[n - 2 * unit: n - unit]
    test = perm[n - unit:]
    return SplitDataset(pool, validation, test, seed)


# --------------------------------------------------------------------------
# Serialization: CSV with a JSON manifest, UTF-8, LF line endings
# --------------------------------------------------------------------------

def _header(task: str) -> list[str]:
    if task == "donut":
        return ["x0", "x1", "label"]
    return [f"g{i}" for i in range(9)] + ["label"]


def write_dataset(dataset: Dataset, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{dataset.task}.csv"
    lines = [",".join(_header(dataset.task))]
    for row, label in zip(dataset.features, dataset.labels):
        if dataset.task == "donut":
            cells = [repr(float(v)) for v in row]
        else:
            cells = [str(int(v)) for v in row]
        cells.append(str(int(label)))
        lines.append(",".join(cells))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    manifest = {
        "task": dataset.task,
        "n": len(dataset),
        "seed": dataset.seed,
        "generator": GENERATOR_NAME,
        "class_counts": {str(k): v for k, v in sorted(dataset.class_counts().items())},
    }
    manifest_path = out_dir / f"{dataset.task}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8", newline="\n")
    return csv_path, manifest_path


def load_dataset(csv_path) -> Dataset:
    csv_path = Path(csv_path)
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{csv_path} is empty")
    header = lines[0].split(",")
    task = "donut" if header[:2] == ["x0", "x1"] else "ttt"
    if header != _header(task):
        raise ValueError(f"unrecognized header in {csv_path}: {lines[0]!r}")
    rows = [line.split(",") for line in lines[1:] if line]
    dtype = float if task == "donut" else np.int64
    features = np.array([[dtype(c) for c in row[:-1]] for row in rows])
    labels = np.array([int(row[-1]) for row in rows], dtype=np.int64)
    seed = -1
    manifest_path = csv_path.parent / f"{csv_path.stem}.manifest.json"
    if manifest_path.exists():
        seed = json.loads(manifest_path.read_text(encoding="utf-8")).get("seed", -1)
    return Dataset(task, features, labels, seed)


def gen_dataset(task: str, n: int, seed: int) -> Dataset:
    if task == "donut":
        return gen_donut(n, seed)
    if task == "ttt":
        return gen_ttt(n, seed)
    raise ValueError(f"unknown task {task!r}")


def binary_winner_subset(dataset: Dataset) -> Dataset:
    """Boards with a decided winner, relabeled circle 0 / cross 1."""
    if dataset.task != "ttt":
        raise ValueError("binary subset applies to board datasets")
    keep = dataset.labels != DRAW
    labels = (dataset.labels[keep] == CROSS).astype(np.int64)
    return Dataset("ttt_binary", dataset.features[keep], labels, dataset.seed)
