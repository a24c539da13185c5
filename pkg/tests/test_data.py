"""Dataset generation, labeling, splits, and CSV round-trips."""

import numpy as np
import pytest

from qallab.data import (
    CIRCLE,
    CROSS,
    DRAW,
    LINES,
    N_TERMINAL_BOARDS,
    PHASE,
    Dataset,
    binary_winner_subset,
    board_label,
    donut_label,
    gen_dataset,
    gen_donut,
    gen_ttt,
    load_dataset,
    split,
    write_dataset,
)


def enumerate_terminal_boards():
    """Every board reachable by legal play that ends the game."""
    terminal = set()

    def walk(board, mark):
        for i in [j for j in range(9) if board[j] == 0]:
            board[i] = mark
            if any(all(board[j] == mark for j in line) for line in LINES):
                terminal.add(tuple(board))
            elif 0 not in board:
                terminal.add(tuple(board))
            else:
                walk(board, -mark)
            board[i] = 0

    walk([0] * 9, 1)
    return terminal


class TestDonut:
    def test_label_rule(self):
        assert donut_label(0.0) == 1  # cos(0.58) > 0
        assert donut_label(np.pi / 2) == 0  # cos(pi + 0.58) < 0
        boundary = (np.pi / 2 - PHASE) / 2
        assert donut_label(boundary - 1e-6) == 1
        assert donut_label(boundary + 1e-6) == 0

    def test_seeded_class_counts(self):
        ds = gen_donut(500, 2)
        assert len(ds) == 500
        assert ds.class_counts() == {0: 271, 1: 229}

    def test_regeneration_is_bitwise_identical(self):
        a, b = gen_donut(200, 3), gen_donut(200, 3)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)
        c = gen_donut(200, 4)
        assert not np.array_equal(a.features, c.features)

    def test_labels_consistent_with_coordinates(self):
        # cos(2*theta + phase) is pi-periodic in theta, so the polar angle
        # recovered from (x, y) gives the same label even when the sampled
        # radius came out negative.
        ds = gen_donut(1000, 12)
        theta = np.arctan2(ds.features[:, 1], ds.features[:, 0])
        want = (np.cos(2.0 * theta + PHASE) > 0.0).astype(int)
        assert np.array_equal(ds.labels, want)

    def test_radius_statistics(self):
        ds = gen_donut(20000, 0)
        r = np.linalg.norm(ds.features, axis=1)
        assert abs(np.mean(r) - 0.5) < 0.01
        assert abs(np.std(r) - 0.15) < 0.01

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            gen_donut(0, 1)


class TestBoardLabel:
    def test_row_win(self):
        assert board_label([1, 1, 1, -1, -1, 0, 0, 0, 0]) == CROSS

    def test_column_win(self):
        assert board_label([-1, 1, 0, -1, 1, 0, -1, 0, 1]) == CIRCLE

    def test_diagonal_win(self):
        assert board_label([1, -1, -1, 0, 1, 0, 0, 0, 1]) == CROSS

    def test_draw(self):
        assert board_label([1, 1, -1, -1, -1, 1, 1, -1, 1]) == DRAW

    def test_non_terminal_rejected(self):
        with pytest.raises(ValueError):
            board_label([1, -1, 0, 0, 0, 0, 0, 0, 0])

    def test_two_winners_rejected(self):
        with pytest.raises(ValueError):
            board_label([1, 1, 1, -1, -1, -1, 0, 0, 0])

    def test_bad_cells_rejected(self):
        with pytest.raises(ValueError):
            board_label([2, 0, 0, 0, 0, 0, 0, 0, 0])
        with pytest.raises(ValueError):
            board_label([1, -1])

    def test_symmetry_preserves_winner(self):
        rotate = (6, 3, 0, 7, 4, 1, 8, 5, 2)
        flip = (2, 1, 0, 5, 4, 3, 8, 7, 6)
        boards = gen_ttt(300, 5)
        for g, label in zip(boards.features, boards.labels):
            for perm in (rotate, flip):
                moved = np.empty(9, dtype=int)
                for i, p in enumerate(perm):
                    moved[p] = g[i]
                assert board_label(moved) == label


class TestTttGeneration:
    def test_exhaustive_enumeration(self):
        terminal = enumerate_terminal_boards()
        assert len(terminal) == N_TERMINAL_BOARDS == 958
        from collections import Counter
        counts = Counter(board_label(b) for b in terminal)
        assert counts[CROSS] == 626
        assert counts[CIRCLE] == 316
        assert counts[DRAW] == 16

    def test_full_draw_covers_every_terminal_board(self):
        ds = gen_ttt(958, 3)
        assert set(map(tuple, ds.features.tolist())) == enumerate_terminal_boards()

    def test_seeded_class_counts(self):
        ds = gen_ttt(500, 51)
        assert ds.class_counts() == {CIRCLE: 175, DRAW: 16, CROSS: 309}

    def test_boards_are_distinct(self):
        ds = gen_ttt(400, 9)
        assert len(set(map(tuple, ds.features.tolist()))) == 400

    def test_regeneration_is_identical(self):
        a, b = gen_ttt(100, 2), gen_ttt(100, 2)
        assert np.array_equal(a.features, b.features)

    def test_oversized_request_rejected(self):
        with pytest.raises(ValueError):
            gen_ttt(959, 0)


class TestBinarySubset:
    def test_drops_draws_and_relabels(self):
        ds = gen_ttt(500, 51)
        sub = binary_winner_subset(ds)
        assert len(sub) == 500 - 16
        assert set(np.unique(sub.labels)) == {0, 1}
        assert np.sum(sub.labels == 1) == 309  # crosses
        assert np.sum(sub.labels == 0) == 175  # circles
        for g, y in zip(sub.features[:50], sub.labels[:50]):
            assert board_label(g) == (CROSS if y == 1 else CIRCLE)

    def test_rejects_wrong_task(self):
        with pytest.raises(ValueError):
            binary_winner_subset(gen_donut(10, 0))


class TestSplit:
    def test_three_one_one_sizes(self):
        ds = gen_donut(500, 7)
        sp = split(ds, 3)
        assert len(sp.pool) == 300
        assert len(sp.validation) == 100
        assert len(sp.test) == 100

    def test_partition_is_disjoint_and_complete(self):
        ds = gen_ttt(500, 11)
        sp = split(ds, 1)
        all_idx = np.concatenate([sp.pool, sp.validation, sp.test])
        assert sorted(all_idx.tolist()) == list(range(500))

    def test_remainder_goes_to_pool(self):
        ds = gen_donut(7, 0)
        sp = split(ds, 0)
        assert len(sp.pool) == 5
        assert len(sp.validation) == 1
        assert len(sp.test) == 1

    def test_deterministic_per_seed(self):
        ds = gen_donut(100, 1)
        assert np.array_equal(split(ds, 5).pool, split(ds, 5).pool)
        assert not np.array_equal(split(ds, 5).pool, split(ds, 6).pool)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            split(gen_donut(4, 0), 0)


class TestSerialization:
    def test_donut_round_trip_exact(self, tmp_path):
        ds = gen_donut(50, 8)
        csv_path, manifest_path = write_dataset(ds, tmp_path)
        back = load_dataset(csv_path)
        assert back.task == "donut"
        assert np.array_equal(back.features, ds.features)  # repr round-trip
        assert np.array_equal(back.labels, ds.labels)
        assert back.seed == 8
        assert manifest_path.exists()

    def test_ttt_round_trip(self, tmp_path):
        ds = gen_ttt(40, 4)
        csv_path, _ = write_dataset(ds, tmp_path)
        back = load_dataset(csv_path)
        assert back.task == "ttt"
        assert np.array_equal(back.features, ds.features)
        assert back.features.dtype == np.int64

    def test_written_bytes_are_stable(self, tmp_path):
        ds = gen_donut(30, 2)
        p1, _ = write_dataset(ds, tmp_path / "a")
        p2, _ = write_dataset(ds, tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()
        assert b"\r" not in p1.read_bytes()

    def test_header_mismatch_rejected(self, tmp_path):
        bad = tmp_path / "donut.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            load_dataset(bad)

    def test_missing_manifest_leaves_seed_unknown(self, tmp_path):
        ds = gen_donut(10, 5)
        csv_path, manifest_path = write_dataset(ds, tmp_path)
        manifest_path.unlink()
        assert load_dataset(csv_path).seed == -1


class TestGenDispatch:
    def test_tasks(self):
        assert gen_dataset("donut", 10, 0).task == "donut"
        assert gen_dataset("ttt", 10, 0).task == "ttt"
        with pytest.raises(ValueError):
            gen_dataset("spiral", 10, 0)
