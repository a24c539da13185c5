"""Experiment presets, multi-seed runners, and deterministic result files.

A preset pins every protocol constant (model, dataset, split seed, epochs,
strategies, budget), so a (preset, master_seed) pair reproduces its output
files byte for byte.  Grid cells run in a worker pool; results are sorted
before writing so worker scheduling cannot leak into the bytes.

Full-label runs write `<name>.csv` with one row per (seed, model); query
campaigns write one row per (seed, strategy, query_idx).  Each CSV gets a
sibling `<name>.summary.json` whose aggregates are recomputable from the
rows.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models as mdl
from .active import CampaignConfig, StrategyKind, run_campaign
from .autodiff import fit
from .data import Dataset, binary_winner_subset, load_dataset, split
from .symmetry import check_circuit_equivariance, d4_perm, z2_zz

SPLIT_SEED = 3
DONUT_SEED = 2
TTT_SEED = 51
DATASET_SIZE = 500
DEFAULT_SEEDS = 40
FAST_SEEDS = 10

DONUT_EPOCHS = 100
TTT_EPOCHS = 200
DONUT_BUDGET = 30
TTT_BUDGET = 20
GRID_RESOLUTION = 61

FULL_HEADER = ["seed", "model", "test_acc", "val_acc", "best_epoch"]
AL_HEADER = ["seed", "strategy", "query_idx", "sample_id", "test_acc", "val_acc"]
CURVE_HEADER = ["strategy", "query_idx", "mean_acc", "std_acc", "n_seeds"]


@dataclass(frozen=True)
class FullLabelArm:
    model_spec: mdl.ModelSpec
    epochs: int
    update_mode: str = "full_batch"
    shuffle: bool = False  # per-epoch revisit-order reshuffle (per_sample only)


@dataclass(frozen=True)
class AlArm:
    model_spec: mdl.ModelSpec
    strategy: StrategyKind
    budget: int
    oracle_init: bool = False


@dataclass(frozen=True)
class Preset:
    name: str
    task: str  # "donut" | "ttt" | "ttt_binary"
    full_arms: tuple[FullLabelArm, ...] = ()
    al_arms: tuple[AlArm, ...] = ()
    epochs_per_round: int = 50
    warm_start: bool = True  # False: refit from the round-0 init each round


def _donut_models():
    return mdl.ModelSpec("eqnn_z", depth=3), mdl.ModelSpec("hea", depth=6)


def _ttt_model(binary: bool = False):
    family = "ttt_eqnn_binary" if binary else "ttt_eqnn"
    return mdl.ModelSpec(family, depth=5, layers=2)


def _build_presets() -> dict[str, Preset]:
    eqnnz, hea = _donut_models()
    donut_strategies = (StrategyKind("RANDOM"), StrategyKind("LEAST_CONFIDENCE"),
                        StrategyKind("FIDELITY", lam=0.1))
    presets = [
        Preset("donut_full", "donut", full_arms=(
            FullLabelArm(eqnnz, DONUT_EPOCHS, "per_sample"),
            FullLabelArm(hea, DONUT_EPOCHS, "per_sample"),
        )),
        Preset("ttt_full", "ttt", full_arms=(
            FullLabelArm(_ttt_model(), TTT_EPOCHS),
        )),
        # Restart-mode refits with a small per-round budget: uncertainty picks
        # concentrate near the decision boundary and converge quickly, while
        # random picks leave the fit short of saturation at equal label cost.
        Preset("donut_al", "donut", al_arms=tuple(
            AlArm(spec, strat, DONUT_BUDGET)
            for spec in (eqnnz, hea) for strat in donut_strategies
        ), epochs_per_round=10, warm_start=False),
        Preset("ttt_al", "ttt", al_arms=(
            AlArm(_ttt_model(), StrategyKind("RANDOM"), TTT_BUDGET),
            AlArm(_ttt_model(), StrategyKind("ENTROPY"), TTT_BUDGET),
        )),
        Preset("ttt_al_oracle", "ttt", al_arms=(
            AlArm(_ttt_model(), StrategyKind("ENTROPY"), TTT_BUDGET, oracle_init=True),
        )),
        # Same restart-mode rationale as donut_al: under warm refits both arms
        # saturate together and the uncertainty advantage washes out.
        Preset("ttt_binary_al", "ttt_binary", al_arms=(
            AlArm(_ttt_model(binary=True), StrategyKind("RANDOM"), TTT_BUDGET),
            AlArm(_ttt_model(binary=True), StrategyKind("LEAST_CONFIDENCE"), TTT_BUDGET),
        ), warm_start=False),
        Preset("symmetry_report", "donut"),
    ]
    return {p.name: p for p in presets}


PRESETS = _build_presets()


def resolve_workers(flag: int | None) -> int:
    env = os.environ.get("QALLAB_THREADS")
    if env:
        return max(1, int(env))
    if flag:
        return max(1, int(flag))
    return os.cpu_count() or 1


def load_task_dataset(task: str, data_dir) -> tuple[Dataset, "np.ndarray"]:
    """Dataset plus its 3:1:1 split for one task name."""
    data_dir = Path(data_dir)
    base = "donut" if task == "donut" else "ttt"
    csv_path = data_dir / f"{base}.csv"
    if not csv_path.exists():
        raise FileNotFoundError(
            f"{csv_path} not found; run `qallab gen-data --task {base} "
            f"--n {DATASET_SIZE} --seed {DONUT_SEED if base == 'donut' else TTT_SEED} "
            f"--out {data_dir}` first")
    dataset = load_dataset(csv_path)
    if task == "ttt_binary":
        dataset = binary_winner_subset(dataset)
    return dataset, split(dataset, SPLIT_SEED)


# --------------------------------------------------------------------------
# Cell runners (module-level so worker processes can pickle them)
# --------------------------------------------------------------------------

def _run_full_cell(args):
    arm, dataset_csv, task, seed, master_seed = args
    dataset, splits = load_task_dataset(task, Path(dataset_csv).parent)
    model = mdl.build(arm.model_spec)
    features = np.asarray(dataset.features, dtype=float)
    labels = dataset.labels
    x, t = features[splits.pool], mdl.targets_for(model, labels[splits.pool])
    val_x, val_y = features[splits.validation], labels[splits.validation]
    test_x, test_y = features[splits.test], labels[splits.test]
    stream = np.random.default_rng((master_seed, seed, 0))
    params0 = mdl.init_params(model, stream)
    result = fit(model.circuit, model.observables, params0, x, t, model.loss,
                 arm.epochs, lambda p: mdl.accuracy(model, p, val_x, val_y),
                 update_mode=arm.update_mode,
                 rng=stream if arm.shuffle else None)
    test_acc = mdl.accuracy(model, result.params, test_x, test_y)
    return (seed, model.name, test_acc, result.val_acc, result.best_epoch)


def _run_al_cell(args):
    arm, dataset_csv, task, seed, master_seed, epochs_per_round, warm_start = args
    dataset, splits = load_task_dataset(task, Path(dataset_csv).parent)
    config = CampaignConfig(arm.model_spec, arm.strategy, arm.budget,
                            epochs_per_round=epochs_per_round,
                            warm_start=warm_start,
                            oracle_init=arm.oracle_init)
    records = run_campaign(config, dataset, splits, seed, master_seed)
    model_name = mdl.build(arm.model_spec).name
    label = arm.strategy.kind + ("_ORACLE" if arm.oracle_init else "")
    return [(seed, model_name, label, r.query_idx, r.sample_id, r.test_acc, r.val_acc)
            for r in records]


def _map_cells(fn, cells, workers: int):
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


# --------------------------------------------------------------------------
# Result files
# --------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8", newline="\n")
    return path


def _mean_std(values) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std()), "n": int(arr.size)}


def run_full_label(preset_name: str, data_dir, out_dir, seeds: int = DEFAULT_SEEDS,
                   master_seed: int = 0, workers: int | None = None) -> dict:
    preset = PRESETS[preset_name]
    if not preset.full_arms:
        raise ValueError(f"preset {preset_name!r} has no full-label arms")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = Path(data_dir) / ("donut.csv" if preset.task == "donut" else "ttt.csv")
    cells = [(arm, str(csv_path), preset.task, seed, master_seed)
             for arm in preset.full_arms for seed in range(seeds)]
    rows = _map_cells(_run_full_cell, cells, resolve_workers(workers))
    rows.sort(key=lambda r: (r[1], r[0]))
    write_csv(out_dir / f"{preset_name}.csv", FULL_HEADER, rows)

    summary: dict = {"preset": preset_name, "master_seed": master_seed, "models": {}}
    for arm in preset.full_arms:
        name = mdl.build(arm.model_spec).name
        sub = [r for r in rows if r[1] == name]
        summary["models"][name] = {
            "test_acc": _mean_std([r[2] for r in sub]),
            "val_acc": _mean_std([r[3] for r in sub]),
            "epochs_to_best": _mean_std([r[4] for r in sub]),
        }
    write_json(out_dir / f"{preset_name}.summary.json", summary)
    return summary


def run_al_suite(preset_name: str, data_dir, out_dir, seeds: int = DEFAULT_SEEDS,
                 master_seed: int = 0, workers: int | None = None) -> dict:
    preset = PRESETS[preset_name]
    if not preset.al_arms:
        raise ValueError(f"preset {preset_name!r} has no query campaigns")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = "donut.csv" if preset.task == "donut" else "ttt.csv"
    csv_path = Path(data_dir) / base
    cells = [(arm, str(csv_path), preset.task, seed, master_seed,
              preset.epochs_per_round, preset.warm_start)
             for arm in preset.al_arms for seed in range(seeds)]
    nested = _map_cells(_run_al_cell, cells, resolve_workers(workers))
    by_model: dict[str, list] = {}
    for batch in nested:
        for seed, model_name, strategy, qi, sid, test_acc, val_acc in batch:
            by_model.setdefault(model_name, []).append(
                (seed, strategy, qi, sid, test_acc, val_acc))

    summary: dict = {"preset": preset_name, "master_seed": master_seed, "models": {}}
    for model_name in sorted(by_model):
        rows = sorted(by_model[model_name], key=lambda r: (r[1], r[0], r[2]))
        suffix = f"_{model_name.split('-')[0]}" if len(by_model) > 1 else ""
        write_csv(out_dir / f"{preset_name}{suffix}.csv", AL_HEADER, rows)
        summary["models"][model_name] = {
            "curves": curve_summary(rows),
            "file": f"{preset_name}{suffix}.csv",
        }
    write_json(out_dir / f"{preset_name}.summary.json", summary)
    return summary


def curve_summary(rows) -> dict:
    """Per-strategy mean/std test accuracy at each query index."""
    curves: dict[str, dict] = {}
    strategies = sorted({r[1] for r in rows})
    for strat in strategies:
        sub = [r for r in rows if r[1] == strat]
        by_q: dict[int, list[float]] = {}
        for r in sub:
            by_q.setdefault(int(r[2]), []).append(float(r[4]))
        curves[strat] = {str(q): _mean_std(by_q[q]) for q in sorted(by_q)}
    return curves


def load_al_rows(csv_path) -> list[tuple]:
    lines = Path(csv_path).read_text(encoding="utf-8").splitlines()
    if lines[0].split(",") != AL_HEADER:
        raise ValueError(f"unexpected header in {csv_path}")
    out = []
    for line in lines[1:]:
        seed, strategy, qi, sid, test_acc, val_acc = line.split(",")
        out.append((int(seed), strategy, int(qi), int(sid),
                    float(test_acc), float(val_acc)))
    return out


def class_names_for(task: str) -> tuple[str, ...]:
    if task == "ttt":
        return ("circle", "draw", "cross")
    if task == "ttt_binary":
        return ("circle", "cross")
    return ("0", "1")


def report_bias(rows, labels: np.ndarray, class_names: tuple[str, ...]) -> dict:
    """Class composition of queried samples per strategy."""
    table: dict[str, dict[str, int]] = {}
    for seed, strategy, qi, sid, _, _ in rows:
        if sid < 0:
            continue
        bucket = table.setdefault(strategy, {name: 0 for name in class_names})
        bucket[class_names[int(labels[sid])]] += 1
    return table


# --------------------------------------------------------------------------
# Symmetry report
# --------------------------------------------------------------------------

def run_symmetry_report(out_dir, trials: int = 100) -> list[dict]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checks = [
        ("eqnn_z-d3", mdl.build_eqnnz(3).circuit, z2_zz()),
        ("hea-d6", mdl.build_hea(6).circuit, z2_zz()),
        ("ttt-l2d5", mdl.build_ttt(2, 5).circuit, d4_perm()),
    ]
    rows = []
    for name, circuit, rep in checks:
        report = check_circuit_equivariance(circuit, rep, trials=trials)
        rows.append({"model": name, "group": report.group, "trials": trials,
                     "max_deviation": report.max_deviation, "passed": report.passed})
    write_json(out_dir / "symmetry_report.json", rows)
    return rows


# --------------------------------------------------------------------------
# Plot-data exports (tidy files consumed by the plotting package)
# --------------------------------------------------------------------------

def export_curves(al_csv, out_path) -> Path:
    rows = load_al_rows(al_csv)
    curves = curve_summary(rows)
    out = []
    for strat in sorted(curves):
        for q in sorted(curves[strat], key=int):
            cell = curves[strat][q]
            out.append((strat, int(q), cell["mean"], cell["std"], cell["n"]))
    return write_csv(Path(out_path), CURVE_HEADER, out)


def export_boundary_grid(data_dir, out_path, seed: int = 0, master_seed: int = 0,
                         resolution: int = GRID_RESOLUTION) -> Path:
    """Class-1 probability of a trained 2-feature model on a square lattice."""
    dataset, splits = load_task_dataset("donut", data_dir)
    arm = PRESETS["donut_full"].full_arms[0]  # the ring model's shipped protocol
    model = mdl.build(arm.model_spec)
    features = np.asarray(dataset.features, dtype=float)
    labels = dataset.labels
    stream = np.random.default_rng((master_seed, seed, 0))
    params0 = mdl.init_params(model, stream)
    result = fit(model.circuit, model.observables, params0,
                 features[splits.pool], mdl.targets_for(model, labels[splits.pool]),
                 model.loss, arm.epochs,
                 lambda p: mdl.accuracy(model, p, features[splits.validation],
                                        labels[splits.validation]),
                 update_mode=arm.update_mode,
                 rng=stream if arm.shuffle else None)
    axis = np.linspace(-1.0, 1.0, resolution)
    xx, yy = np.meshgrid(axis, axis)
    grid = np.stack([xx.ravel(), yy.ravel()], axis=1)
    p1 = mdl.predict_proba(model, result.params, grid)[:, 1]
    rows = [(float(a), float(b), float(p)) for (a, b), p in zip(grid, p1)]
    return write_csv(Path(out_path), ["x0", "x1", "p1"], rows)


def export_queries(al_csv, data_dir, task, out_path, seed: int = 0,
                   strategy: str | None = None) -> Path:
    dataset, _ = load_task_dataset(task, data_dir)
    rows = load_al_rows(al_csv)
    strategies = sorted({r[1] for r in rows})
    chosen = strategy or strategies[0]
    if chosen not in strategies:
        raise ValueError(f"strategy {chosen!r} not in {strategies}")
    out = []
    for row_seed, strat, qi, sid, _, _ in rows:
        if row_seed != seed or strat != chosen or sid < 0:
            continue
        x = dataset.features[sid]
        out.append((qi, sid, float(x[0]), float(x[1]), int(dataset.labels[sid])))
    return write_csv(Path(out_path), ["query_idx", "sample_id", "x0", "x1", "label"],
                     sorted(out))


def export_bias(al_csv, data_dir, task, out_path) -> Path:
    dataset, _ = load_task_dataset(task, data_dir)
    names = class_names_for(task)
    table = report_bias(load_al_rows(al_csv), dataset.labels, names)
    rows = [(strat, name, count)
            for strat in sorted(table) for name, count in table[strat].items()]
    return write_csv(Path(out_path), ["strategy", "class_name", "n_queried"], rows)


# --------------------------------------------------------------------------
# Acceptance-band checks (exit code 2 in --check mode)
# --------------------------------------------------------------------------

DONUT_EQNNZ_BAND = (0.874, 0.959)
DONUT_HEA_BAND = (0.752, 0.794)
TTT_BAND = (0.703, 0.834)


def _pooled_se(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.sqrt(a.var() / a.size + b.var() / b.size))


def _final_accs(rows, strategy) -> np.ndarray:
    last = max(r[2] for r in rows)
    return np.array([r[4] for r in rows if r[1] == strategy and r[2] == last])


def check_preset(preset_name: str, out_dir) -> list[tuple[str, bool, str]]:
    """Evaluate the preset's result files against the published bands."""
    out_dir = Path(out_dir)
    results: list[tuple[str, bool, str]] = []

    def add(name, ok, detail):
        results.append((name, bool(ok), detail))

    if preset_name == "donut_full":
        summary = json.loads((out_dir / "donut_full.summary.json").read_text())
        eq = summary["models"]["eqnn_z-d3"]["test_acc"]["mean"]
        he = summary["models"]["hea-d6"]["test_acc"]["mean"]
        add("eqnnz_band", DONUT_EQNNZ_BAND[0] <= eq <= DONUT_EQNNZ_BAND[1],
            f"mean {eq:.4f} vs {DONUT_EQNNZ_BAND}")
        add("hea_band", DONUT_HEA_BAND[0] <= he <= DONUT_HEA_BAND[1],
            f"mean {he:.4f} vs {DONUT_HEA_BAND}")
        add("ordering", eq > he, f"{eq:.4f} > {he:.4f}")
    elif preset_name == "ttt_full":
        rows = [line.split(",") for line in
                (out_dir / "ttt_full.csv").read_text().splitlines()[1:]]
        accs = np.array([float(r[2]) for r in rows])
        add("ttt_band", TTT_BAND[0] <= accs.mean() <= TTT_BAND[1],
            f"mean {accs.mean():.4f} vs {TTT_BAND}")
        add("cherry_seed", accs.max() >= 0.85, f"max {accs.max():.4f} >= 0.85")
        add("beats_guessing", accs.min() > 1 / 3, f"min {accs.min():.4f} > 0.3333")
    elif preset_name == "donut_al":
        eq_rows = load_al_rows(out_dir / "donut_al_eqnn_z.csv")
        he_rows = load_al_rows(out_dir / "donut_al_hea.csv")
        eq_lc, eq_rand = _final_accs(eq_rows, "LEAST_CONFIDENCE"), _final_accs(eq_rows, "RANDOM")
        gap = eq_lc.mean() - eq_rand.mean()
        se = _pooled_se(eq_lc, eq_rand)
        add("eqnnz_lc_gain", gap >= se, f"gap {gap:.4f} vs se {se:.4f}")
        early = [r for r in eq_rows
                 if r[1] != "RANDOM" and r[2] <= 6 and r[4] >= 0.95]
        add("six_query_hit", len(early) > 0, f"{len(early)} rows reach 0.95 by query 6")
        he_lc, he_rand = _final_accs(he_rows, "LEAST_CONFIDENCE"), _final_accs(he_rows, "RANDOM")
        he_gap = abs(he_lc.mean() - he_rand.mean())
        he_se = _pooled_se(he_lc, he_rand)
        add("hea_indistinguishable", he_gap <= he_se,
            f"|gap| {he_gap:.4f} vs se {he_se:.4f}")
    elif preset_name == "ttt_al":
        rows = load_al_rows(out_dir / "ttt_al.csv")
        ent, rand = _final_accs(rows, "ENTROPY"), _final_accs(rows, "RANDOM")
        gap = ent.mean() - rand.mean()
        se = _pooled_se(ent, rand)
        add("entropy_no_gain", gap <= se, f"gap {gap:.4f} vs se {se:.4f}")
    elif preset_name == "ttt_al_oracle":
        oracle_rows = load_al_rows(out_dir / "ttt_al_oracle.csv")
        base_rows = load_al_rows(out_dir / "ttt_al.csv")
        hits = []
        for q in range(1, 6):
            om = np.mean([r[4] for r in oracle_rows if r[2] == q])
            rm = np.mean([r[4] for r in base_rows if r[1] == "RANDOM" and r[2] == q])
            hits.append(om > rm)
        add("oracle_early_gain", any(hits), f"query 1..5 mean-exceeds: {hits}")
    elif preset_name == "ttt_binary_al":
        rows = load_al_rows(out_dir / "ttt_binary_al.csv")
        lc, rand = _final_accs(rows, "LEAST_CONFIDENCE"), _final_accs(rows, "RANDOM")
        add("binary_lc_final", lc.mean() >= rand.mean(),
            f"{lc.mean():.4f} >= {rand.mean():.4f}")
    elif preset_name == "symmetry_report":
        rows = json.loads((out_dir / "symmetry_report.json").read_text())
        by_model = {r["model"]: r for r in rows}
        add("eqnnz_equivariant", by_model["eqnn_z-d3"]["passed"],
            f"max dev {by_model['eqnn_z-d3']['max_deviation']:.2e}")
        add("ttt_equivariant", by_model["ttt-l2d5"]["passed"],
            f"max dev {by_model['ttt-l2d5']['max_deviation']:.2e}")
        add("hea_not_equivariant", not by_model["hea-d6"]["passed"],
            f"max dev {by_model['hea-d6']['max_deviation']:.2e}")
    else:
        raise ValueError(f"unknown preset {preset_name!r}")
    return results
