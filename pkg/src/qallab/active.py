"""Pool-based active learning: query strategies and the campaign loop.

All scorers follow one convention: higher score means query first, and the
selector breaks ties by lowest sample id.  The combined uncertainty-density
rule is therefore returned negated (its natural form is an argmin).

A campaign interleaves querying and retraining: score the pool with the
current model, move the best sample from the unlabeled pool to the labeled
set with its true label, retrain for a fixed number of epochs, and log
validation/test accuracy of the round's best-validation checkpoint.
Retraining either continues from the previous round's parameters
(`warm_start=True`) or restarts from the round-0 initialization each time;
the restart mode keeps per-round optimization budgets identical, so curve
differences come from which samples were queried rather than from how much
total training a strategy accumulated.  Parameter initialization depends
only on (master_seed, seed), never on the strategy, so strategy arms share
starting conditions seed by seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import models as mdl
from .autodiff import fit
from .data import Dataset, SplitDataset
from .simulator import fidelity_matrix

STRATEGIES = ("RANDOM", "LEAST_CONFIDENCE", "MARGIN", "ENTROPY",
              "VOTING_ENTROPY", "DENSITY_WEIGHTED", "FIDELITY")


@dataclass(frozen=True)
class StrategyKind:
    kind: str
    lam: float = 0.1
    committee_size: int = 5

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.kind == "VOTING_ENTROPY" and self.committee_size < 2:
            raise ValueError("committee needs at least 2 members")


@dataclass
class PoolState:
    labeled: list[tuple[int, int]]
    unlabeled: list[int]
    budget_used: int = 0

    def query(self, sample_id: int, label: int, free: bool = False) -> None:
        self.unlabeled.remove(sample_id)
        self.labeled.append((sample_id, int(label)))
        if not free:
            self.budget_used += 1


def _check_probs(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise ValueError("need a nonempty (samples, classes) probability array")
    return probs


def score_least_confidence(probs: np.ndarray) -> np.ndarray:
    probs = _check_probs(probs)
    return 1.0 - probs.max(axis=1)


def score_margin(probs: np.ndarray) -> np.ndarray:
    probs = _check_probs(probs)
    if probs.shape[1] < 2:
        raise ValueError("margin needs at least 2 classes")
    part = np.sort(probs, axis=1)
    return -(part[:, -1] - part[:, -2])


def score_entropy(probs: np.ndarray) -> np.ndarray:
    probs = _check_probs(probs)
    safe = np.where(probs > 0.0, probs, 1.0)  # 0 log 0 := 0
    return -np.sum(probs * np.log(safe), axis=1)


def score_voting_entropy(committee_labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Entropy of committee vote fractions; rows of `committee_labels` are members."""
    committee_labels = np.asarray(committee_labels, dtype=int)
    if committee_labels.ndim != 2 or committee_labels.shape[0] < 2:
        raise ValueError("need hard labels from at least 2 committee members")
    c = committee_labels.shape[0]
    scores = np.zeros(committee_labels.shape[1])
    for y in range(n_classes):
        frac = np.mean(committee_labels == y, axis=0)
        safe = np.where(frac > 0.0, frac, 1.0)
        scores -= frac * np.log(safe)
    return scores


def score_density(encoded_states: np.ndarray) -> np.ndarray:
    """Mean pure-state overlap with the rest of the pool (self excluded)."""
    return score_density_from_gram(fidelity_matrix(encoded_states))


def score_density_from_gram(gram: np.ndarray) -> np.ndarray:
    gram = np.asarray(gram, dtype=float)
    u = gram.shape[0]
    if u == 0:
        raise ValueError("empty pool")
    if u == 1:
        return np.zeros(1)
    return (gram.sum(axis=1) - np.diagonal(gram)) / u


def score_fidelity_combined(probs: np.ndarray, encoded_states: np.ndarray,
                            lam: float) -> np.ndarray:
    return score_fidelity_from_gram(probs, fidelity_matrix(encoded_states), lam)


def score_fidelity_from_gram(probs: np.ndarray, gram: np.ndarray, lam: float) -> np.ndarray:
    """Negated distance-to-midpoint plus sparsity penalty (argmax convention).

    The natural objective |p1 - 0.5| + (lam/U) * sum(1 - Sim) is minimized;
    negating it folds the rule into the shared query-by-argmax convention.
    """
    probs = _check_probs(probs)
    if probs.shape[1] != 2:
        raise ValueError("combined uncertainty-density scoring needs a binary model")
    u = gram.shape[0]
    sparsity = ((u - np.diagonal(gram)) - (gram.sum(axis=1) - np.diagonal(gram))) / u
    return -(np.abs(probs[:, 1] - 0.5) + lam * sparsity)


@dataclass(frozen=True)
class QueryRecord:
    query_idx: int
    sample_id: int
    test_acc: float
    val_acc: float
    probabilities: tuple[float, ...] = ()


@dataclass(frozen=True)
class CampaignConfig:
    model_spec: mdl.ModelSpec
    strategy: StrategyKind
    budget: int
    epochs_per_round: int = 50
    learning_rate: float = 0.1
    update_mode: str = "full_batch"
    warm_start: bool = True
    oracle_init: bool = False


def _select(ids: np.ndarray, scores: np.ndarray) -> int:
    best = np.flatnonzero(scores == scores.max())
    return int(ids[best].min())


def _oracle_init_ids(labels: np.ndarray, pool_ids: np.ndarray) -> list[int]:
    picks = []
    for cls in np.unique(labels[pool_ids]):
        members = pool_ids[labels[pool_ids] == cls]
        picks.append(int(members.min()))
    return picks


def run_campaign(config: CampaignConfig, dataset: Dataset, splits: SplitDataset,
                 seed: int, master_seed: int = 0) -> list[QueryRecord]:
    model = mdl.build(config.model_spec)
    features = np.asarray(dataset.features, dtype=float)
    labels = np.asarray(dataset.labels)
    val_x, val_y = features[splits.validation], labels[splits.validation]
    test_x, test_y = features[splits.test], labels[splits.test]

    budget = config.budget
    if budget > len(splits.pool):
        warnings.warn(f"budget {budget} exceeds pool size {len(splits.pool)}; clipping")
        budget = len(splits.pool)

    strategy = config.strategy
    committee = strategy.kind == "VOTING_ENTROPY"
    n_members = strategy.committee_size if committee else 1
    init_members = [
        mdl.init_params(model, np.random.default_rng((master_seed, seed, 10 + m)))
        for m in range(n_members)
    ]
    member_params = list(init_members)
    query_rng = np.random.default_rng((master_seed, seed, 1))

    gram = None
    if strategy.kind in ("DENSITY_WEIGHTED", "FIDELITY"):
        gram = fidelity_matrix(mdl.encoder_states(model, features))

    pool = PoolState([], sorted(int(i) for i in splits.pool))
    if config.oracle_init:
        for sid in _oracle_init_ids(labels, np.asarray(splits.pool)):
            pool.query(sid, labels[sid], free=True)

    def retrain() -> tuple[float, float]:
        nonlocal member_params
        lab_ids = [sid for sid, _ in pool.labeled]
        x = features[lab_ids]
        t = mdl.targets_for(model, labels[lab_ids])
        val_accs, votes_val, votes_test = [], [], []
        for m in range(n_members):
            start = member_params[m] if config.warm_start else init_members[m]
            result = fit(model.circuit, model.observables, start, x, t,
                         model.loss, config.epochs_per_round,
                         lambda p: mdl.accuracy(model, p, val_x, val_y),
                         config.learning_rate, config.update_mode)
            member_params[m] = result.params
            val_accs.append(result.val_acc)
            votes_val.append(mdl.predict_labels(model, result.params, val_x))
            votes_test.append(mdl.predict_labels(model, result.params, test_x))
        if committee:
            val_acc = _vote_accuracy(np.array(votes_val), val_y)
            test_acc = _vote_accuracy(np.array(votes_test), test_y)
        else:
            val_acc = val_accs[0]
            test_acc = float(np.mean(votes_test[0] == test_y))
        return test_acc, val_acc

    def evaluate() -> tuple[float, float]:
        votes_val = np.array([mdl.predict_labels(model, p, val_x) for p in member_params])
        votes_test = np.array([mdl.predict_labels(model, p, test_x) for p in member_params])
        if committee:
            return _vote_accuracy(votes_test, test_y), _vote_accuracy(votes_val, val_y)
        return float(np.mean(votes_test[0] == test_y)), float(np.mean(votes_val[0] == val_y))

    records: list[QueryRecord] = []
    test_acc, val_acc = retrain() if pool.labeled else evaluate()
    records.append(QueryRecord(0, -1, test_acc, val_acc))

    for round_idx in range(1, budget + 1):
        ids = np.array(pool.unlabeled)
        pool_x = features[ids]
        probs = None
        if strategy.kind == "RANDOM":
            sid = int(ids[query_rng.integers(len(ids))])
        else:
            if committee:
                votes = np.array([mdl.predict_labels(model, p, pool_x)
                                  for p in member_params])
                scores = score_voting_entropy(votes, len(model.class_names))
            else:
                probs = mdl.predict_proba(model, member_params[0], pool_x)
                if strategy.kind == "LEAST_CONFIDENCE":
                    scores = score_least_confidence(probs)
                elif strategy.kind == "MARGIN":
                    scores = score_margin(probs)
                elif strategy.kind == "ENTROPY":
                    scores = score_entropy(probs)
                elif strategy.kind == "DENSITY_WEIGHTED":
                    scores = score_density_from_gram(gram[np.ix_(ids, ids)])
                else:
                    scores = score_fidelity_from_gram(probs, gram[np.ix_(ids, ids)],
                                                      strategy.lam)
            sid = _select(ids, scores)
        if probs is None:
            probs_row = mdl.predict_proba(model, member_params[0],
                                          features[sid:sid + 1])[0]
        else:
            probs_row = probs[list(ids).index(sid)]
        pool.query(sid, labels[sid])
        test_acc, val_acc = retrain()
        records.append(QueryRecord(round_idx, sid, test_acc, val_acc,
                                   tuple(float(v) for v in probs_row)))
    return records


def _vote_accuracy(votes: np.ndarray, truth: np.ndarray) -> float:
    """Accuracy of the committee's plurality vote, low class winning ties."""
    n_classes = int(votes.max()) + 1 if votes.size else 1
    counts = np.stack([(votes == y).sum(axis=0) for y in range(n_classes)])
    majority = counts.argmax(axis=0)
    return float(np.mean(majority == truth))
