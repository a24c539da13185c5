"""Model construction: circuits, observables, and output mappings.

Three families are provided.

* ``eqnn_z``: 2-qubit classifier whose encoder and ansatz both commute with
  the Z x Z label symmetry (negating both features conjugates the encoder by
  Z x Z, which ansatz and observable ignore).
* ``hea``: hardware-efficient 2-qubit baseline with the same feature angles
  but no symmetry guarantee (RX/RY ordered identically on both qubits).
* ``ttt_eqnn``: 9-qubit board classifier on a 3x3 grid, parameters shared
  across the orbits of the square's symmetries (corners, edges, middle) with
  controlled rotations along the orbit-to-orbit adjacencies.  The binary
  variant drops the draw observable.

Single-observable models map to probabilities via (<O> + 1) / 2 for class 1;
multi-observable models apply softmax to the raw expectation vector.  Hard
labels take the argmax, ties resolving to the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import BceLoss, LossSpec, MseLoss
from .simulator import Circuit, Feature, Gate, Observable, Slot, expectations, run_circuit

CORNERS = (0, 2, 6, 8)
EDGES = (1, 3, 5, 7)
MIDDLE = 4
# control -> target, restricted to grid-adjacent cells
CORNER_TO_EDGE = ((0, 1), (0, 3), (2, 1), (2, 5), (6, 3), (6, 7), (8, 5), (8, 7))
EDGE_TO_MIDDLE = ((1, 4), (3, 4), (5, 4), (7, 4))
MIDDLE_TO_CORNER = ((4, 0), (4, 2), (4, 6), (4, 8))

FAMILIES = ("eqnn_z", "hea", "ttt_eqnn", "ttt_eqnn_binary")

# board cells encode as RX(scale * g); default puts g in {-1, 0, +1} onto
# three points of the circle, the documented alternative shrinks the angles
TTT_SCALE_DEFAULT = 2.0 * np.pi / 3.0
TTT_SCALE_COMPACT = 2.0 / 3.0


@dataclass(frozen=True)
class ModelSpec:
    family: str
    depth: int
    layers: int = 1
    ttt_encoding_scale: float = TTT_SCALE_DEFAULT

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")

    @property
    def param_count(self) -> int:
        if self.family == "eqnn_z":
            return 3 * self.depth
        if self.family == "hea":
            return 2 * self.depth
        return 9 * self.layers * self.depth


@dataclass(frozen=True)
class Model:
    name: str
    circuit: Circuit
    encoder: Circuit  # one feature pass, no trainable slots
    observables: tuple[Observable, ...]
    loss: LossSpec
    n_features: int
    class_names: tuple[str, ...]

    @property
    def n_params(self) -> int:
        return self.circuit.n_params


@dataclass(frozen=True)
class Prediction:
    raw_expectations: np.ndarray
    probabilities: np.ndarray

    @property
    def label(self) -> int:
        return int(np.argmax(self.probabilities))


def _mean_z(qubits) -> Observable:
    w = 1.0 / len(qubits)
    return Observable(tuple((w, q) for q in qubits))


def _encoder_ops_eqnnz() -> list[Gate]:
    # Crossed wiring: each qubit sees both features, so the two-angle
    # chart covers the ring labels; one-feature-per-qubit wiring caps
    # near 76% train accuracy on this task.
    s = np.pi / 2
    return [
        Gate("RX", (0,), Feature(0, s)),
        Gate("RY", (1,), Feature(1, s)),
        Gate("RY", (0,), Feature(1, s)),
        Gate("RX", (1,), Feature(0, s)),
    ]


def _encoder_ops_hea() -> list[Gate]:
    s = np.pi / 2
    return [
        Gate("RX", (0,), Feature(0, s)),
        Gate("RX", (1,), Feature(1, s)),
        Gate("RY", (0,), Feature(0, s)),
        Gate("RY", (1,), Feature(1, s)),
    ]


def build_eqnnz(depth: int) -> Model:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ops = _encoder_ops_eqnnz()
    for b in range(depth):
        ops.append(Gate("RXX", (0, 1), Slot(3 * b)))
        ops.append(Gate("RZ", (0,), Slot(3 * b + 1)))
        ops.append(Gate("RZ", (1,), Slot(3 * b + 2)))
    circuit = Circuit(2, tuple(ops), 3 * depth)
    encoder = Circuit(2, tuple(_encoder_ops_eqnnz()), 0)
    return Model(f"eqnn_z-d{depth}", circuit, encoder, (_mean_z((0, 1)),),
                 BceLoss(), 2, ("0", "1"))


def build_hea(depth: int) -> Model:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ops = _encoder_ops_hea()
    for b in range(depth):
        ops.append(Gate("RX", (0,), Slot(2 * b)))
        ops.append(Gate("RX", (1,), Slot(2 * b + 1)))
        ops.append(Gate("CNOT", (0, 1)))
    circuit = Circuit(2, tuple(ops), 2 * depth)
    encoder = Circuit(2, tuple(_encoder_ops_hea()), 0)
    return Model(f"hea-d{depth}", circuit, encoder, (_mean_z((0, 1)),),
                 BceLoss(), 2, ("0", "1"))


def _encoder_ops_ttt(scale: float) -> list[Gate]:
    return [Gate("RX", (q,), Feature(q, scale)) for q in range(9)]


def _block_ops_ttt(base: int) -> list[Gate]:
    ops: list[Gate] = []
    for q in CORNERS:
        ops.append(Gate("RX", (q,), Slot(base)))
    for q in CORNERS:
        ops.append(Gate("RY", (q,), Slot(base + 1)))
    for q in EDGES:
        ops.append(Gate("RX", (q,), Slot(base + 2)))
    for q in EDGES:
        ops.append(Gate("RY", (q,), Slot(base + 3)))
    ops.append(Gate("RX", (MIDDLE,), Slot(base + 4)))
    ops.append(Gate("RY", (MIDDLE,), Slot(base + 5)))
    for c, t in CORNER_TO_EDGE:
        ops.append(Gate("CRY", (c, t), Slot(base + 6)))
    for c, t in EDGE_TO_MIDDLE:
        ops.append(Gate("CRY", (c, t), Slot(base + 7)))
    for c, t in MIDDLE_TO_CORNER:
        ops.append(Gate("CRY", (c, t), Slot(base + 8)))
    return ops


def build_ttt(layers: int, depth: int, binary: bool = False,
              encoding_scale: float = TTT_SCALE_DEFAULT) -> Model:
    """Board classifier: `layers` feature passes, `depth` blocks after each."""
    if layers < 1 or depth < 1:
        raise ValueError("layers and depth must be >= 1")
    ops: list[Gate] = []
    for layer in range(layers):
        ops.extend(_encoder_ops_ttt(encoding_scale))
        for b in range(depth):
            ops.extend(_block_ops_ttt((layer * depth + b) * 9))
    circuit = Circuit(9, tuple(ops), layers * depth * 9)
    encoder = Circuit(9, tuple(_encoder_ops_ttt(encoding_scale)), 0)
    obs_circle = _mean_z(CORNERS)
    obs_draw = Observable(((1.0, MIDDLE),))
    obs_cross = _mean_z(EDGES)
    if binary:
        observables = (obs_circle, obs_cross)
        names = ("circle", "cross")
    else:
        observables = (obs_circle, obs_draw, obs_cross)
        names = ("circle", "draw", "cross")
    tag = "b" if binary else ""
    return Model(f"ttt{tag}-l{layers}d{depth}", circuit, encoder, observables,
                 MseLoss(), 9, names)


def build(spec: ModelSpec) -> Model:
    if spec.family == "eqnn_z":
        return build_eqnnz(spec.depth)
    if spec.family == "hea":
        return build_hea(spec.depth)
    return build_ttt(spec.layers, spec.depth, spec.family == "ttt_eqnn_binary",
                     spec.ttt_encoding_scale)


def init_params(model: Model, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=model.n_params)


def onehot_targets(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """+-1 one-hot rows for the squared-error loss."""
    labels = np.asarray(labels, dtype=int)
    out = -np.ones((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def targets_for(model: Model, labels: np.ndarray) -> np.ndarray:
    if isinstance(model.loss, BceLoss):
        return np.asarray(labels, dtype=float)
    return onehot_targets(labels, len(model.observables))


def expectations_for(model: Model, params: np.ndarray, features: np.ndarray) -> np.ndarray:
    states = run_circuit(model.circuit, params, features)
    return expectations(states, model.circuit.n_qubits, model.observables)


def proba_from_expectations(exp_vals: np.ndarray) -> np.ndarray:
    if exp_vals.shape[1] == 1:
        p = np.clip((exp_vals[:, 0] + 1.0) / 2.0, 0.0, 1.0)
        return np.stack([1.0 - p, p], axis=1)
    shifted = np.exp(exp_vals - exp_vals.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def predict_proba(model: Model, params: np.ndarray, features: np.ndarray) -> np.ndarray:
    return proba_from_expectations(expectations_for(model, params, features))


def predict(model: Model, params: np.ndarray, sample: np.ndarray) -> Prediction:
    exp_vals = expectations_for(model, params, np.asarray(sample, dtype=float).reshape(1, -1))
    return Prediction(exp_vals[0], proba_from_expectations(exp_vals)[0])


def predict_labels(model: Model, params: np.ndarray, features: np.ndarray) -> np.ndarray:
    return np.argmax(predict_proba(model, params, features), axis=1)


def accuracy(model: Model, params: np.ndarray, features: np.ndarray,
             labels: np.ndarray) -> float:
    if len(features) == 0:
        return 0.0
    return float(np.mean(predict_labels(model, params, features) == np.asarray(labels)))


def encoder_states(model: Model, features: np.ndarray) -> np.ndarray:
    """Feature-pass states used for overlap-based pool similarities."""
    return run_circuit(model.encoder, np.zeros(0), features)
