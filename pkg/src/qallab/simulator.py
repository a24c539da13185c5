"""Dense statevector simulation of few-qubit circuits.

Convention: every parameterized gate realizes U_G(theta) = exp(-i * theta * G)
for its Hermitian generator G, with no implicit 1/2 on the angle.  Generators:

    RX  -> X          RY  -> Y          RZ  -> Z
    RXX -> X (x) X    CRY -> |1><1|_c (x) Y_t

CNOT, H and PERM are fixed unitaries.  Qubit 0 is the most significant bit of
the basis index, so |01> on two qubits is amplitude index 1.

The engine operates on batches: a `(batch, 2**n)` complex128 array whose rows
are independent statevectors.  Per-row angles (one angle per batch element)
are supported so a whole dataset can be pushed through an encoder at once.
Kernels mutate their input array in place and return it, except PERM which
returns a fresh array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SQRT1_2 = 1.0 / np.sqrt(2.0)

PARAMETERIZED_KINDS = ("RX", "RY", "RZ", "RXX", "CRY")
FIXED_KINDS = ("CNOT", "H", "PERM")
GATE_KINDS = PARAMETERIZED_KINDS + FIXED_KINDS


# --------------------------------------------------------------------------
# Parameter bindings and circuit IR
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    """Angle taken from a trainable parameter vector."""
    index: int


@dataclass(frozen=True)
class Feature:
    """Angle taken from the input sample: x[index] * scale."""
    index: int
    scale: float


@dataclass(frozen=True)
class Fixed:
    """Constant angle."""
    angle: float


ParamBinding = Slot | Feature | Fixed | None


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param: ParamBinding = None
    perm: tuple[int, ...] | None = None  # PERM only

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} qubit indices must be distinct: {self.qubits}")
        if self.kind in PARAMETERIZED_KINDS and self.param is None:
            raise ValueError(f"{self.kind} requires a parameter binding")
        if self.kind == "PERM":
            if self.perm is None or sorted(self.perm) != list(range(len(self.perm))):
                raise ValueError(f"PERM requires a bijective qubit map, got {self.perm}")


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a fixed qubit count.

    `n_params` is the length of the trainable parameter vector; slots may be
    shared between gates (shared-parameter ansatz blocks).
    """
    n_qubits: int
    ops: tuple[Gate, ...]
    n_params: int

    def __post_init__(self):
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"qubit index {q} out of range for {self.n_qubits} qubits")
            if isinstance(op.param, Slot) and not 0 <= op.param.index < self.n_params:
                raise ValueError(f"parameter slot {op.param.index} out of range")


@dataclass
class StateVector:
    """Single dense state over `n_qubits` qubits (amplitudes length 2**n)."""
    n_qubits: int
    amplitudes: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.amplitudes is None:
            amps = np.zeros(2 ** self.n_qubits, dtype=np.complex128)
            amps[0] = 1.0
            self.amplitudes = amps
        else:
            self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
            if self.amplitudes.shape != (2 ** self.n_qubits,):
                raise ValueError("amplitude length must be 2**n_qubits")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class Observable:
    """Weighted sum of single-qubit Pauli-Z terms: sum_k coeff_k * Z_{q_k}."""
    terms: tuple[tuple[float, int], ...]

    def diagonal(self, n_qubits: int) -> np.ndarray:
        diag = np.zeros(2 ** n_qubits)
        for coeff, q in self.terms:
            diag = diag + coeff * _z_diagonal(n_qubits, q)
        return diag


@lru_cache(maxsize=None)
def _z_diagonal(n_qubits: int, q: int) -> np.ndarray:
    if not 0 <= q < n_qubits:
        raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
    idx = np.arange(2 ** n_qubits)
    bits = (idx >> (n_qubits - 1 - q)) & 1
    diag = 1.0 - 2.0 * bits
    diag.setflags(write=False)
    return diag


# --------------------------------------------------------------------------
# Batched kernels
# --------------------------------------------------------------------------

def init_states(n_qubits: int, batch: int) -> np.ndarray:
    states = np.zeros((batch, 2 ** n_qubits), dtype=np.complex128)
    states[:, 0] = 1.0
    return states


def _trig(theta, trailing_axes: int):
    """cos/sin of a scalar or per-row angle vector, shaped to broadcast."""
    theta = np.asarray(theta)
    if not np.all(np.isfinite(theta)):
        raise ValueError("gate angle must be finite")
    c, s = np.cos(theta), np.sin(theta)
    if theta.ndim == 1:
        shape = (-1,) + (1,) * trailing_axes
        c, s = c.reshape(shape), s.reshape(shape)
    return c, s


def _phase(theta, trailing_axes: int):
    theta = np.asarray(theta)
    if not np.all(np.isfinite(theta)):
        raise ValueError("gate angle must be finite")
    p = np.exp(-1j * theta)
    if theta.ndim == 1:
        p = p.reshape((-1,) + (1,) * trailing_axes)
    return p


def _view1(states: np.ndarray, n: int, q: int) -> np.ndarray:
    batch = states.shape[0]
    return states.reshape(batch, 2 ** q, 2, 2 ** (n - 1 - q))


def _view2(states: np.ndarray, n: int, qa: int, qb: int) -> np.ndarray:
    # qa < qb required
    batch = states.shape[0]
    return states.reshape(batch, 2 ** qa, 2, 2 ** (qb - qa - 1), 2, 2 ** (n - 1 - qb))


def apply_rx(states, n, q, theta):
    v = _view1(states, n, q)
    c, s = _trig(theta, 2)
    a, b = v[:, :, 0, :], v[:, :, 1, :]
    ta = c * a - 1j * (s * b)
    tb = c * b - 1j * (s * a)
    a[...] = ta
    b[...] = tb
    return states


def apply_ry(states, n, q, theta):
    v = _view1(states, n, q)
    c, s = _trig(theta, 2)
    a, b = v[:, :, 0, :], v[:, :, 1, :]
    ta = c * a - s * b
    tb = s * a + c * b
    a[...] = ta
    b[...] = tb
    return states


def apply_rz(states, n, q, theta):
    v = _view1(states, n, q)
    p = _phase(theta, 2)
    v[:, :, 0, :] *= p
    v[:, :, 1, :] *= np.conj(p)
    return states


def apply_h(states, n, q):
    v = _view1(states, n, q)
    a, b = v[:, :, 0, :], v[:, :, 1, :]
    ta = (a + b) * SQRT1_2
    tb = (a - b) * SQRT1_2
    a[...] = ta
    b[...] = tb
    return states


def apply_rxx(states, n, qubits, theta):
    qa, qb = sorted(qubits)
    v = _view2(states, n, qa, qb)
    c, s = _trig(theta, 3)
    s00, s01 = v[:, :, 0, :, 0, :], v[:, :, 0, :, 1, :]
    s10, s11 = v[:, :, 1, :, 0, :], v[:, :, 1, :, 1, :]
    t00 = c * s00 - 1j * (s * s11)
    t01 = c * s01 - 1j * (s * s10)
    t10 = c * s10 - 1j * (s * s01)
    t11 = c * s11 - 1j * (s * s00)
    s00[...] = t00
    s01[...] = t01
    s10[...] = t10
    s11[...] = t11
    return states


def _controlled_target_slices(states, n, control, target):
    qa, qb = sorted((control, target))
    v = _view2(states, n, qa, qb)
    if control == qa:
        return v[:, :, 1, :, 0, :], v[:, :, 1, :, 1, :]
    return v[:, :, 0, :, 1, :], v[:, :, 1, :, 1, :]


def apply_cry(states, n, control, target, theta):
    a, b = _controlled_target_slices(states, n, control, target)
    c, s = _trig(theta, 3)
    ta = c * a - s * b
    tb = s * a + c * b
    a[...] = ta
    b[...] = tb
    return states


def apply_cnot(states, n, control, target):
    a, b = _controlled_target_slices(states, n, control, target)
    tmp = a.copy()
    a[...] = b
    b[...] = tmp
    return states


def apply_perm(states, n, perm):
    """Relabel qubits: qubit i moves to position perm[i].  Returns a new array."""
    if sorted(perm) != list(range(n)):
        raise ValueError(f"permutation must be a bijection on 0..{n - 1}, got {perm}")
    batch = states.shape[0]
    tensor = states.reshape((batch,) + (2,) * n)
    axes = [0] * (n + 1)
    for i, p in enumerate(perm):
        axes[1 + p] = 1 + i
    return np.ascontiguousarray(tensor.transpose(axes)).reshape(batch, 2 ** n)


def apply_gate_batched(states, n, gate: Gate, theta=None):
    """Dispatch one gate over a batch.  `theta` is a scalar or (batch,) vector."""
    kind = gate.kind
    if kind == "RX":
        return apply_rx(states, n, gate.qubits[0], theta)
    if kind == "RY":
        return apply_ry(states, n, gate.qubits[0], theta)
    if kind == "RZ":
        return apply_rz(states, n, gate.qubits[0], theta)
    if kind == "RXX":
        return apply_rxx(states, n, gate.qubits, theta)
    if kind == "CRY":
        return apply_cry(states, n, gate.qubits[0], gate.qubits[1], theta)
    if kind == "CNOT":
        return apply_cnot(states, n, gate.qubits[0], gate.qubits[1])
    if kind == "H":
        return apply_h(states, n, gate.qubits[0])
    if kind == "PERM":
        return apply_perm(states, n, gate.perm)
    raise ValueError(f"unknown gate kind {kind!r}")


def generator_apply(states, n, gate: Gate) -> np.ndarray:
    """Return G @ psi for each row, where G is the gate's generator."""
    kind = gate.kind
    out = np.zeros_like(states)
    if kind in ("RX", "RY", "RZ"):
        q = gate.qubits[0]
        v = _view1(states, n, q)
        o = _view1(out, n, q)
        a, b = v[:, :, 0, :], v[:, :, 1, :]
        if kind == "RX":
            o[:, :, 0, :] = b
            o[:, :, 1, :] = a
        elif kind == "RY":
            o[:, :, 0, :] = -1j * b
            o[:, :, 1, :] = 1j * a
        else:
            o[:, :, 0, :] = a
            o[:, :, 1, :] = -b
        return out
    if kind == "RXX":
        qa, qb = sorted(gate.qubits)
        v = _view2(states, n, qa, qb)
        o = _view2(out, n, qa, qb)
        o[:, :, 0, :, 0, :] = v[:, :, 1, :, 1, :]
        o[:, :, 0, :, 1, :] = v[:, :, 1, :, 0, :]
        o[:, :, 1, :, 0, :] = v[:, :, 0, :, 1, :]
        o[:, :, 1, :, 1, :] = v[:, :, 0, :, 0, :]
        return out
    if kind == "CRY":
        control, target = gate.qubits
        a, b = _controlled_target_slices(states, n, control, target)
        oa, ob = _controlled_target_slices(out, n, control, target)
        oa[...] = -1j * b
        ob[...] = 1j * a
        return out
    raise ValueError(f"gate kind {kind!r} has no generator")


# --------------------------------------------------------------------------
# Amp-major fast path
# --------------------------------------------------------------------------
# Hot loops run on transposed buffers of shape (2**n, batch): the batch axis
# is contiguous, so every qubit's half-slices are unit-stride runs of at
# least `batch` elements regardless of qubit position.  Single-qubit and RXX
# gates rewrite a source buffer into a destination buffer with one einsum
# pass (the buffers then swap roles); diagonal and controlled gates update
# the source in place, touching only the affected slices.

def _amp_init(n: int, batch: int) -> np.ndarray:
    states = np.zeros((2 ** n, batch), dtype=np.complex128)
    states[0, :] = 1.0
    return states


def _amp_view1(buf: np.ndarray, n: int, q: int):
    batch = buf.shape[1]
    return buf.reshape(2 ** q, 2, 2 ** (n - 1 - q) * batch)


def _amp_view1b(buf: np.ndarray, n: int, q: int):
    batch = buf.shape[1]
    return buf.reshape(2 ** q, 2, 2 ** (n - 1 - q), batch)


def _amp_view2(buf: np.ndarray, n: int, qa: int, qb: int):
    # qa < qb required
    batch = buf.shape[1]
    return buf.reshape(2 ** qa, 2, 2 ** (qb - qa - 1), 2, 2 ** (n - 1 - qb) * batch)


def _check_finite_angle(theta) -> None:
    if not np.all(np.isfinite(theta)):
        raise ValueError("gate angle must be finite")


def _amp_single(src, dst, n, q, kind, theta):
    """RX/RY/H as one einsum pass src -> dst.  Returns (dst, src) swapped."""
    if kind == "H":
        u2 = np.array([[SQRT1_2, SQRT1_2], [SQRT1_2, -SQRT1_2]], dtype=np.complex128)
        np.einsum("ij,pjc->pic", u2, _amp_view1(src, n, q), out=_amp_view1(dst, n, q))
        return dst, src
    _check_finite_angle(theta)
    theta = np.asarray(theta)
    c, s = np.cos(theta), np.sin(theta)
    if theta.ndim == 0:
        if kind == "RX":
            u2 = np.array([[c, -1j * s], [-1j * s, c]])
        else:
            u2 = np.array([[c, -s], [s, c]], dtype=np.complex128)
        np.einsum("ij,pjc->pic", u2, _amp_view1(src, n, q), out=_amp_view1(dst, n, q))
    else:
        u2 = np.empty((2, 2, theta.shape[0]), dtype=np.complex128)
        u2[0, 0] = c
        u2[1, 1] = c
        if kind == "RX":
            u2[0, 1] = -1j * s
            u2[1, 0] = -1j * s
        else:
            u2[0, 1] = -s
            u2[1, 0] = s
        np.einsum("ijb,pjrb->pirb", u2, _amp_view1b(src, n, q), out=_amp_view1b(dst, n, q))
    return dst, src


def _amp_rz(buf, n, q, theta):
    _check_finite_angle(theta)
    theta = np.asarray(theta)
    p = np.exp(-1j * theta)
    if theta.ndim == 0:
        v = _amp_view1(buf, n, q)
        v[:, 0, :] *= p
        v[:, 1, :] *= np.conj(p)
    else:
        v = _amp_view1b(buf, n, q)
        v[:, 0] *= p
        v[:, 1] *= np.conj(p)
    return buf


def _amp_ctrl_slices(buf, n, control, target):
    qa, qb = sorted((control, target))
    v = _amp_view2(buf, n, qa, qb)
    if control == qa:
        return v[:, 1, :, 0, :], v[:, 1, :, 1, :]
    return v[:, 0, :, 1, :], v[:, 1, :, 1, :]


def _amp_cry(buf, n, control, target, theta):
    _check_finite_angle(theta)
    theta = np.asarray(theta)
    c, s = np.cos(theta), np.sin(theta)
    a, b = _amp_ctrl_slices(buf, n, control, target)
    if theta.ndim != 0:
        # per-row angle broadcasts over the trailing batch axis
        qa, qb = sorted((control, target))
        batch = buf.shape[1]
        a = a.reshape(a.shape[:-1] + (-1, batch))
        b = b.reshape(b.shape[:-1] + (-1, batch))
    t1 = np.empty_like(a)
    t2 = np.empty_like(a)
    np.multiply(a, c, out=t1)
    t1 -= s * b
    np.multiply(b, c, out=t2)
    t2 += s * a
    a[...] = t1
    b[...] = t2
    return buf


def _amp_cnot(buf, n, control, target):
    a, b = _amp_ctrl_slices(buf, n, control, target)
    tmp = a.copy()
    a[...] = b
    b[...] = tmp
    return buf


def _amp_rxx(src, dst, n, qubits, theta):
    _check_finite_angle(theta)
    theta = np.asarray(theta)
    c, s = np.cos(theta), np.sin(theta)
    qa, qb = sorted(qubits)
    vs = _amp_view2(src, n, qa, qb)
    vd = _amp_view2(dst, n, qa, qb)
    if theta.ndim != 0:
        batch = src.shape[1]
        vs = vs.reshape(vs.shape[:-1] + (-1, batch))
        vd = vd.reshape(vd.shape[:-1] + (-1, batch))
    js = 1j * s
    for (i, k), (i2, k2) in (((0, 0), (1, 1)), ((0, 1), (1, 0)),
                             ((1, 0), (0, 1)), ((1, 1), (0, 0))):
        out = vd[:, i, :, k]
        np.multiply(vs[:, i, :, k], c, out=out)
        out -= js * vs[:, i2, :, k2]
    return dst, src


def _amp_perm(src, dst, n, perm):
    batch = src.shape[1]
    axes = [0] * (n + 1)
    for i, p in enumerate(perm):
        axes[p] = i
    axes[n] = n
    tensor = src.reshape((2,) * n + (batch,))
    np.copyto(dst.reshape((2,) * n + (batch,)), tensor.transpose(axes))
    return dst, src


def _amp_apply(src, dst, n, op: Gate, theta):
    """Apply one gate to the amp-major buffer pair; returns (current, spare)."""
    kind = op.kind
    if kind in ("RX", "RY"):
        return _amp_single(src, dst, n, op.qubits[0], kind, theta)
    if kind == "RZ":
        return _amp_rz(src, n, op.qubits[0], theta), dst
    if kind == "CRY":
        return _amp_cry(src, n, op.qubits[0], op.qubits[1], theta), dst
    if kind == "CNOT":
        return _amp_cnot(src, n, op.qubits[0], op.qubits[1]), dst
    if kind == "H":
        return _amp_single(src, dst, n, op.qubits[0], kind, None)
    if kind == "RXX":
        return _amp_rxx(src, dst, n, op.qubits, theta)
    if kind == "PERM":
        return _amp_perm(src, dst, n, op.perm)
    raise ValueError(f"unknown gate kind {kind!r}")


def _amp_run(circuit: Circuit, params: np.ndarray, features: np.ndarray | None,
             src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    n = circuit.n_qubits
    for op in circuit.ops:
        theta = resolve_angle(op.param, params, features)
        src, dst = _amp_apply(src, dst, n, op, theta)
    return src


# --------------------------------------------------------------------------
# Circuit execution
# --------------------------------------------------------------------------

def resolve_angle(binding: ParamBinding, params: np.ndarray, features: np.ndarray | None):
    if isinstance(binding, Slot):
        return params[binding.index]
    if isinstance(binding, Feature):
        if features is None:
            raise ValueError("circuit has encoder slots but no input features given")
        return features[:, binding.index] * binding.scale
    if isinstance(binding, Fixed):
        return binding.angle
    return None


def run_circuit(circuit: Circuit, params: np.ndarray, features: np.ndarray | None,
                states: np.ndarray | None = None) -> np.ndarray:
    """Apply the full circuit to a batch of |0...0> states (or `states`).

    features: (batch, n_features) array feeding encoder slots, or None.
    Returns a new (batch, 2**n) array of final states; `states` is not
    modified.
    """
    n = circuit.n_qubits
    if states is None:
        batch = 1 if features is None else features.shape[0]
        src = _amp_init(n, batch)
    else:
        src = np.ascontiguousarray(np.asarray(states, dtype=np.complex128).T)
    out = _amp_run(circuit, params, features, src, np.empty_like(src))
    return np.ascontiguousarray(out.T)


def expectations(states: np.ndarray, n_qubits: int,
                 observables: tuple[Observable, ...]) -> np.ndarray:
    """(batch, n_obs) array of <psi| O_k |psi> for diagonal Z-sum observables."""
    probs = np.abs(states) ** 2
    diags = np.stack([obs.diagonal(n_qubits) for obs in observables], axis=1)
    return probs @ diags


def circuit_unitary(circuit: Circuit, params: np.ndarray,
                    features_row: np.ndarray | None = None) -> np.ndarray:
    """Dense 2**n x 2**n unitary of the circuit (n <= 6).

    Encoder slots, if present, are bound to the single sample `features_row`.
    """
    n = circuit.n_qubits
    if n > 6:
        raise ValueError(f"circuit_unitary supports at most 6 qubits, got {n}")
    feats = None
    if features_row is not None:
        feats = np.asarray(features_row, dtype=float).reshape(1, -1)
    dim = 2 ** n
    basis = np.eye(dim, dtype=np.complex128)
    for op in circuit.ops:
        theta = resolve_angle(op.param, params, feats)
        if isinstance(theta, np.ndarray) and theta.ndim == 1:
            theta = theta[0]  # same sample for every basis column
        basis = apply_gate_batched(basis, n, op, theta)
    return basis.T  # row k held U|k>, i.e. column k of U


# --------------------------------------------------------------------------
# Single-state convenience API
# --------------------------------------------------------------------------

def apply_gate(state: StateVector, gate: Gate, angle: float | None = None) -> StateVector:
    """Apply one gate to a single state, returning a new StateVector.

    `angle` may be omitted when the gate carries a Fixed binding.
    """
    if gate.kind in PARAMETERIZED_KINDS:
        if angle is None and isinstance(gate.param, Fixed):
            angle = gate.param.angle
        if angle is None:
            raise ValueError(f"{gate.kind} needs an angle")
        if not np.isfinite(angle):
            raise ValueError("gate angle must be finite")
    batch = state.amplitudes[np.newaxis, :].copy()
    out = apply_gate_batched(batch, state.n_qubits, gate, angle)
    return StateVector(state.n_qubits, out[0])


def expectation(state: StateVector, obs: Observable) -> float:
    return float(np.abs(state.amplitudes) ** 2 @ obs.diagonal(state.n_qubits))


def apply_permutation(state: StateVector, perm: tuple[int, ...]) -> StateVector:
    out = apply_perm(state.amplitudes[np.newaxis, :], state.n_qubits, perm)
    return StateVector(state.n_qubits, out[0])


def fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """Pure-state fidelity |<psi|phi>|^2."""
    return float(np.abs(np.vdot(psi, phi)) ** 2)


def fidelity_matrix(states: np.ndarray) -> np.ndarray:
    """All-pairs pure-state fidelity for rows of `states`."""
    overlaps = states @ states.conj().T
    return np.abs(overlaps) ** 2
