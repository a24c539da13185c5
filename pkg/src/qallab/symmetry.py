"""Group representations, twirling, and numerical equivariance checks.

Representations are stored either as explicit small unitaries (the Z x Z
sign representation on 2 qubits) or as qubit permutations (board symmetries,
pair swaps); permutations materialize to dense matrices on demand.

Equivariance of a gate or circuit against a representation means vanishing
commutator with every element.  Circuits carrying feature bindings are
checked with all features at zero (the encoders here collapse to identity
there); data-dependent label invariance is a model-level statement tested
where predictions are made.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import Circuit, Feature, Gate, PARAMETERIZED_KINDS, apply_gate_batched, apply_perm, resolve_angle

THRESHOLD = 1e-10

ROTATE_90 = (6, 3, 0, 7, 4, 1, 8, 5, 2)  # corners 0>6>8>2, edges 1>3>7>5
FLIP_VERTICAL = (2, 1, 0, 5, 4, 3, 8, 7, 6)


def _compose(p, q):
    """Permutation of 'apply p, then q' under the position-map convention."""
    return tuple(q[p[i]] for i in range(len(p)))


@dataclass(frozen=True)
class GroupRep:
    name: str
    n_qubits: int
    perms: tuple[tuple[int, ...], ...] | None = None
    mats: tuple | None = None

    def __post_init__(self):
        if (self.perms is None) == (self.mats is None):
            raise ValueError("give exactly one of perms or mats")
        if self.perms is not None:
            ident = tuple(range(self.n_qubits))
            if ident not in self.perms:
                raise ValueError("representation must contain the identity")
            members = set(self.perms)
            if len(members) != len(self.perms):
                raise ValueError("duplicate elements")
            for a in self.perms:
                for b in self.perms:
                    if _compose(a, b) not in members:
                        raise ValueError("representation not closed under composition")
        else:
            dim = 2 ** self.n_qubits
            ident_found = any(np.allclose(m, np.eye(dim), atol=1e-12) for m in self.mats)
            if not ident_found:
                raise ValueError("representation must contain the identity")
            for a in self.mats:
                if a.shape != (dim, dim):
                    raise ValueError("element dimension mismatch")
                for b in self.mats:
                    prod = a @ b
                    if not any(np.allclose(prod, m, atol=1e-10) for m in self.mats):
                        raise ValueError("representation not closed under composition")

    @property
    def order(self) -> int:
        return len(self.perms) if self.perms is not None else len(self.mats)

    def matrices(self) -> list[np.ndarray]:
        if self.mats is not None:
            return [np.asarray(m, dtype=np.complex128) for m in self.mats]
        dim = 2 ** self.n_qubits
        out = []
        for perm in self.perms:
            basis = apply_perm(np.eye(dim, dtype=np.complex128), self.n_qubits, perm)
            out.append(basis.T.copy())  # row k held P|k>
        return out


def z2_zz() -> GroupRep:
    z = np.array([[1.0, 0.0], [0.0, -1.0]])
    return GroupRep("Z2_ZZ", 2, mats=(np.eye(4), np.kron(z, z)))


def d4_perm() -> GroupRep:
    """The 8 grid symmetries of 3x3 cells as qubit permutations."""
    ident = tuple(range(9))
    elements = {ident}
    frontier = [ident]
    while frontier:
        base = frontier.pop()
        for gen in (ROTATE_90, FLIP_VERTICAL):
            nxt = _compose(base, gen)
            if nxt not in elements:
                elements.add(nxt)
                frontier.append(nxt)
    assert len(elements) == 8
    return GroupRep("D4_PERM", 9, perms=tuple(sorted(elements)))


def swap_pair(n_qubits: int, a: int, b: int) -> GroupRep:
    ident = list(range(n_qubits))
    swapped = ident.copy()
    swapped[a], swapped[b] = b, a
    return GroupRep(f"SWAP_PAIR_{a}{b}", n_qubits, perms=(tuple(ident), tuple(swapped)))


def twirl(generator: np.ndarray, rep: GroupRep) -> np.ndarray:
    """Group-average R(g) G R(g)^dagger; the result commutes with every R(g)."""
    generator = np.asarray(generator, dtype=np.complex128)
    dim = 2 ** rep.n_qubits
    if generator.shape != (dim, dim):
        raise ValueError(f"generator shape {generator.shape} does not match dimension {dim}")
    mats = rep.matrices()
    acc = np.zeros_like(generator)
    for r in mats:
        acc += r @ generator @ r.conj().T
    return acc / len(mats)


@dataclass(frozen=True)
class EquivarianceReport:
    subject: str
    group: str
    trials: int
    max_deviation: float
    threshold: float = THRESHOLD

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.threshold


def _gate_unitary(gate: Gate, n_qubits: int, theta: float | None) -> np.ndarray:
    dim = 2 ** n_qubits
    basis = np.eye(dim, dtype=np.complex128)
    return apply_gate_batched(basis, n_qubits, gate, theta).T.copy()


def check_gate_equivariance(gate: Gate, rep: GroupRep, trials: int = 10,
                            rng: np.random.Generator | None = None) -> EquivarianceReport:
    """Max Frobenius commutator norm of the gate against every element."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng or np.random.default_rng(0)
    mats = rep.matrices()
    worst = 0.0
    n_angles = trials if gate.kind in PARAMETERIZED_KINDS else 1
    for _ in range(n_angles):
        theta = float(rng.uniform(-np.pi, np.pi)) if gate.kind in PARAMETERIZED_KINDS else None
        u = _gate_unitary(gate, rep.n_qubits, theta)
        for r in mats:
            worst = max(worst, float(np.linalg.norm(u @ r - r @ u)))
    return EquivarianceReport(gate.kind, rep.name, trials, worst)


def _bind_zero_features(circuit: Circuit) -> np.ndarray | None:
    needs = any(isinstance(op.param, Feature) for op in circuit.ops)
    return np.zeros((1, 16)) if needs else None


def check_circuit_equivariance(circuit: Circuit, rep: GroupRep, trials: int = 10,
                               rng: np.random.Generator | None = None,
                               states_per_element: int = 20) -> EquivarianceReport:
    """Commutation of the circuit with every element over random parameters.

    Up to 6 qubits the full unitaries are compared; beyond that the check
    applies circuit-then-permutation versus permutation-then-circuit to
    random statevectors.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if circuit.n_qubits != rep.n_qubits:
        raise ValueError("circuit and representation qubit counts differ")
    rng = rng or np.random.default_rng(0)
    n = circuit.n_qubits
    feats = _bind_zero_features(circuit)
    worst = 0.0
    if n <= 6:
        mats = rep.matrices()
        for _ in range(trials):
            params = rng.uniform(-np.pi, np.pi, size=circuit.n_params)
            u = _circuit_unitary_any(circuit, params, feats)
            for r in mats:
                worst = max(worst, float(np.linalg.norm(u @ r - r @ u)))
        return EquivarianceReport(f"circuit[{n}q]", rep.name, trials, worst)
    if rep.perms is None:
        raise ValueError("state-level check needs a permutation representation")
    dim = 2 ** n
    for _ in range(trials):
        params = rng.uniform(-np.pi, np.pi, size=circuit.n_params)
        psi = rng.normal(size=(states_per_element, dim)) + 1j * rng.normal(size=(states_per_element, dim))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        u_psi = _run(circuit, params, feats, psi.copy())
        for perm in rep.perms:
            left = apply_perm(u_psi.copy(), n, perm)
            right = _run(circuit, params, feats, apply_perm(psi.copy(), n, perm))
            worst = max(worst, float(np.abs(left - right).max()))
    return EquivarianceReport(f"circuit[{n}q]", rep.name, trials, worst)


def _run(circuit: Circuit, params, feats, states):
    for op in circuit.ops:
        theta = resolve_angle(op.param, params, feats)
        if isinstance(theta, np.ndarray) and theta.ndim == 1:
            theta = theta[0]
        states = apply_gate_batched(states, circuit.n_qubits, op, theta)
    return states


def _circuit_unitary_any(circuit: Circuit, params, feats) -> np.ndarray:
    dim = 2 ** circuit.n_qubits
    return _run(circuit, params, feats, np.eye(dim, dtype=np.complex128)).T.copy()
