"""Group representations, twirling, and equivariance checks."""

import numpy as np
import pytest

from qallab.models import build_eqnnz, build_hea, build_ttt
from qallab.simulator import Gate, Slot
from qallab.symmetry import (
    FLIP_VERTICAL,
    ROTATE_90,
    GroupRep,
    check_circuit_equivariance,
    check_gate_equivariance,
    d4_perm,
    swap_pair,
    twirl,
    z2_zz,
)

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])


class TestTwirl:
    def test_z_on_first_qubit_unchanged(self):
        g = np.kron(Z, I2)
        assert np.allclose(twirl(g, z2_zz()), g, atol=1e-12)

    def test_xx_unchanged(self):
        g = np.kron(X, X)
        assert np.allclose(twirl(g, z2_zz()), g, atol=1e-12)

    def test_x_on_first_qubit_vanishes(self):
        g = np.kron(X, I2)
        assert np.allclose(twirl(g, z2_zz()), np.zeros((4, 4)), atol=1e-12)

    def test_single_qubit_x_under_z_vanishes(self):
        rep = GroupRep("Z_ON_ONE", 1, mats=(np.eye(2), Z))
        assert np.allclose(twirl(X, rep), np.zeros((2, 2)), atol=1e-12)

    def test_x0_under_swap_02_averages(self):
        rep = swap_pair(3, 0, 2)
        g = np.kron(np.kron(X, I2), I2)
        want = 0.5 * (g + np.kron(np.kron(I2, I2), X))
        assert np.allclose(twirl(g, rep), want, atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((4, 4))
        g = (h + h.T) / 2
        once = twirl(g, z2_zz())
        assert np.allclose(twirl(once, z2_zz()), once, atol=1e-12)

    def test_output_commutes_with_every_element(self):
        rng = np.random.default_rng(1)
        for rep in (z2_zz(), d4_perm()):
            dim = 2 ** rep.n_qubits
            h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            g = (h + h.conj().T) / 2
            out = twirl(g, rep)
            for r in rep.matrices():
                assert np.linalg.norm(out @ r - r @ out) < 1e-12 * dim

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            twirl(np.eye(2), z2_zz())


class TestGroupReps:
    def test_z2_order(self):
        assert z2_zz().order == 2

    def test_d4_order_and_relations(self):
        rep = d4_perm()
        assert rep.order == 8
        ident = tuple(range(9))

        def compose(p, q):
            return tuple(q[p[i]] for i in range(9))

        r4 = ident
        for _ in range(4):
            r4 = compose(r4, ROTATE_90)
        assert r4 == ident
        assert compose(FLIP_VERTICAL, FLIP_VERTICAL) == ident
        rf = compose(ROTATE_90, FLIP_VERTICAL)
        assert compose(rf, rf) == ident
        # non-abelian: rotate-then-flip differs from flip-then-rotate
        assert rf != compose(FLIP_VERTICAL, ROTATE_90)

    def test_permutation_matrices_are_orthogonal(self):
        rep = swap_pair(2, 0, 1)
        for m in rep.matrices():
            assert np.allclose(m @ m.T, np.eye(4), atol=1e-12)
            assert set(np.unique(m)) <= {0.0, 1.0}

    def test_missing_identity_rejected(self):
        with pytest.raises(ValueError):
            GroupRep("BAD", 1, mats=(Z,))

    def test_not_closed_rejected(self):
        rot = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
        with pytest.raises(ValueError):
            GroupRep("BAD", 1, mats=(np.eye(2), rot))
        with pytest.raises(ValueError):
            GroupRep("BAD", 3, perms=((0, 1, 2), (1, 2, 0)))

    def test_exactly_one_element_source(self):
        with pytest.raises(ValueError):
            GroupRep("BAD", 1)
        with pytest.raises(ValueError):
            GroupRep("BAD", 1, mats=(np.eye(2),), perms=((0,),))


class TestGateEquivariance:
    def test_rz_commutes_with_zz(self):
        report = check_gate_equivariance(Gate("RZ", (0,), Slot(0)), z2_zz())
        assert report.passed

    def test_rxx_commutes_with_zz(self):
        report = check_gate_equivariance(Gate("RXX", (0, 1), Slot(0)), z2_zz())
        assert report.passed

    def test_rx_breaks_zz(self):
        rng = np.random.default_rng(0)
        report = check_gate_equivariance(Gate("RX", (0,), Slot(0)), z2_zz(), rng=rng)
        assert not report.passed
        assert report.max_deviation > 0.1

    def test_cnot_anticommutes_on_target(self):
        # CNOT conjugates Z on the target into Z0 Z1, so [CNOT, Z(x)Z] has
        # Frobenius norm 2*sqrt(2); the gate is not Z(x)Z-equivariant.
        report = check_gate_equivariance(Gate("CNOT", (0, 1)), z2_zz())
        assert not report.passed
        assert report.max_deviation == pytest.approx(2.0 * np.sqrt(2.0), abs=1e-12)

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            check_gate_equivariance(Gate("RZ", (0,), Slot(0)), z2_zz(), trials=0)


class TestCircuitEquivariance:
    def test_ring_model_commutes_with_zz(self):
        for depth in (1, 3):
            model = build_eqnnz(depth)
            report = check_circuit_equivariance(model.circuit, z2_zz(), trials=10)
            assert report.passed, report

    def test_layered_baseline_fails_zz(self):
        model = build_hea(6)
        report = check_circuit_equivariance(model.circuit, z2_zz(), trials=10)
        assert not report.passed
        assert report.max_deviation > 1e-3

    def test_board_model_invariant_under_grid_symmetries(self):
        model = build_ttt(1, 2)
        report = check_circuit_equivariance(model.circuit, d4_perm(), trials=3)
        assert report.passed, report

    def test_board_model_not_invariant_under_wrong_group(self):
        # an arbitrary non-symmetry permutation must break invariance
        bad = GroupRep("CYCLE", 9, perms=(tuple(range(9)),
                                          (1, 2, 0, 3, 4, 5, 6, 7, 8),
                                          (2, 0, 1, 3, 4, 5, 6, 7, 8)))
        model = build_ttt(1, 2)
        report = check_circuit_equivariance(model.circuit, bad, trials=3)
        assert not report.passed

    def test_qubit_count_mismatch(self):
        model = build_eqnnz(1)
        with pytest.raises(ValueError):
            check_circuit_equivariance(model.circuit, d4_perm())
