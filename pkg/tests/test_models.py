"""Model construction, parameter counts, probability mappings, symmetries."""

import numpy as np
import pytest

from qallab.models import (
    CORNERS,
    EDGES,
    MIDDLE,
    TTT_SCALE_COMPACT,
    TTT_SCALE_DEFAULT,
    ModelSpec,
    accuracy,
    build,
    build_eqnnz,
    build_hea,
    build_ttt,
    encoder_states,
    expectations_for,
    init_params,
    onehot_targets,
    predict,
    predict_labels,
    predict_proba,
    proba_from_expectations,
    targets_for,
)
from qallab.simulator import Feature, circuit_unitary


class TestParameterCounts:
    def test_ring_model_3d(self):
        for d in (1, 2, 3, 5):
            assert build_eqnnz(d).n_params == 3 * d

    def test_layered_baseline_2d(self):
        for d in (1, 4, 6):
            assert build_hea(d).n_params == 2 * d

    def test_board_model_9ld(self):
        assert build_ttt(2, 5).n_params == 90
        for layers, depth in [(1, 1), (1, 3), (2, 2), (3, 1)]:
            assert build_ttt(layers, depth).n_params == 9 * layers * depth

    def test_spec_grid(self):
        for d in (1, 2, 4):
            assert build(ModelSpec("eqnn_z", depth=d)).n_params == ModelSpec("eqnn_z", depth=d).param_count
            assert build(ModelSpec("hea", depth=d)).n_params == ModelSpec("hea", depth=d).param_count
        spec = ModelSpec("ttt_eqnn", depth=5, layers=2)
        assert build(spec).n_params == spec.param_count == 90

    def test_depth_validated(self):
        with pytest.raises(ValueError):
            build_eqnnz(0)
        with pytest.raises(ValueError):
            build_hea(0)
        with pytest.raises(ValueError):
            build_ttt(0, 1)
        with pytest.raises(ValueError):
            build_ttt(1, 0)


class TestStructure:
    def test_ring_model_loads_data_once(self):
        model = build_eqnnz(3)
        feature_ops = [op for op in model.circuit.ops if isinstance(op.param, Feature)]
        assert len(feature_ops) == 4
        # every feature gate precedes every trainable gate
        kinds = [isinstance(op.param, Feature) for op in model.circuit.ops]
        assert kinds == sorted(kinds, reverse=True)

    def test_ring_model_block_layout(self):
        model = build_eqnnz(2)
        trained = [op.kind for op in model.circuit.ops if not isinstance(op.param, Feature)]
        assert trained == ["RXX", "RZ", "RZ", "RXX", "RZ", "RZ"]

    def test_layered_baseline_block_layout(self):
        model = build_hea(2)
        tail = [op.kind for op in model.circuit.ops[4:]]
        assert tail == ["RX", "RX", "CNOT", "RX", "RX", "CNOT"]

    def test_board_model_blocks_share_nine_slots(self):
        model = build_ttt(1, 1)
        slots = [op.param.index for op in model.circuit.ops
                 if op.param is not None and not isinstance(op.param, Feature)]
        assert sorted(set(slots)) == list(range(9))
        # 18 single-qubit rotations + 16 entanglers per block
        assert len(slots) == 34

    def test_board_model_observable_split(self):
        model = build_ttt(1, 1)
        qubit_sets = [tuple(q for _, q in obs.terms) for obs in model.observables]
        assert qubit_sets == [CORNERS, (MIDDLE,), EDGES]
        binary = build_ttt(1, 1, binary=True)
        assert [tuple(q for _, q in o.terms) for o in binary.observables] == [CORNERS, EDGES]
        assert binary.class_names == ("circle", "cross")

    def test_encoding_scale_variants(self):
        body = build_ttt(1, 1)
        caption = build_ttt(1, 1, encoding_scale=TTT_SCALE_COMPACT)
        s_body = body.circuit.ops[0].param.scale
        s_caption = caption.circuit.ops[0].param.scale
        assert s_body == pytest.approx(2 * np.pi / 3)
        assert s_caption == pytest.approx(2 / 3)
        board = np.full((1, 9), 1.0)
        params = init_params(body, np.random.default_rng(0))
        assert not np.allclose(expectations_for(body, params, board),
                               expectations_for(caption, params, board))

    def test_build_dispatch(self):
        assert build(ModelSpec("ttt_eqnn_binary", depth=2, layers=1)).class_names == ("circle", "cross")
        with pytest.raises(ValueError):
            ModelSpec("mlp", depth=1)


class TestProbabilities:
    def test_midpoint_expectation_gives_even_odds(self):
        p = proba_from_expectations(np.array([[0.0]]))
        assert np.allclose(p, [[0.5, 0.5]])

    def test_binary_renormalization(self):
        p = proba_from_expectations(np.array([[0.6], [-1.0]]))
        assert np.allclose(p, [[0.2, 0.8], [1.0, 0.0]])

    def test_softmax_of_equal_inputs_is_uniform(self):
        p = proba_from_expectations(np.array([[1.0, 1.0, 1.0]]))
        assert np.allclose(p, [[1 / 3, 1 / 3, 1 / 3]])

    def test_softmax_hand_value(self):
        p = proba_from_expectations(np.array([[1.0, -1.0, -1.0]]))
        e = np.exp([1.0, -1.0, -1.0])
        assert np.allclose(p, e / e.sum())
        assert p[0, 0] == pytest.approx(0.7870, abs=5e-5)
        assert p[0, 1] == pytest.approx(0.1065, abs=5e-5)

    def test_probabilities_normalized_and_bounded(self):
        rng = np.random.default_rng(2)
        for cols in (1, 2, 3):
            vals = rng.uniform(-1, 1, (20, cols))
            p = proba_from_expectations(vals)
            assert np.all(p >= 0) and np.all(p <= 1)
            assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)

    def test_argmax_tie_takes_lowest_class(self):
        model = build_ttt(1, 1)
        pred = predict(model, np.zeros(9), np.zeros(9))
        assert np.allclose(pred.raw_expectations, [1.0, 1.0, 1.0])
        assert np.allclose(pred.probabilities, 1 / 3)
        assert pred.label == 0

    def test_empty_board_identity_at_zero_params(self):
        model = build_ttt(2, 3)
        pred = predict(model, np.zeros(model.n_params), np.zeros(9))
        assert np.allclose(pred.raw_expectations, [1.0, 1.0, 1.0], atol=1e-12)


class TestLabelSymmetries:
    def test_ring_model_commutes_with_sign_flip(self):
        # the encoder collapses to identity at x = 0, leaving the trainable
        # blocks, whose generators all commute with Z(x)Z
        z = np.diag([1.0, -1.0])
        zz = np.kron(z, z)
        rng = np.random.default_rng(0)
        model = build_eqnnz(3)
        for _ in range(20):
            params = init_params(model, rng)
            u = circuit_unitary(model.circuit, params, np.zeros(2))
            assert np.linalg.norm(u @ zz - zz @ u) < 1e-10

    def test_ring_model_antipodal_prediction(self):
        rng = np.random.default_rng(1)
        model = build_eqnnz(3)
        for _ in range(100):
            params = init_params(model, rng)
            x = rng.uniform(-1, 1, (1, 2))
            a = predict_proba(model, params, x)
            b = predict_proba(model, params, -x)
            assert np.allclose(a, b, atol=1e-10)

    def test_layered_baseline_feature_swap_on_encoder_only(self):
        model = build_hea(6)
        rng = np.random.default_rng(3)
        x = rng.uniform(-1, 1, (50, 2))
        swapped = x[:, ::-1].copy()
        mean_z = model.observables[0].diagonal(2)
        a = np.abs(encoder_states(model, x)) ** 2 @ mean_z
        b = np.abs(encoder_states(model, swapped)) ** 2 @ mean_z
        assert np.allclose(a, b, atol=1e-10)

    def test_board_model_prediction_invariant_under_grid_symmetries(self):
        rotate = (6, 3, 0, 7, 4, 1, 8, 5, 2)
        flip = (2, 1, 0, 5, 4, 3, 8, 7, 6)
        rng = np.random.default_rng(4)
        model = build_ttt(1, 2)
        params = init_params(model, rng)
        for _ in range(25):
            g = rng.integers(-1, 2, 9).astype(float)
            base = predict(model, params, g).raw_expectations
            for perm in (rotate, flip):
                moved = np.empty(9)
                for i, p in enumerate(perm):
                    moved[p] = g[i]
                assert np.allclose(predict(model, params, moved).raw_expectations,
                                   base, atol=1e-10)


class TestTargetsAndAccuracy:
    def test_onehot_is_plus_minus_one(self):
        t = onehot_targets(np.array([0, 2, 1]), 3)
        assert np.array_equal(t, [[1, -1, -1], [-1, -1, 1], [-1, 1, -1]])

    def test_targets_follow_loss_kind(self):
        assert targets_for(build_eqnnz(1), np.array([0, 1])).shape == (2,)
        assert targets_for(build_ttt(1, 1), np.array([0, 1])).shape == (2, 3)

    def test_accuracy_against_hand_labels(self):
        model = build_ttt(1, 1)
        boards = np.zeros((4, 9))
        labels = predict_labels(model, np.zeros(9), boards)
        assert accuracy(model, np.zeros(9), boards, labels) == 1.0
        assert accuracy(model, np.zeros(9), boards, labels + 1) == 0.0

    def test_accuracy_empty_set(self):
        model = build_eqnnz(1)
        assert accuracy(model, np.zeros(3), np.zeros((0, 2)), np.zeros(0)) == 0.0
