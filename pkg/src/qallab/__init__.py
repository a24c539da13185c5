"""Quantum active-learning laboratory.

Dense statevector simulation of small equivariant variational circuits,
exact adjoint gradients with Adam training, deterministic toy datasets, and
pool-based active-learning campaigns with seven query strategies.
"""

from .active import CampaignConfig, PoolState, QueryRecord, StrategyKind, run_campaign
from .autodiff import AdamState, BceLoss, FitResult, GradientRecord, MseLoss, adam_step, fit, gradient, loss_and_gradient
from .data import Dataset, SplitDataset, binary_winner_subset, gen_dataset, load_dataset, split, write_dataset
from .models import Model, ModelSpec, Prediction, build, build_eqnnz, build_hea, build_ttt, init_params, predict, predict_labels, predict_proba
from .simulator import Circuit, Feature, Fixed, Gate, Observable, Slot, StateVector, apply_gate, apply_permutation, circuit_unitary, expectation, fidelity, fidelity_matrix, run_circuit
from .symmetry import EquivarianceReport, GroupRep, check_circuit_equivariance, check_gate_equivariance, d4_perm, twirl, z2_zz

__all__ = [
    "AdamState", "BceLoss", "CampaignConfig", "Circuit", "Dataset",
    "EquivarianceReport", "Feature", "FitResult", "Fixed", "Gate",
    "GradientRecord", "GroupRep", "Model", "ModelSpec", "MseLoss",
    "Observable", "PoolState", "Prediction", "QueryRecord", "Slot",
    "SplitDataset", "StateVector", "StrategyKind", "adam_step", "apply_gate",
    "apply_permutation", "binary_winner_subset", "build", "build_eqnnz",
    "build_hea", "build_ttt", "check_circuit_equivariance",
    "check_gate_equivariance", "circuit_unitary", "d4_perm", "expectation",
    "fidelity", "fidelity_matrix", "fit", "gen_dataset", "gradient",
    "init_params", "load_dataset", "loss_and_gradient", "predict",
    "predict_labels", "predict_proba", "run_campaign", "run_circuit",
    "split", "twirl", "write_dataset", "z2_zz",
]

__version__ = "0.1.0"
