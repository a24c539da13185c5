"""Exact gradients of expectation-based losses, plus the Adam optimizer.

Gradients come from a reverse (adjoint) pass through the statevector: one
forward run, then gates are undone one by one while a co-state carries the
loss sensitivity.  For a gate U(theta) = exp(-i theta G) sitting at position j,

    dL/dtheta_j = 2 * Im( <lambda_j| G |phi_j> ),

with phi_j the state just after gate j and lambda_j the observable-weighted
final state pulled back through the later gates.  This is exact for every
gate kind, including CRY whose generator has three distinct eigenvalues (so
the two-term parameter-shift rule would not apply).  Gates sharing a slot
accumulate their contributions into that slot.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .simulator import (
    Circuit,
    Gate,
    Observable,
    Slot,
    _amp_apply,
    _amp_ctrl_slices,
    _amp_init,
    _amp_run,
    _amp_view1,
    _amp_view2,
    resolve_angle,
)

_CLIP = 1e-12  # keeps log() finite when an expectation saturates at +-1


@dataclass(frozen=True)
class BceLoss:
    """Binary cross-entropy on the renormalized output (<O> + 1) / 2.

    Targets are 0/1 integers; the model must expose exactly one observable.
    """


@dataclass(frozen=True)
class MseLoss:
    """Mean squared error against +-1 one-hot targets over all observables."""


LossSpec = BceLoss | MseLoss


@dataclass
class GradientRecord:
    loss: float
    grad: np.ndarray


def loss_and_weights(exp_vals: np.ndarray, targets: np.ndarray, loss: LossSpec):
    """Return (total loss, dL/d<O_k> per sample) for a batch of expectations."""
    batch = exp_vals.shape[0]
    if isinstance(loss, BceLoss):
        if exp_vals.shape[1] != 1:
            raise ValueError("BCE loss needs exactly one observable")
        y = np.asarray(targets, dtype=float).reshape(batch, 1)
        yhat = (exp_vals + 1.0) / 2.0
        clipped = np.clip(yhat, _CLIP, 1.0 - _CLIP)
        value = -np.mean(y * np.log(clipped) + (1.0 - y) * np.log(1.0 - clipped))
        weights = (clipped - y) / (2.0 * clipped * (1.0 - clipped)) / batch
        weights[(yhat <= _CLIP) | (yhat >= 1.0 - _CLIP)] = 0.0
        return float(value), weights
    if isinstance(loss, MseLoss):
        y = np.asarray(targets, dtype=float)
        if y.shape != exp_vals.shape:
            raise ValueError(f"target shape {y.shape} != expectation shape {exp_vals.shape}")
        diff = exp_vals - y
        value = np.mean(np.sum(diff ** 2, axis=1))
        weights = 2.0 * diff / batch
        return float(value), weights
    raise ValueError(f"unknown loss spec {loss!r}")


_REDUCE_SUBS = {1: "a,a->", 2: "ab,ab->", 3: "abc,abc->", 4: "abcd,abcd->",
                5: "abcde,abcde->"}


def _dot_im(x, y) -> float:
    """Im(sum conj(x) * y) via real views, no temporaries."""
    sub = _REDUCE_SUBS[x.ndim]
    return np.einsum(sub, x.real, y.imag) - np.einsum(sub, x.imag, y.real)


def _dot_re(x, y) -> float:
    sub = _REDUCE_SUBS[x.ndim]
    return np.einsum(sub, x.real, y.real) + np.einsum(sub, x.imag, y.imag)


def _gen_overlap_im(lam, phi, n, op: Gate) -> float:
    """Im(<lam| G |phi>) summed over the batch, G the gate's generator.

    Works on amp-major buffers without materializing G|phi>: each generator
    only permutes/scales half-slices, so the overlap reduces to a few real
    dot products on views.
    """
    kind = op.kind
    if kind in ("RX", "RY", "RZ"):
        vl = _amp_view1(lam, n, op.qubits[0])
        vp = _amp_view1(phi, n, op.qubits[0])
        la, lb = vl[:, 0, :], vl[:, 1, :]
        pa, pb = vp[:, 0, :], vp[:, 1, :]
        if kind == "RX":
            return _dot_im(la, pb) + _dot_im(lb, pa)
        if kind == "RY":
            return _dot_re(lb, pa) - _dot_re(la, pb)
        return _dot_im(la, pa) - _dot_im(lb, pb)
    if kind == "RXX":
        qa, qb = sorted(op.qubits)
        vl = _amp_view2(lam, n, qa, qb)
        vp = _amp_view2(phi, n, qa, qb)
        return (_dot_im(vl[:, 0, :, 0, :], vp[:, 1, :, 1, :])
                + _dot_im(vl[:, 0, :, 1, :], vp[:, 1, :, 0, :])
                + _dot_im(vl[:, 1, :, 0, :], vp[:, 0, :, 1, :])
                + _dot_im(vl[:, 1, :, 1, :], vp[:, 0, :, 0, :]))
    if kind == "CRY":
        la, lb = _amp_ctrl_slices(lam, n, op.qubits[0], op.qubits[1])
        pa, pb = _amp_ctrl_slices(phi, n, op.qubits[0], op.qubits[1])
        return _dot_re(lb, pa) - _dot_re(la, pb)
    raise ValueError(f"gate kind {kind!r} has no generator")


def _amp_unapply(src, dst, n, op: Gate, theta):
    if op.kind in ("RX", "RY", "RZ", "RXX", "CRY"):
        return _amp_apply(src, dst, n, op, -theta)
    if op.kind in ("CNOT", "H"):
        return _amp_apply(src, dst, n, op, None)
    if op.kind == "PERM":
        inv = [0] * len(op.perm)
        for i, p in enumerate(op.perm):
            inv[p] = i
        return _amp_apply(src, dst, n, replace(op, perm=tuple(inv)), None)
    raise ValueError(f"unknown gate kind {op.kind!r}")


def loss_and_gradient(circuit: Circuit, observables: tuple[Observable, ...],
                      params: np.ndarray, features: np.ndarray | None,
                      targets: np.ndarray, loss: LossSpec) -> GradientRecord:
    """Loss and exact parameter gradient over a batch of samples."""
    params = np.asarray(params, dtype=float)
    if not np.all(np.isfinite(params)):
        raise ValueError("parameters must be finite")
    n = circuit.n_qubits
    batch = 1 if features is None else len(features)
    phi = _amp_run(circuit, params, features, _amp_init(n, batch), np.empty((2 ** n, batch), dtype=np.complex128))
    probs = phi.real ** 2 + phi.imag ** 2
    diags = np.stack([obs.diagonal(n) for obs in observables], axis=1)
    exp_vals = probs.T @ diags
    value, weights = loss_and_weights(exp_vals, targets, loss)

    lam = (diags @ weights.T) * phi

    phi_spare = np.empty_like(phi)
    lam_spare = np.empty_like(lam)
    grad = np.zeros_like(params)
    for op in reversed(circuit.ops):
        theta = resolve_angle(op.param, params, features)
        if isinstance(op.param, Slot):
            grad[op.param.index] += 2.0 * _gen_overlap_im(lam, phi, n, op)
        phi, phi_spare = _amp_unapply(phi, phi_spare, n, op, theta)
        lam, lam_spare = _amp_unapply(lam, lam_spare, n, op, theta)
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise FloatingPointError(f"non-finite gradient at parameter slot {bad}")
    return GradientRecord(value, grad)


def gradient(circuit: Circuit, observables: tuple[Observable, ...], params: np.ndarray,
             sample: np.ndarray, target, loss: LossSpec) -> GradientRecord:
    """Single-sample convenience wrapper around `loss_and_gradient`."""
    features = np.asarray(sample, dtype=float).reshape(1, -1)
    targets = np.asarray(target).reshape(1, -1) if isinstance(loss, MseLoss) else np.asarray([target])
    return loss_and_gradient(circuit, observables, params, features, targets, loss)


# --------------------------------------------------------------------------
# Adam
# --------------------------------------------------------------------------

@dataclass
class AdamState:
    step: int
    first_moment: np.ndarray
    second_moment: np.ndarray
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def init(cls, n_params: int, learning_rate: float = 0.1) -> "AdamState":
        return cls(0, np.zeros(n_params), np.zeros(n_params), learning_rate)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray):
    """One bias-corrected Adam update; returns (new state, new params)."""
    if params.shape != grad.shape or params.shape != state.first_moment.shape:
        raise ValueError("parameter/gradient/moment shapes disagree")
    t = state.step + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad ** 2
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = replace(state, step=t, first_moment=m, second_moment=v)
    return new_state, new_params


# --------------------------------------------------------------------------
# Training loop (full-batch by default, per-sample as config alternative)
# --------------------------------------------------------------------------

@dataclass
class FitResult:
    params: np.ndarray       # best-validation checkpoint
    val_acc: float
    best_epoch: int          # 0 means the starting parameters were never beaten
    final_params: np.ndarray
    loss_history: list[float]


def fit(circuit: Circuit, observables: tuple[Observable, ...], params0: np.ndarray,
        features: np.ndarray, targets: np.ndarray, loss: LossSpec, epochs: int,
        val_eval, learning_rate: float = 0.1,
        update_mode: str = "full_batch",
        rng: np.random.Generator | None = None) -> FitResult:
    """Adam training with best-validation checkpointing.

    `val_eval(params) -> float` scores a parameter vector on the validation
    set; the best score seen (starting parameters included) decides the
    returned checkpoint, earliest epoch winning ties.  An empty training set
    leaves the parameters untouched.

    `per_sample` takes one Adam step per training sample; with `rng` given
    the visit order is reshuffled every epoch, otherwise it follows the
    dataset order.
    """
    if update_mode not in ("full_batch", "per_sample"):
        raise ValueError(f"unknown update_mode {update_mode!r}")
    params = np.array(params0, dtype=float)
    best_params = params.copy()
    best_val = val_eval(params)
    best_epoch = 0
    history: list[float] = []
    if len(features) == 0 or epochs == 0:
        return FitResult(best_params, best_val, 0, params, history)

    adam = AdamState.init(len(params), learning_rate)
    for epoch in range(1, epochs + 1):
        if update_mode == "full_batch":
            record = loss_and_gradient(circuit, observables, params, features, targets, loss)
            adam, params = adam_step(adam, params, record.grad)
            history.append(record.loss)
        else:
            order = np.arange(len(features)) if rng is None else rng.permutation(len(features))
            epoch_loss = 0.0
            for i in order:
                record = loss_and_gradient(circuit, observables, params,
                                           features[i:i + 1], targets[i:i + 1], loss)
                adam, params = adam_step(adam, params, record.grad)
                epoch_loss += record.loss
            history.append(epoch_loss / len(features))
        val = val_eval(params)
        if val > best_val:
            best_val = val
            best_params = params.copy()
            best_epoch = epoch
    return FitResult(best_params, best_val, best_epoch, params, history)
