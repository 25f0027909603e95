"""MLP building blocks, the SGD optimizer and the training-progress schedules.

Every network in the training system (feature extractor, classifier, the two
discriminators) is a plain fully-connected relu stack described by
:class:`MLPSpec`. Parameters are bare numpy arrays; a fresh tape rebuilds the
graph each time gradients are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import backend
from .errors import ContractError, DimensionError, PoisonedUpdateError

HEADS = ("linear", "sigmoid", "softmax")


@dataclass(frozen=True)
class MLPSpec:
    """Layer widths (input first), hidden activation is relu throughout."""

    widths: tuple[int, ...]
    head: str = "linear"
    seed: int = 0

    def __post_init__(self):
        if len(self.widths) < 2:
            raise ContractError("an MLP needs at least an input and an output width")
        if any(w <= 0 for w in self.widths):
            raise ContractError(f"widths must be positive, got {self.widths}")
        if self.head not in HEADS:
            raise ContractError(f"head must be one of {HEADS}, got {self.head!r}")

    @property
    def in_dim(self) -> int:
        return self.widths[0]

    @property
    def out_dim(self) -> int:
        return self.widths[-1]


def init_mlp(spec: MLPSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Fan-balanced uniform weights, zero biases, reproducible from the seed.

    Each weight entry is drawn from U(-a, +a) with a = sqrt(6 / (fan_in +
    fan_out)); the same seed always yields bit-identical parameters.
    """
    rng = np.random.default_rng(spec.seed)
    params = []
    for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        b = np.zeros((1, fan_out))
        params.append((w, b))
    return params


def params_to_nodes(tape: ad.Tape, params) -> list[tuple[ad.Node, ad.Node]]:
    return [(tape.leaf(w), tape.leaf(b)) for w, b in params]


def forward(spec: MLPSpec, param_nodes, x: ad.Node, apply_head: bool = True) -> ad.Node:
    """Tape forward pass. With ``apply_head=False`` the raw logits come back."""
    if x.value.shape[1] != spec.in_dim:
        raise DimensionError(
            f"batch width {x.value.shape[1]} does not match input width {spec.in_dim}"
        )
    h = x
    last = len(param_nodes) - 1
    for i, (w, b) in enumerate(param_nodes):
        h = ad.add(ad.matmul(h, w), b)
        if i < last:
            h = ad.relu(h)
    if not apply_head or spec.head == "linear":
        return h
    if spec.head == "sigmoid":
        return ad.sigmoid(h)
    return ad.softmax_rows(h)


def predict(spec: MLPSpec, params, x: np.ndarray, apply_head: bool = True) -> np.ndarray:
    """Plain numpy forward pass (no tape); agrees with :func:`forward` exactly."""
    if x.shape[1] != spec.in_dim:
        raise DimensionError(
            f"batch width {x.shape[1]} does not match input width {spec.in_dim}"
        )
    h = x
    last = len(params) - 1
    for i, (w, b) in enumerate(params):
        h = h @ w + b
        if i < last:
            h = backend.relu(h)
    if not apply_head or spec.head == "linear":
        return h
    if spec.head == "sigmoid":
        return backend.sigmoid(h)
    return backend.softmax_rows(h)


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------


@dataclass
class OptimizerState:
    """Heavy-ball SGD state; velocity buffers mirror the parameter shapes."""

    base_lr: float
    momentum: float = 0.0
    weight_decay: float = 0.0
    velocities: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, base_lr, momentum=0.0, weight_decay=0.0):
        state = cls(base_lr=base_lr, momentum=momentum, weight_decay=weight_decay)
        state.velocities = [
            (np.zeros_like(w), np.zeros_like(b)) for w, b in params
        ]
        return state


def sgd_step(state: OptimizerState, params, grads, lr: float):
    """v <- momentum*v + grad + wd*param; param <- param - lr*v (in place).

    A non-finite gradient aborts the step before any buffer is touched.
    """
    if len(params) != len(state.velocities) or len(grads) != len(params):
        raise DimensionError("parameter, gradient and velocity layouts disagree")
    for gw, gb in grads:
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            raise PoisonedUpdateError("non-finite gradient; update aborted")
    for (w, b), (gw, gb), (vw, vb) in zip(params, grads, state.velocities):
        backend.sgd_momentum_update(w, gw, vw, lr, state.momentum, state.weight_decay)
        backend.sgd_momentum_update(b, gb, vb, lr, state.momentum, state.weight_decay)


# ---------------------------------------------------------------------------
# schedules, all indexed by training progress p in [0, 1]
# ---------------------------------------------------------------------------


def _check_progress(p):
    if not 0.0 <= p <= 1.0:
        raise ContractError(f"training progress must lie in [0, 1], got {p}")


def lambda_schedule(p: float, gamma: float = 10.0) -> float:
    """Adversarial trade-off annealed from 0 toward 1: 2/(1+exp(-gamma*p)) - 1."""
    _check_progress(p)
    if gamma < 0.0:
        raise ContractError(f"gamma must be >= 0, got {gamma}")
    return 2.0 / (1.0 + math.exp(-gamma * p)) - 1.0


def tau_schedule(p: float, tau_max: float = 5.0, tau_min: float = 1.0,
                 alpha: float = 5.0) -> float:
    """Weight-relaxation temperature, decreasing from tau_max toward tau_min.

    tau(p) = tau_min + 2*(tau_max - tau_min) / (1 + exp(+alpha*p)); the
    positive sign in the exponent makes tau(0) = tau_max exactly and tau
    strictly decreasing, matching the stated endpoints.
    """
    _check_progress(p)
    if not tau_max >= tau_min >= 1.0:
        raise ContractError(f"need tau_max >= tau_min >= 1, got {tau_max}, {tau_min}")
    if alpha <= 0.0:
        raise ContractError(f"alpha must be > 0, got {alpha}")
    return tau_min + 2.0 * (tau_max - tau_min) / (1.0 + math.exp(alpha * p))


def lr_schedule(p: float, eta0: float) -> float:
    """Polynomial decay eta0 / (1 + 10 p)^0.75."""
    _check_progress(p)
    return eta0 / (1.0 + 10.0 * p) ** 0.75


@dataclass(frozen=True)
class ScheduleSet:
    """Bundle of the progress-indexed constants one training run uses."""

    lambda_gamma: float = 10.0
    tau_max: float = 5.0
    tau_min: float = 1.0
    alpha: float = 5.0
    eta0: float = 0.05

    def lam(self, p: float) -> float:
        return lambda_schedule(p, self.lambda_gamma)

    def tau(self, p: float) -> float:
        return tau_schedule(p, self.tau_max, self.tau_min, self.alpha)

    def lr(self, p: float) -> float:
        return lr_schedule(p, self.eta0)
