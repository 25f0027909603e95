"""Training losses, discriminator-derived importance weights and adversarial plumbing.

Three losses drive the weighted adversarial procedure:

* :func:`loss_inv` — binary cross-entropy of the domain discriminator
  (source labelled 1, target labelled 0);
* :func:`loss_tsf` — the label-weighted analogue for the label-domain
  discriminator, where class predictions act as soft masks and source
  samples carry importance weights;
* :func:`loss_cls` — weighted source cross-entropy for the classifier.

Importance weights are a pure function of the domain discriminator's
logits, ``w = exp(-logit / tau)``; they are computed from plain arrays,
never from tape nodes, so no gradient ever flows through them. Class
predictions entering :func:`loss_tsf` and :func:`cdan_feature` are plain
arrays for the same reason: discriminators treat pseudo-labels as data.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import PROB_EPS
from .errors import ContractError, DegenerateBatchError, DimensionError


def weights_from_discriminator(logits, tau: float = 1.0) -> np.ndarray:
    """Importance weights (1 - sigma(l/tau)) / sigma(l/tau) = exp(-l/tau).

    ``logits`` are the domain discriminator's pre-sigmoid outputs on source
    samples. Large tau flattens all weights toward 1; tau = 1 recovers the
    raw density-ratio estimate. Finite logits always give finite weights.
    """
    if tau < 1.0:
        raise ContractError(f"tau must be >= 1, got {tau}")
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    return np.exp(-logits / tau)


def renormalize_weights(weights) -> np.ndarray:
    """Rescale so the batch mean is exactly 1 (unit source expectation)."""
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    total = w.sum()
    if total <= 0.0:
        raise DegenerateBatchError("all importance weights are zero")
    return w * (w.size / total)


def _clamped_log(node: ad.Node) -> ad.Node:
    return ad.log(ad.clip(node, PROB_EPS, 1.0 - PROB_EPS))


def _one_minus(node: ad.Node) -> ad.Node:
    return ad.shift(ad.neg(node), 1.0)


def loss_inv(d_src: ad.Node, d_tgt: ad.Node, weights=None) -> ad.Node:
    """Domain-discriminator BCE: mean -log d(z_S) + mean -log(1 - d(z_T)).

    ``weights``, when given, multiply the per-sample source terms (the
    weighted variant of the invariance objective); they are constants.
    """
    if d_src.value.shape[1] != 1 or d_tgt.value.shape[1] != 1:
        raise DimensionError("domain discriminator outputs must be (n, 1) columns")
    src = ad.neg(_clamped_log(d_src))
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64).reshape(-1, 1)
        if w.shape[0] != d_src.value.shape[0]:
            raise DimensionError("weight count does not match the source batch")
        src = ad.mul(src, d_src.tape.leaf(w))
    tgt = ad.neg(_clamped_log(_one_minus(d_tgt)))
    return ad.add(ad.mean_all(src), ad.mean_all(tgt))


def loss_tsf(dd_src: ad.Node, dd_tgt: ad.Node, g_src: np.ndarray,
             g_tgt: np.ndarray, weights=None) -> ad.Node:
    """Label-domain discriminator loss with prediction masks and source weights.

    mean_i -w_i * g(z_S,i) . log dd(z_S,i)  +  mean_j -g(z_T,j) . log(1 - dd(z_T,j))

    ``g_src``/``g_tgt`` are probability rows from the classifier, passed as
    plain arrays: updates through this loss never differentiate the
    pseudo-label factor.
    """
    g_src = np.asarray(g_src, dtype=np.float64)
    g_tgt = np.asarray(g_tgt, dtype=np.float64)
    if g_src.shape != dd_src.value.shape or g_tgt.shape != dd_tgt.value.shape:
        raise DimensionError("classifier rows must match discriminator outputs")
    n_src, n_tgt = g_src.shape[0], g_tgt.shape[0]
    if weights is None:
        coeff_src = g_src
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n_src:
            raise DimensionError("weight count does not match the source batch")
        coeff_src = w[:, None] * g_src
    tape = dd_src.tape
    src = ad.sum_all(ad.mul(tape.leaf(coeff_src), _clamped_log(dd_src)))
    tgt = ad.sum_all(ad.mul(tape.leaf(g_tgt), _clamped_log(_one_minus(dd_tgt))))
    return ad.add(ad.scale(src, -1.0 / n_src), ad.scale(tgt, -1.0 / n_tgt))


def loss_cls(g_out: ad.Node, labels: np.ndarray, weights=None) -> ad.Node:
    """Weighted source cross-entropy: mean -w_i * y_i . log g(z_i)."""
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != g_out.value.shape:
        raise DimensionError("labels must match the classifier output shape")
    n = labels.shape[0]
    if weights is None:
        coeff = labels
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n:
            raise DimensionError("weight count does not match the batch")
        coeff = w[:, None] * labels
    ce = ad.sum_all(ad.mul(g_out.tape.leaf(coeff), _clamped_log(g_out)))
    return ad.scale(ce, -1.0 / n)


def entropy_regularizer(g_tgt: ad.Node) -> ad.Node:
    """Mean prediction entropy on the target batch: mean_j -g_j . log g_j."""
    n = g_tgt.value.shape[0]
    total = ad.sum_all(ad.mul(g_tgt, _clamped_log(g_tgt)))
    return ad.scale(total, -1.0 / n)


def cdan_feature(g_probs: np.ndarray, z: ad.Node) -> ad.Node:
    """Row-wise flattened outer product g_i (x) z_i, shape (n, C*r).

    Block c of row i is g_probs[i, c] * z_i. The prediction factor is a
    constant array (pseudo-labels as data); gradients flow through z only.
    """
    g_probs = np.asarray(g_probs, dtype=np.float64)
    n, r = z.value.shape
    if g_probs.shape[0] != n:
        raise DimensionError("prediction rows must match the representation batch")
    c = g_probs.shape[1]
    value = (g_probs[:, :, None] * z.value[:, None, :]).reshape(n, c * r)

    def bwd(g):
        z.grad += np.einsum("nc,ncr->nr", g_probs, g.reshape(n, c, r))

    return z.tape.emit(value, "cdan_feature", (z,), bwd)
