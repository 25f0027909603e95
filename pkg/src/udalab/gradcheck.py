"""Finite-difference verification of tape gradients on random training graphs.

Each case wires up a small feature extractor, a softmax classifier and a
sigmoid domain discriminator reached through a gradient-reversal layer,
mirroring the structures the trainer builds. Reversal layers intentionally
break the analytic-gradient/forward-value relationship, so the reference is
computed per parameter group: the reversed branch enters the finite
difference with its sign flipped and scaled for parameters upstream of the
reversal, unchanged for parameters downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import losses, nn
from .datasets import one_hot

FD_STEP = 1e-5


@dataclass
class CaseReport:
    seed: int
    description: str
    max_rel_err: float


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1.0)
    return float((np.abs(a - b) / denom).max())


def _flatten(params_by_net):
    """(net_name, layer, which) indexed list of arrays, for uniform FD loops."""
    out = []
    for name, params in params_by_net.items():
        for layer, (w, b) in enumerate(params):
            out.append((name, layer, 0, w))
            out.append((name, layer, 1, b))
    return out


class _Case:
    """One random graph: classification branch plus reversed discriminator branch."""

    def __init__(self, seed: int):
        rng = np.random.default_rng(seed)
        in_dim = int(rng.integers(2, 6))
        batch = int(rng.integers(3, 7))
        hidden = int(rng.integers(3, 9))
        repr_dim = int(rng.integers(3, 7))
        num_classes = int(rng.integers(2, 5))

        def net_seed():
            return int(rng.integers(2**31))

        self.phi_spec = nn.MLPSpec((in_dim, hidden, repr_dim), head="linear", seed=net_seed())
        self.g_spec = nn.MLPSpec((repr_dim, num_classes), head="softmax", seed=net_seed())
        self.d_spec = nn.MLPSpec((repr_dim, int(rng.integers(2, 6)), 1), head="sigmoid",
                                 seed=net_seed())
        self.params = {
            "phi": nn.init_mlp(self.phi_spec),
            "g": nn.init_mlp(self.g_spec),
            "d": nn.init_mlp(self.d_spec),
        }
        self.x_src = rng.normal(size=(batch, in_dim))
        self.x_tgt = rng.normal(size=(batch, in_dim))
        self.labels = one_hot(rng.integers(0, num_classes, batch), num_classes)
        self.weights = rng.uniform(0.5, 1.5, batch)
        self.strength = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
        self.use_entropy = bool(rng.integers(0, 2))
        self.description = (
            f"in={in_dim} b={batch} h={hidden} r={repr_dim} C={num_classes} "
            f"grl={self.strength} ent={self.use_entropy}"
        )

    def _branches(self, params, with_reversal: bool):
        tape = ad.Tape()
        nodes = {name: nn.params_to_nodes(tape, p) for name, p in params.items()}
        z_s = nn.forward(self.phi_spec, nodes["phi"], tape.leaf(self.x_src))
        z_t = nn.forward(self.phi_spec, nodes["phi"], tape.leaf(self.x_tgt))
        g_s = nn.forward(self.g_spec, nodes["g"], z_s)
        cls = losses.loss_cls(g_s, self.labels, self.weights)
        if self.use_entropy:
            g_t = nn.forward(self.g_spec, nodes["g"], z_t)
            cls = ad.add(cls, losses.entropy_regularizer(g_t))
        if with_reversal:
            z_s, z_t = (ad.gradient_reversal(z_s, self.strength),
                        ad.gradient_reversal(z_t, self.strength))
        d_s = nn.forward(self.d_spec, nodes["d"], z_s)
        d_t = nn.forward(self.d_spec, nodes["d"], z_t)
        disc = losses.loss_inv(d_s, d_t)
        return tape, nodes, cls, disc

    def analytic_gradients(self):
        tape, nodes, cls, disc = self._branches(self.params, with_reversal=True)
        ad.backward(tape, ad.add(cls, disc))
        return {name: [(w.grad, b.grad) for w, b in layer_nodes]
                for name, layer_nodes in nodes.items()}

    def term_values(self, params):
        _, _, cls, disc = self._branches(params, with_reversal=False)
        return cls.value[0, 0], disc.value[0, 0]

    def fd_gradients(self):
        refs = {name: [(np.zeros_like(w), np.zeros_like(b)) for w, b in p]
                for name, p in self.params.items()}
        for name, layer, which, arr in _flatten(self.params):
            grad = refs[name][layer][which]
            # the discriminator branch reaches phi only through the reversal
            disc_sign = -self.strength if name == "phi" else 1.0
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + FD_STEP
                cls_hi, disc_hi = self.term_values(self.params)
                arr[idx] = orig - FD_STEP
                cls_lo, disc_lo = self.term_values(self.params)
                arr[idx] = orig
                d_cls = (cls_hi - cls_lo) / (2.0 * FD_STEP)
                d_disc = (disc_hi - disc_lo) / (2.0 * FD_STEP)
                grad[idx] = d_cls + disc_sign * d_disc
        return refs

    def run(self) -> float:
        analytic = self.analytic_gradients()
        reference = self.fd_gradients()
        worst = 0.0
        for name in self.params:
            for (aw, ab), (rw, rb) in zip(analytic[name], reference[name]):
                worst = max(worst, _rel_err(aw, rw), _rel_err(ab, rb))
        return worst


def run_grad_check(num_graphs: int = 20, base_seed: int = 0):
    """Check ``num_graphs`` random graphs; returns (max_rel_err, case reports)."""
    reports = []
    for i in range(num_graphs):
        case = _Case(base_seed + i)
        reports.append(CaseReport(base_seed + i, case.description, case.run()))
    return max(r.max_rel_err for r in reports), reports
