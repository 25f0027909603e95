"""Closed-form values of the invariance/transferability quantities.

Every supremum here ranges over a coordinate-bounded critic family and the
objective is linear (or separable) in the critic's coordinates, so the
optimum sits at coordinatewise extremes and collapses to a weighted L1
expression. ``bruteforce`` re-derives the same numbers by enumeration.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import ContractError
from .instance import CriticFamily, DiscreteInstance, validate_weights


class LabellingTable(NamedTuple):
    table: np.ndarray  # (C, m), columns are conditional class probabilities
    zero_mass: np.ndarray  # (m,) bool, True where the column had no mass


def labelling_function(inst: DiscreteInstance, domain: str) -> LabellingTable:
    """Conditional class probabilities f_D(c | z) = p_D(c, z) / p_D(z).

    Columns with zero marginal mass return the uniform vector and are
    flagged rather than raising; they carry no risk or IPM contribution.
    """
    joint = inst.joint(domain)
    marginal = joint.sum(axis=0)
    zero = marginal == 0.0
    safe = np.where(zero, 1.0, marginal)
    table = joint / safe
    if np.any(zero):
        table = table.copy()
        table[:, zero] = 1.0 / inst.num_classes
    return LabellingTable(table, zero)


def _weighted_source_z(inst: DiscreteInstance, w) -> np.ndarray:
    return validate_weights(inst, w) * inst.z_marginal("source")


def inv_exact(inst: DiscreteInstance, fam: CriticFamily) -> float:
    """sup over bounded scalar critics of E_T[f] - E_S[f].

    The optimal critic is b * sign(p_T(z) - p_S(z)), giving
    b * sum_z |p_T(z) - p_S(z)|.
    """
    diff = inst.z_marginal("target") - inst.z_marginal("source")
    return fam.b_scalar * float(np.abs(diff).sum())


def inv_weighted_exact(inst: DiscreteInstance, w, fam: CriticFamily) -> float:
    """Same with the source marginal reweighted to w(z) p_S(z)."""
    diff = inst.z_marginal("target") - _weighted_source_z(inst, w)
    return fam.b_scalar * float(np.abs(diff).sum())


def tsf_exact(inst: DiscreteInstance, fam: CriticFamily) -> float:
    """sup over bounded vector critics of E_T[Y.f(Z)] - E_S[Y.f(Z)].

    Separates per (class, point) cell: b * sum |p_T(c, z) - p_S(c, z)|.
    """
    return fam.b_vec * float(np.abs(inst.p_t - inst.p_s).sum())


def tsf_weighted_exact(inst: DiscreteInstance, w, fam: CriticFamily) -> float:
    w = validate_weights(inst, w)
    return fam.b_vec * float(np.abs(inst.p_t - w[None, :] * inst.p_s).sum())


def tsf_hat_exact(inst: DiscreteInstance, w, g, fam: CriticFamily) -> float:
    """Transferability with target labels replaced by predictor columns g[., z]."""
    g = _check_prediction_table(inst, g)
    w = validate_weights(inst, w)
    lhs = inst.z_marginal("target")[None, :] * g
    rhs = w[None, :] * inst.p_s
    return fam.b_vec * float(np.abs(lhs - rhs).sum())


def d_fc_exact(inst: DiscreteInstance, fam: CriticFamily) -> float:
    """sup over critic pairs of |E_S ||f - f'||^2 - E_T ||f - f'||^2|.

    The squared disagreement at one point ranges over [0, 4 C b^2]
    independently of other points, so the optimum pushes it to the top on
    the cells favouring one domain and to zero elsewhere:
    4 C b^2 * max(sum_{p_S > p_T} (p_S - p_T), sum_{p_T > p_S} (p_T - p_S)).
    """
    diff = inst.z_marginal("source") - inst.z_marginal("target")
    pos = float(diff[diff > 0.0].sum())
    neg = float(-diff[diff < 0.0].sum())
    return 4.0 * inst.num_classes * fam.b_vec**2 * max(pos, neg)


def risk_exact(inst: DiscreteInstance, domain: str, g) -> float:
    """Squared-error risk of predictor g: sum_{c,z} p_D(c,z) ||g(., z) - e_c||^2."""
    g = _check_prediction_table(inst, g)
    joint = inst.joint(domain)
    # ||g(., z) - e_c||^2 = ||g(., z)||^2 - 2 g[c, z] + 1
    sq = (g * g).sum(axis=0)  # (m,)
    per_cell = sq[None, :] - 2.0 * g + 1.0
    return float((joint * per_cell).sum())


def weighted_risk_exact(inst: DiscreteInstance, w, g) -> float:
    """Source risk under the reweighted distribution w(z) p_S(y, z)."""
    g = _check_prediction_table(inst, g)
    w = validate_weights(inst, w)
    joint = w[None, :] * inst.p_s
    sq = (g * g).sum(axis=0)
    per_cell = sq[None, :] - 2.0 * g + 1.0
    return float((joint * per_cell).sum())


def _check_prediction_table(inst: DiscreteInstance, g) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != inst.p_s.shape:
        raise ContractError(
            f"prediction table shape {g.shape} must match the joint tables {inst.p_s.shape}"
        )
    if np.any(g < -1e-12) or np.any(np.abs(g.sum(axis=0) - 1.0) > 1e-9):
        raise ContractError("prediction columns must be probability vectors")
    return g
