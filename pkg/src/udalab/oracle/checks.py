"""Executable checks of the target-risk bounds and their tightness claims.

Each check computes every term exactly on a finite instance and returns a
JSON-ready dict. ``holds`` reports whether the claimed relation is satisfied
on this instance; a check whose stated precondition fails reports
``status = "precondition-unmet"`` with ``holds = None`` instead of failing.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError, UnboundedWeightError
from .exact import (
    d_fc_exact,
    inv_exact,
    inv_weighted_exact,
    labelling_function,
    risk_exact,
    tsf_exact,
    tsf_hat_exact,
    tsf_weighted_exact,
    weighted_risk_exact,
)
from .instance import CriticFamily, DiscreteInstance, ratio_weights, validate_weights

TOL = 1e-12
COND_TOL = 1e-9  # conditional tables involve divisions; allow rounding headroom


def verify_bound2(inst: DiscreteInstance, g, fam: CriticFamily) -> dict:
    """Unweighted target-risk bound with constants 6 (invariance) and 2 (transferability)."""
    f_t = labelling_function(inst, "target").table
    terms = {
        "source_risk": risk_exact(inst, "source", g),
        "inv": inv_exact(inst, fam),
        "tsf": tsf_exact(inst, fam),
        "target_noise": risk_exact(inst, "target", f_t),
    }
    lhs = risk_exact(inst, "target", g)
    rhs = terms["source_risk"] + 6.0 * terms["inv"] + 2.0 * terms["tsf"] + terms["target_noise"]
    return {"lhs": lhs, "rhs": rhs, "terms": terms, "holds": bool(lhs <= rhs + TOL)}


def verify_bound3(inst: DiscreteInstance, w, g, fam: CriticFamily) -> dict:
    """Weighted variant: the source is reweighted by w(z) everywhere."""
    w = validate_weights(inst, w)
    f_t = labelling_function(inst, "target").table
    terms = {
        "weighted_source_risk": weighted_risk_exact(inst, w, g),
        "inv": inv_weighted_exact(inst, w, fam),
        "tsf": tsf_weighted_exact(inst, w, fam),
        "target_noise": risk_exact(inst, "target", f_t),
    }
    lhs = risk_exact(inst, "target", g)
    rhs = (terms["weighted_source_risk"] + 6.0 * terms["inv"]
           + 2.0 * terms["tsf"] + terms["target_noise"])
    return {"lhs": lhs, "rhs": rhs, "terms": terms, "holds": bool(lhs <= rhs + TOL)}


def verify_bound4(inst: DiscreteInstance, w, g_tilde, beta: float,
                  fam: CriticFamily) -> dict:
    """Inductive-classifier bound with prefactor rho = beta / (1 - beta).

    Precondition: the candidate classifier must beat the weighted-source
    Bayes predictor on the target by factor beta. When it does not, the
    bound's hypothesis is empty and the report says so.
    """
    if not 0.0 < beta < 1.0:
        raise ContractError(f"beta must lie in (0, 1), got {beta}")
    w = validate_weights(inst, w)
    f_s = labelling_function(inst, "source").table  # Bayes predictor of any w.S
    f_t = labelling_function(inst, "target").table
    lhs = risk_exact(inst, "target", g_tilde)
    bayes_target_risk = risk_exact(inst, "target", f_s)
    report = {
        "lhs": lhs,
        "beta": beta,
        "bayes_target_risk": bayes_target_risk,
        "status": "ok",
    }
    if lhs > beta * bayes_target_risk + TOL:
        report.update({"status": "precondition-unmet", "holds": None, "rhs": None})
        return report
    rho = beta / (1.0 - beta)
    terms = {
        "weighted_source_risk": weighted_risk_exact(inst, w, f_s),
        "inv": inv_weighted_exact(inst, w, fam),
        "tsf_hat": tsf_hat_exact(inst, w, g_tilde, fam),
        "target_noise": risk_exact(inst, "target", f_t),
    }
    rhs = rho * (terms["weighted_source_risk"] + 6.0 * terms["inv"]
                 + 2.0 * terms["tsf_hat"] + terms["target_noise"])
    report.update({"rho": rho, "terms": terms, "rhs": rhs,
                   "holds": bool(lhs <= rhs + TOL)})
    return report


# ---------------------------------------------------------------------------
# tightness characterizations
# ---------------------------------------------------------------------------


def check_tightness(inst: DiscreteInstance, fam: CriticFamily, tol: float = TOL) -> dict:
    """Both errors vanish exactly when the joint tables coincide.

    ``holds`` asserts the equivalence on this instance; it is meaningful for
    clear-cut inputs (exactly equal tables, or macroscopically different
    ones), not for adversarially borderline perturbations below ``tol``.
    """
    inv = inv_exact(inst, fam)
    tsf = tsf_exact(inst, fam)
    joints_equal = bool(np.abs(inst.p_t - inst.p_s).max() <= tol)
    zero_terms = inv / fam.b_scalar <= tol and tsf / fam.b_vec <= tol
    return {
        "inv": inv,
        "tsf": tsf,
        "joints_equal": joints_equal,
        "holds": bool(zero_terms == joints_equal),
    }


def check_tightness_weighted(inst: DiscreteInstance, fam: CriticFamily,
                             tol: float = TOL) -> dict:
    """With density-ratio weights, invariance vanishes and transferability
    vanishes exactly when the labelling functions agree on the target support."""
    w_star = ratio_weights(inst)
    inv = inv_weighted_exact(inst, w_star, fam)
    tsf = tsf_weighted_exact(inst, w_star, fam)
    f_s = labelling_function(inst, "source").table
    f_t = labelling_function(inst, "target").table
    support = inst.z_marginal("target") > 0.0
    cond_dev = float(np.abs(f_s[:, support] - f_t[:, support]).max()) if support.any() else 0.0
    conditionals_equal = cond_dev <= COND_TOL
    holds = (inv / fam.b_scalar <= tol) and ((tsf / fam.b_vec <= tol) == conditionals_equal)
    return {
        "w_star": w_star.tolist(),
        "inv": inv,
        "tsf": tsf,
        "conditionals_equal": bool(conditionals_equal),
        "holds": bool(holds),
    }


def _cell_masses(marginal: np.ndarray, partition: np.ndarray, num_cells: int) -> np.ndarray:
    return np.bincount(partition, weights=marginal, minlength=num_cells)


def _min_inv_over_cell_weights(inst: DiscreteInstance, partition: np.ndarray,
                               num_cells: int) -> float:
    """Minimum of sum_z |p_T(z) - w(cell(z)) p_S(z)| over cell-constant w >= 0.

    Per cell the objective is piecewise linear and convex in the cell weight,
    so the minimum sits on a breakpoint p_T(z)/p_S(z); cells are independent.
    (A vanishing minimum automatically satisfies the unit source expectation,
    which is all the callers rely on.)
    """
    ps = inst.z_marginal("source")
    pt = inst.z_marginal("target")
    total = 0.0
    for cell in range(num_cells):
        zs = np.nonzero(partition == cell)[0]
        ps_c, pt_c = ps[zs], pt[zs]
        on = ps_c > 0.0
        fixed = float(pt_c[~on].sum())  # unreachable mass, constant in the weight
        candidates = [0.0] + (pt_c[on] / ps_c[on]).tolist()
        best = min(float(np.abs(pt_c[on] - omega * ps_c[on]).sum()) for omega in candidates)
        total += best + fixed
    return total


def check_inductive_weights(inst: DiscreteInstance, partition, fam: CriticFamily,
                            tol: float = TOL) -> dict:
    """Weights constrained to be constant on cells of a partition of the points.

    Verifies the characterization: some cell-constant weight table kills both
    errors exactly when (a) the cell-ratio weights do, which requires the
    within-cell point conditionals to agree across domains, and (b) the
    labelling functions agree at the fine level (the coarse level then
    follows). Raises when a cell carries no source mass.
    """
    partition = np.asarray(partition, dtype=np.int64).reshape(-1)
    if partition.size != inst.num_points:
        raise ContractError("partition must assign every representation point")
    num_cells = int(partition.max()) + 1
    if partition.min() < 0 or len(np.unique(partition)) != num_cells:
        raise ContractError("partition cells must be 0..K-1 with every cell nonempty")
    ps_cell = _cell_masses(inst.z_marginal("source"), partition, num_cells)
    pt_cell = _cell_masses(inst.z_marginal("target"), partition, num_cells)
    if np.any(ps_cell == 0.0):
        raise UnboundedWeightError(
            f"cells {np.nonzero(ps_cell == 0.0)[0].tolist()} carry no source mass"
        )
    cell_ratio = pt_cell / ps_cell
    w_full = cell_ratio[partition]

    inv0 = inv_weighted_exact(inst, w_full, fam) / fam.b_scalar
    tsf0 = tsf_weighted_exact(inst, w_full, fam) / fam.b_vec
    min_inv = _min_inv_over_cell_weights(inst, partition, num_cells)

    # within-cell conditionals p_D(z | cell), compared where the target visits
    ps = inst.z_marginal("source")
    pt = inst.z_marginal("target")
    within_dev = 0.0
    for cell in range(num_cells):
        if pt_cell[cell] == 0.0:
            continue
        zs = np.nonzero(partition == cell)[0]
        within_dev = max(
            within_dev,
            float(np.abs(pt[zs] / pt_cell[cell] - ps[zs] / ps_cell[cell]).max()),
        )
    within_cell_equal = within_dev <= COND_TOL

    f_s = labelling_function(inst, "source").table
    f_t = labelling_function(inst, "target").table
    support = pt > 0.0
    fine_dev = float(np.abs(f_s[:, support] - f_t[:, support]).max()) if support.any() else 0.0
    fine_equal = fine_dev <= COND_TOL

    coarse = DiscreteInstance(
        np.stack([_cell_masses(row, partition, num_cells) for row in inst.p_s]),
        np.stack([_cell_masses(row, partition, num_cells) for row in inst.p_t]),
    )
    fc_s = labelling_function(coarse, "source").table
    fc_t = labelling_function(coarse, "target").table
    coarse_support = pt_cell > 0.0
    coarse_dev = (float(np.abs(fc_s[:, coarse_support] - fc_t[:, coarse_support]).max())
                  if coarse_support.any() else 0.0)
    coarse_equal = coarse_dev <= COND_TOL

    consistent = (
        ((inv0 <= tol) == within_cell_equal)
        and ((min_inv <= tol) == (inv0 <= tol))
        and ((tsf0 <= tol) == (within_cell_equal and fine_equal))
        and ((not tsf0 <= tol) or coarse_equal)
    )
    return {
        "cell_weights": cell_ratio.tolist(),
        "inv_at_ratio": inv0 * fam.b_scalar,
        "tsf_at_ratio": tsf0 * fam.b_vec,
        "min_inv_over_cell_weights": min_inv * fam.b_scalar,
        "within_cell_conditionals_equal": bool(within_cell_equal),
        "labelling_equal_fine": bool(fine_equal),
        "labelling_equal_coarse": bool(coarse_equal),
        "holds": bool(consistent),
    }


# ---------------------------------------------------------------------------
# entropy and discriminator connections
# ---------------------------------------------------------------------------


def check_minent_bound(inst: DiscreteInstance, w, g, alpha_smooth: float,
                       fam: CriticFamily) -> dict:
    """Prediction-entropy lower bound on approximated transferability.

    For an alpha-smooth predictor (alpha/(C-1) <= g <= 1-alpha) the critic
    -eta*log(g) with eta = 1/log((C-1)/alpha) is coordinate-bounded by 1, so
    tsf_hat >= eta * (target entropy - weighted source cross-entropy).
    Requires a vector-critic bound of at least 1 for the argument to apply.
    """
    C = inst.num_classes
    if C < 2:
        raise ContractError("the smoothness bound needs at least two classes")
    if not 0.0 < alpha_smooth < (C - 1) / C + 1e-15:
        raise ContractError(f"alpha must lie in (0, (C-1)/C], got {alpha_smooth}")
    if fam.b_vec < 1.0:
        raise ContractError("the entropy critic needs a vector bound of at least 1")
    g = np.asarray(g, dtype=np.float64)
    w = validate_weights(inst, w)
    lo, hi = alpha_smooth / (C - 1), 1.0 - alpha_smooth
    smooth = bool(np.all(g >= lo - TOL) and np.all(g <= hi + TOL))
    report = {"alpha": alpha_smooth, "smoothness_ok": smooth, "status": "ok"}
    if not smooth:
        report.update({"status": "precondition-unmet", "holds": None})
        return report
    eta = 1.0 / math.log((C - 1) / alpha_smooth)
    log_g = np.log(g)
    entropy_t = float(-(inst.z_marginal("target")[None, :] * g * log_g).sum())
    cross_entropy_ws = float(-(w[None, :] * inst.p_s * log_g).sum())
    lhs = tsf_hat_exact(inst, w, g, fam)
    rhs = eta * (entropy_t - cross_entropy_ws)
    report.update({
        "eta": eta,
        "target_entropy": entropy_t,
        "weighted_source_cross_entropy": cross_entropy_ws,
        "lhs": lhs,
        "rhs": rhs,
        "holds": bool(lhs >= rhs - 1e-12),
    })
    return report


def adversarial_objective(p, q) -> float:
    """min over discriminators of BCE(p vs q) at the pointwise optimum.

    The optimal discriminator is d* = p/(p+q) cellwise; identical
    distributions give the maximum value 2 log 2, disjoint supports give 0.
    """
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    total = p + q
    value = 0.0
    on_p = p > 0.0
    on_q = q > 0.0
    value -= float((p[on_p] * np.log(p[on_p] / total[on_p])).sum())
    value -= float((q[on_q] * np.log(q[on_q] / total[on_q])).sum())
    return value


def dann_cdan_values(inst: DiscreteInstance, yhat_s: np.ndarray,
                     yhat_t: np.ndarray) -> tuple[float, float]:
    """Marginal vs prediction-conditioned adversarial values.

    ``yhat_d[c, z]`` is the probability that domain d's labeler emits class c
    at point z. The conditioned value compares the joint (label, point)
    distributions induced by each domain's labeler.
    """
    ps, pt = inst.z_marginal("source"), inst.z_marginal("target")
    dann = adversarial_objective(ps, pt)
    q_s = np.asarray(yhat_s, dtype=np.float64) * ps[None, :]
    q_t = np.asarray(yhat_t, dtype=np.float64) * pt[None, :]
    cdan = adversarial_objective(q_s, q_t)
    return dann, cdan


def check_dann_cdan_equality(inst: DiscreteInstance, predictor) -> dict:
    """With one deterministic labeler shared by both domains, conditioning the
    discriminator on predictions changes nothing: both values coincide."""
    predictor = np.asarray(predictor, dtype=np.int64).reshape(-1)
    if predictor.size != inst.num_points:
        raise ContractError("predictor must assign a class to every point")
    if predictor.min() < 0 or predictor.max() >= inst.num_classes:
        raise ContractError("predictor classes out of range")
    onehot = np.zeros((inst.num_classes, inst.num_points))
    onehot[predictor, np.arange(inst.num_points)] = 1.0
    dann, cdan = dann_cdan_values(inst, onehot, onehot)
    return {
        "dann_value": dann,
        "cdan_value": cdan,
        "equal": bool(abs(dann - cdan) < 1e-9),
        "holds": bool(abs(dann - cdan) < 1e-9),
    }
