"""Brute-force critic enumeration.

Critics are quantized to {-b, 0, +b} per coordinate. All objectives in this
package are linear in each critic coordinate, so this grid contains an exact
optimizer; small problems are enumerated over the full product grid, larger
ones coordinate by coordinate (exact for separable objectives, and cross
checked against the full grid in the test suite).
"""

from __future__ import annotations

import numpy as np

from .instance import CriticFamily, DiscreteInstance, validate_weights

FULL_GRID_MAX_COORDS = 10  # 3^10 patterns is the largest full enumeration


def critic_grid(num_coords: int, values) -> np.ndarray:
    """All len(values)^k critics over the product grid, one per row."""
    values = np.asarray(values, dtype=np.float64)
    v = values.size
    total = v**num_coords
    idx = np.arange(total)
    out = np.empty((total, num_coords))
    for pos in range(num_coords):
        out[:, num_coords - 1 - pos] = values[(idx // v**pos) % v]
    return out


def _best_linear(coeffs: np.ndarray, b: float) -> float:
    """max over grid critics f of sum_i f_i * coeffs_i."""
    flat = coeffs.reshape(-1)
    if flat.size <= FULL_GRID_MAX_COORDS:
        grid = critic_grid(flat.size, (-b, 0.0, b))
        return float((grid @ flat).max())
    # Objective is a sum of independent per-coordinate terms: enumerate the
    # three candidate values coordinatewise and add up the winners.
    candidates = np.stack([-b * flat, np.zeros_like(flat), b * flat])
    return float(candidates.max(axis=0).sum())


def inv_bruteforce(inst: DiscreteInstance, fam: CriticFamily, w=None) -> float:
    target = inst.z_marginal("target")
    source = inst.z_marginal("source")
    if w is not None:
        source = validate_weights(inst, w) * source
    return _best_linear(target - source, fam.b_scalar)


def tsf_bruteforce(inst: DiscreteInstance, fam: CriticFamily, w=None) -> float:
    source = inst.p_s
    if w is not None:
        source = validate_weights(inst, w)[None, :] * source
    return _best_linear(inst.p_t - source, fam.b_vec)


def tsf_hat_bruteforce(inst: DiscreteInstance, w, g, fam: CriticFamily) -> float:
    g = np.asarray(g, dtype=np.float64)
    w = validate_weights(inst, w)
    coeffs = inst.z_marginal("target")[None, :] * g - w[None, :] * inst.p_s
    return _best_linear(coeffs, fam.b_vec)


def d_fc_bruteforce(inst: DiscreteInstance, fam: CriticFamily) -> float:
    """max over critic pairs of |E_S ||f-f'||^2 - E_T ||f-f'||^2|.

    Per coordinate the squared difference (f - f')^2 ranges over
    {0, b^2, 4b^2} on the grid, independently across coordinates, so pairs
    are enumerated through those squared values.
    """
    delta = inst.z_marginal("source") - inst.z_marginal("target")  # (m,)
    coeffs = np.broadcast_to(delta, inst.p_s.shape).reshape(-1)
    b2 = fam.b_vec**2
    squared_values = (0.0, b2, 4.0 * b2)
    if coeffs.size <= FULL_GRID_MAX_COORDS:
        grid = critic_grid(coeffs.size, squared_values)
        return float(np.abs(grid @ coeffs).max())
    best_pos = np.stack([v * coeffs for v in squared_values]).max(axis=0).sum()
    best_neg = np.stack([v * -coeffs for v in squared_values]).max(axis=0).sum()
    return float(max(best_pos, best_neg))


def d_fc_pairs_bruteforce(inst: DiscreteInstance, fam: CriticFamily) -> float:
    """Literal enumeration over all pairs of grid critics (tiny instances only)."""
    k = inst.p_s.size
    if 3**k > 3**6:
        raise ValueError("pair enumeration is limited to 6 coordinates")
    grid = critic_grid(k, (-fam.b_vec, 0.0, fam.b_vec))  # (3^k, k)
    delta = inst.z_marginal("source") - inst.z_marginal("target")
    coeffs = np.broadcast_to(delta, inst.p_s.shape).reshape(-1)
    best = 0.0
    for f in grid:
        diff2 = (grid - f) ** 2
        best = max(best, float(np.abs(diff2 @ coeffs).max()))
    return best
