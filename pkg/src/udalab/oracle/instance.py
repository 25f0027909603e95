"""Finite two-domain worlds: joint tables over (class, representation) cells."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, UnboundedWeightError

MASS_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteInstance:
    """Source and target joint distributions over C classes and m points.

    ``p_s[c, z]`` is the source mass of (class c, representation z); both
    tables are nonnegative and sum to 1. Marginals and conditionals are
    derived views, never stored.
    """

    p_s: np.ndarray
    p_t: np.ndarray

    def __post_init__(self):
        ps = np.asarray(self.p_s, dtype=np.float64)
        pt = np.asarray(self.p_t, dtype=np.float64)
        if ps.ndim != 2 or ps.shape != pt.shape:
            raise ContractError("joint tables must be 2-D arrays of identical shape")
        for name, table in (("source", ps), ("target", pt)):
            if np.any(table < 0.0):
                raise ContractError(f"{name} table has negative mass")
            if abs(table.sum() - 1.0) > MASS_TOL:
                raise ContractError(f"{name} table mass is {table.sum()}, expected 1")
        object.__setattr__(self, "p_s", ps)
        object.__setattr__(self, "p_t", pt)

    @property
    def num_classes(self) -> int:
        return self.p_s.shape[0]

    @property
    def num_points(self) -> int:
        return self.p_s.shape[1]

    def z_marginal(self, domain: str) -> np.ndarray:
        return self.joint(domain).sum(axis=0)

    def class_prior(self, domain: str) -> np.ndarray:
        return self.joint(domain).sum(axis=1)

    def joint(self, domain: str) -> np.ndarray:
        if domain == "source":
            return self.p_s
        if domain == "target":
            return self.p_t
        raise ContractError(f"domain must be 'source' or 'target', got {domain!r}")


@dataclass(frozen=True)
class CriticFamily:
    """Coordinate bounds of the two critic classes.

    Scalar critics take values in [-b_scalar, b_scalar]; vector critics are
    bounded by b_vec per coordinate. The default ties b_scalar = C * b_vec^2
    so that products of two vector critics stay inside the scalar family,
    which is what the bound constants rely on.
    """

    b_scalar: float = 1.0
    b_vec: float = 1.0

    def __post_init__(self):
        if self.b_scalar <= 0.0 or self.b_vec <= 0.0:
            raise ContractError("critic bounds must be positive")


def default_family(num_classes: int) -> CriticFamily:
    return CriticFamily(b_scalar=float(num_classes), b_vec=1.0)


# ---------------------------------------------------------------------------
# weight tables over representation points
# ---------------------------------------------------------------------------


def validate_weights(inst: DiscreteInstance, w) -> np.ndarray:
    """Check w >= 0 and unit source expectation; return the array."""
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.size != inst.num_points:
        raise ContractError("weight table length must equal the number of points")
    if np.any(w < 0.0):
        raise ContractError("weights must be nonnegative")
    mass = float(w @ inst.z_marginal("source"))
    if abs(mass - 1.0) > 1e-9:
        raise ContractError(f"source expectation of weights is {mass}, expected 1")
    return w


def normalize_weights(inst: DiscreteInstance, raw) -> np.ndarray:
    """Rescale a nonnegative table so its source expectation is exactly 1."""
    raw = np.asarray(raw, dtype=np.float64).reshape(-1)
    if np.any(raw < 0.0):
        raise ContractError("weights must be nonnegative")
    mass = float(raw @ inst.z_marginal("source"))
    if mass <= 0.0:
        raise ContractError("weights carry no source mass")
    return raw / mass


def ratio_weights(inst: DiscreteInstance) -> np.ndarray:
    """The density-ratio table w*(z) = p_T(z) / p_S(z) on the source support.

    Points outside the source support that carry target mass make the ratio
    unbounded and raise; joint zero-mass points get weight 0 by convention.
    """
    ps = inst.z_marginal("source")
    pt = inst.z_marginal("target")
    bad = (ps == 0.0) & (pt > 0.0)
    if np.any(bad):
        raise UnboundedWeightError(
            f"target mass outside the source support at points {np.nonzero(bad)[0].tolist()}"
        )
    w = np.zeros_like(ps)
    on = ps > 0.0
    w[on] = pt[on] / ps[on]
    return w


# ---------------------------------------------------------------------------
# constructions used by fuzzing and tests
# ---------------------------------------------------------------------------


def random_instance(rng: np.random.Generator, num_points: int, num_classes: int,
                    concentration: float = 1.0) -> DiscreteInstance:
    """Dense random instance with Dirichlet-distributed joint tables."""
    shape = (num_classes, num_points)
    alpha = np.full(num_classes * num_points, concentration)
    p_s = rng.dirichlet(alpha).reshape(shape)
    p_t = rng.dirichlet(alpha).reshape(shape)
    return DiscreteInstance(p_s, p_t)


def shared_conditional_instance(rng: np.random.Generator, num_points: int,
                                num_classes: int) -> DiscreteInstance:
    """Same class-given-point conditionals in both domains, marginals differ."""
    cond = rng.dirichlet(np.ones(num_classes), size=num_points).T  # (C, m) columns
    ps_z = rng.dirichlet(np.ones(num_points))
    pt_z = rng.dirichlet(np.ones(num_points))
    return DiscreteInstance(cond * ps_z, cond * pt_z)


def random_prediction_table(rng: np.random.Generator, num_points: int,
                            num_classes: int) -> np.ndarray:
    """Random columnwise probability table g[c, z] (a stochastic predictor)."""
    return rng.dirichlet(np.ones(num_classes), size=num_points).T


def merge_columns(inst: DiscreteInstance, i: int, j: int) -> DiscreteInstance:
    """Coarsen the representation by merging points i and j (i keeps the mass)."""
    if i == j:
        raise ContractError("cannot merge a point with itself")
    ps = inst.p_s.copy()
    pt = inst.p_t.copy()
    ps[:, i] += ps[:, j]
    pt[:, i] += pt[:, j]
    return DiscreteInstance(np.delete(ps, j, axis=1), np.delete(pt, j, axis=1))
