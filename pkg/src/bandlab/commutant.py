"""Probes for operators commuting with a multiplication operator.

The probes dramatize two structural facts about the commutant: commuting
with M_phi forces R(phi^n x) = phi^n R(x) for every power n (so mass can
never leak to atoms where the multiplier is larger, on pain of geometric
blowup), and yet a commuting operator is free to smear mass sideways within
level sets, destroying disjointness.

Multiplier powers are taken pointwise, never as matrix powers: for diagonal
matrices the two agree exactly and the pointwise route is O(n) per power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .levelsets import level_set
from .lpspace import LpFunction, indicator
from .operators import operator_norm

_OVERFLOW_CAP = 1e100


def power_commutation_check(R, phi, x, n_max=8):
    """Max over n <= n_max of the normalized deviation of R(phi^n x) from phi^n R(x).

    The deviation at power n is scaled by ||R|| * ||phi||_inf^n * ||x|| so
    the result is comparable across powers; it vanishes (up to rounding)
    exactly when R commutes with multiplication by phi. Powers stop early
    once ||phi||_inf^n would overflow the 1e100 guard.
    """
    r_norm = operator_norm(R).upper
    x_norm = x.norm()
    if r_norm == 0.0 or x_norm == 0.0:
        return 0.0
    phi_sup = float(np.max(np.abs(phi.values)))
    rx = R.matvec(x.values)
    power = np.ones(x.space.size)
    sup_n = 1.0
    worst = 0.0
    for _ in range(1, n_max + 1):
        power = power * phi.values
        sup_n *= phi_sup
        if not math.isfinite(sup_n) or sup_n > _OVERFLOW_CAP:
            break
        scale = r_norm * sup_n * x_norm
        if scale == 0.0:
            break
        diff = LpFunction(x.space, R.matvec(power * x.values) - power * rx, x.p)
        worst = max(worst, diff.norm() / scale)
    return worst


@dataclass(frozen=True)
class GrowthProbe:
    """Record of the bounded-versus-geometric dichotomy for one probe vector.

    ``applied_norms[n]`` is ||R(phi^n x)|| and ``multiplied_norms[n]`` is
    ||phi^n R(x)||; for a commuting R the two sequences coincide and stay
    below ``upper_bound``. ``leak_mass`` is the norm of R(x) above the gamma
    level; whenever it is positive the multiplied sequence grows at least
    like ``growth_floor[n] = gamma^n * leak_mass``.
    """

    gamma: float
    leak_mass: float
    applied_norms: list[float]
    multiplied_norms: list[float]
    growth_floor: list[float]
    upper_bound: float


def growth_contradiction_probe(R, phi, x, gamma, n_max=8):
    """Track ||R(phi^n x)|| against the geometric floor forced by any leak.

    Requires gamma > 1 and x supported where the multiplier is at most 1.
    Commutation of R is the hypothesis being dramatized, not enforced: a
    non-commuting leak shows up as positive leak mass and a multiplied-norm
    sequence that outruns the bounded applied-norm sequence.
    """
    if gamma <= 1.0:
        raise PreconditionError("gamma must exceed 1")
    e_one = level_set(phi, "le", 1.0).set
    if not x.support(0.0).subset_of(e_one):
        raise PreconditionError("x must be supported where the multiplier is at most 1")
    rx = LpFunction(x.space, R.matvec(x.values), x.p)
    above = level_set(phi, "le", gamma).set.complement()
    leak_mass = rx.restrict(above).norm()

    phi_sup = float(np.max(np.abs(phi.values)))
    power = np.ones(x.space.size)
    applied = []
    multiplied = []
    floor = []
    sup_n = 1.0
    for n in range(0, n_max + 1):
        if n > 0:
            power = power * phi.values
            sup_n *= phi_sup
            if not math.isfinite(sup_n) or sup_n > _OVERFLOW_CAP:
                break
        applied.append(LpFunction(x.space, R.matvec(power * x.values), x.p).norm())
        multiplied.append(LpFunction(x.space, power * rx.values, x.p).norm())
        floor.append(gamma ** n * leak_mass)
    bound = operator_norm(R).upper * x.norm()
    return GrowthProbe(float(gamma), leak_mass, applied, multiplied, floor, bound)


@dataclass(frozen=True)
class DisjointnessReport:
    preserving: bool
    witness: tuple | None
    overlap: LpFunction | None
    pairs_tested: int


def disjointness_preservation_test(T, trials=64, tol=0.0, seed=0):
    """Hunt for a disjoint pair whose images under T overlap.

    Structured pairs come first (geometry halves, then index halves), then
    seeded random disjoint pairs until ``trials`` pairs have been tested.
    Returns the first witness pair together with the pointwise overlap
    min(|Tf|, |Tg|), or reports the operator as preserving.
    """
    space = T.space
    p = T.p

    def structured_masks():
        c = space.centers
        if space.geometry == "grid":
            yield c[:, 0] < 0.5
            yield c[:, 1] < 0.5
        elif space.geometry == "interval":
            yield c < 0.5
        half = np.arange(space.size) < space.size // 2
        yield half

    def candidate_pairs():
        for mask in structured_masks():
            E = space.set_from_mask(mask)
            yield indicator(E, p), indicator(E.complement(), p)
        rng = np.random.default_rng(seed)
        while True:
            mask = rng.random(space.size) < 0.5
            if not mask.any() or mask.all():
                continue
            f = rng.standard_normal(space.size) * mask
            g = rng.standard_normal(space.size) * ~mask
            yield LpFunction(space, f, p), LpFunction(space, g, p)

    tested = 0
    for f, g in candidate_pairs():
        if tested >= trials:
            break
        tested += 1
        overlap = np.minimum(np.abs(T.matvec(f.values)), np.abs(T.matvec(g.values)))
        if np.any(overlap > tol):
            return DisjointnessReport(False, (f, g), LpFunction(space, overlap, p), tested)
    return DisjointnessReport(True, None, None, tested)
