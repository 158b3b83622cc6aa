"""Level sets of a multiplier, flat detection, band projections, invariance.

Level bands come in six flavors, selected by a ``kind`` string:

==============  =========================
``"ge"``        {phi >= alpha}
``"le"``        {phi <= alpha}
``"closed"``    {alpha <= phi <= beta}
``"left_closed"``  {alpha <= phi < beta}
``"open"``      {alpha < phi < beta}
``"right_closed"`` {alpha < phi <= beta}
==============  =========================

An operator leaves a set E invariant exactly when the matrix block mapping
E into its complement vanishes, so the invariance test reduces to a norm
estimate of that block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidInterval, PreconditionError, SingleBandOnly, SpaceMismatch
from .measure import MeasurableSet
from .operators import LinearOperator, weighted_two_norm_estimate

_ONE_SIDED = {"ge", "le"}
_TWO_SIDED = {"closed", "left_closed", "open", "right_closed"}


@dataclass(frozen=True)
class LevelBand:
    """A level set of a multiplier together with the bounds that produced it."""

    kind: str
    alpha: float
    beta: float | None
    set: MeasurableSet

    @property
    def measure(self):
        return self.set.measure

    def to_json_dict(self):
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "measure": self.measure,
            "atoms": self.set.size,
        }


@dataclass(frozen=True)
class Flat:
    value: float
    set: MeasurableSet
    measure: float


@dataclass
class FlatReport:
    """Value clusters of a multiplier whose measure clears a threshold."""

    flats: list[Flat] = field(default_factory=list)
    theta: float = 0.0
    tau: float = 0.0

    @property
    def has_flat(self):
        return bool(self.flats)

    def to_json_dict(self):
        return {
            "theta": self.theta,
            "tau": self.tau,
            "flats": [
                {"value": f.value, "measure": f.measure, "atoms": f.set.to_json()}
                for f in self.flats
            ],
        }


def level_set(phi, kind, alpha, beta=None):
    """The atoms where the multiplier satisfies the kind's inequality."""
    v = phi.values
    if kind in _ONE_SIDED:
        mask = v >= alpha if kind == "ge" else v <= alpha
        return LevelBand(kind, float(alpha), None, MeasurableSet(phi.space, mask))
    if kind not in _TWO_SIDED:
        raise ValueError(f"unknown level-set kind {kind!r}")
    if beta is None:
        raise InvalidInterval("two-sided level sets need both bounds")
    if alpha > beta:
        raise InvalidInterval("lower bound exceeds upper bound")
    left = v >= alpha if kind in ("closed", "left_closed") else v > alpha
    right = v <= beta if kind in ("closed", "right_closed") else v < beta
    return LevelBand(kind, float(alpha), float(beta), MeasurableSet(phi.space, left & right))


def detect_flats(phi, theta, tau=0.0):
    """Group atoms into multiplier-value clusters of diameter <= tau and
    report every cluster of measure >= theta.

    theta must be positive: on an atomic space every single atom is trivially
    a flat, so the threshold is what carries the continuum dichotomy.
    """
    if theta <= 0:
        raise PreconditionError("the flat measure threshold must be positive")
    if tau < 0:
        raise PreconditionError("the value tolerance must be nonnegative")
    v = phi.values
    order = np.argsort(v, kind="stable")
    flats = []
    start = 0
    sv = v[order]
    for i in range(1, len(sv) + 1):
        if i == len(sv) or sv[i] - sv[start] > tau:
            cluster = order[start:i]
            cset = phi.space.set_from_indices(cluster)
            m = cset.measure
            if m >= theta:
                value = float((sv[start] + sv[i - 1]) / 2)
                flats.append(Flat(value, cset, m))
            start = i
    return FlatReport(flats=flats, theta=float(theta), tau=float(tau))


def band_projection(E, p):
    """Diagonal 0/1 projection onto the band of functions vanishing outside E."""
    return LinearOperator(E.space, np.diag(E.mask.astype(float)), p)


class InvarianceCheck(NamedTuple):
    invariant: bool
    violation: float


def leaves_invariant(op, E, tol=1e-12):
    """Whether functions supported in E keep their support in E under ``op``.

    The violation magnitude is the weighted 2-norm estimate of the matrix
    block mapping E into its complement, regardless of the ambient exponent;
    only the zero / nonzero verdict is exponent independent and that is all
    the callers rely on.
    """
    if E.space is not op.space:
        raise SpaceMismatch("set lives on a different space")
    cols = E.indices
    rows = E.complement().indices
    if len(cols) == 0 or len(rows) == 0:
        return InvarianceCheck(True, 0.0)
    block = op.matrix[np.ix_(rows, cols)]
    if not block.any():
        return InvarianceCheck(True, 0.0)
    w = op.space.weights
    lower, _, _, _, _ = weighted_two_norm_estimate(block, w[rows], w[cols])
    return InvarianceCheck(lower <= tol, lower)


def enumerate_hyperinvariant_bands(phi, m):
    """Split the range of the multiplier at measure quantiles into up to m
    pairwise disjoint positive-measure level bands.

    Every operator commuting with multiplication by phi leaves each returned
    band invariant, so for a non-constant multiplier this exhibits a family
    of disjoint hyperinvariant bands. Fewer than m bands come back when the
    multiplier takes fewer than m distinct values.
    """
    if m < 1:
        raise PreconditionError("need at least one band")
    v = phi.values
    w = phi.space.weights
    uniq, inverse = np.unique(v, return_inverse=True)
    if uniq.size == 1:
        raise SingleBandOnly("the multiplier is constant")
    mass = np.bincount(inverse, weights=w, minlength=uniq.size)
    cum = np.cumsum(mass)
    total = cum[-1]
    cuts = []
    for i in range(1, m):
        j = int(np.searchsorted(cum, total * i / m))
        j = min(j, uniq.size - 2)
        cut = float((uniq[j] + uniq[j + 1]) / 2)
        if not cuts or cut > cuts[-1]:
            cuts.append(cut)
    edges = [float(uniq[0])] + cuts + [float(uniq[-1])]
    bands = []
    for i in range(len(edges) - 1):
        kind = "closed" if i == len(edges) - 2 else "left_closed"
        band = level_set(phi, kind, edges[i], edges[i + 1])
        if not band.set.is_empty:
            bands.append(band)
    return bands
