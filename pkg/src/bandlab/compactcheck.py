"""Order-bound certificates and disjoint-sequence norm decay.

At desk scale "compact" means a fixed kernel-quadrature operator whose
discretizations have rapidly decaying singular values; every finite matrix
is compact, so the claims here are quantitative decay trends with frozen
thresholds rather than a compactness predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDiscretization,
    NoClusterPoint,
    NotDisjointImages,
    PreconditionError,
)
from .lpspace import LpFunction, indicator
from .operators import dominates


@dataclass
class OrderBoundCertificate:
    """A finite order bound for a selected subsequence of images.

    ``limit`` approximates the cluster point of the images, ``selected``
    indexes a subsequence whose distance to the limit halves term by term
    (``distances[j] < budgets[j] = 2^-(j+1)``), and ``bound`` is the sum of
    the absolute residuals, so that every selected image is dominated
    pointwise by ``bound + |limit|`` up to ``max_pointwise_excess``.
    """

    limit: LpFunction
    bound: LpFunction
    selected: list[int]
    distances: list[float]
    budgets: list[float]
    max_pointwise_excess: float


def order_bound_witness(K, e_seq, m):
    """Build an order-bound certificate for m images K|e_n|.

    The cluster point is estimated by greedy nearest-neighbor chaining over
    the images (the chain tail settles inside the densest cluster and its
    last quarter is averaged); the subsequence is then selected greedily in
    index order against the halving distance budgets. Runs out of candidates
    before m terms are found -> NoClusterPoint, reporting how tightly the
    images cluster at all.
    """
    if not K.is_positive:
        raise PreconditionError("the dominating operator must be positive")
    if m < 1:
        raise PreconditionError("need at least one certificate term")
    images = [K.apply(e.abs()) for e in e_seq]
    count = len(images)
    if count == 0:
        raise PreconditionError("empty sequence")

    values = np.stack([g.values for g in images])
    p = images[0].p

    def dist(i, j):
        return LpFunction(images[0].space, values[i] - values[j], p).norm()

    pair = np.array([[dist(i, j) for j in range(count)] for i in range(count)])
    np.fill_diagonal(pair, np.inf)

    start = int(np.argmin(pair.min(axis=1))) if count > 1 else 0
    visited = [start]
    free = set(range(count)) - {start}
    while free:
        last = visited[-1]
        nxt = min(free, key=lambda j: pair[last, j])
        visited.append(nxt)
        free.remove(nxt)
    tail = visited[-max(1, count // 4):]
    limit = LpFunction(images[0].space, values[tail].mean(axis=0), p)

    gaps = [LpFunction(limit.space, values[i] - limit.values, p).norm() for i in range(count)]
    selected, distances, budgets = [], [], []
    cursor = 0
    for j in range(m):
        budget = 2.0 ** (-(j + 1))
        while cursor < count and gaps[cursor] >= budget:
            cursor += 1
        if cursor >= count:
            nearest = sorted(pair[pair < np.inf].tolist())[:5]
            raise NoClusterPoint(
                f"only {len(selected)} of {m} terms meet the halving budgets; "
                f"closest image pairs sit at distances {nearest}"
            )
        selected.append(cursor)
        distances.append(gaps[cursor])
        budgets.append(budget)
        cursor += 1

    bound_vals = np.abs(values[selected] - limit.values).sum(axis=0)
    bound = LpFunction(limit.space, bound_vals, p)
    excess = float(np.max(values[selected] - (bound_vals + np.abs(limit.values))[None, :]))
    return OrderBoundCertificate(limit, bound, selected, distances, budgets, excess)


@dataclass
class DecayReport:
    """Image norms of a disjoint sequence and the head/tail decay verdict."""

    norms: list[float]
    verdict: bool
    head_max: float
    tail_max: float
    decay_factor: float
    image_overlap: float  # worst pairwise overlap mass relative to the peak image norm

    def to_json_dict(self):
        return {
            "verdict": self.verdict,
            "head_max": self.head_max,
            "tail_max": self.tail_max,
            "decay_factor": self.decay_factor,
            "image_overlap": self.image_overlap,
            "norms": self.norms,
        }


def disjoint_decay(A, K_pos, e_seq, support_tol=0.0, decay_factor=0.25):
    """Image norms ||A e_n|| of a disjoint sequence under compact-role domination.

    Requires K_pos positive with dominates(K_pos, A) and the e_n pairwise
    disjoint at ``support_tol`` (NotDisjointImages otherwise). The verdict is
    true when the max over the last quarter of the norms falls below
    ``decay_factor`` times the max over the first quarter. The worst pairwise
    image-overlap mass is reported alongside as a diagnostic, since smoothing
    kernels spread images beyond exact disjointness.
    """
    if not K_pos.is_positive:
        raise PreconditionError("the compact-role operator must be positive")
    if not dominates(K_pos, A):
        raise PreconditionError("the compact-role operator must dominate A")
    count = len(e_seq)
    if count < 4:
        raise PreconditionError("need at least four terms to compare quarters")
    for i in range(count):
        si = e_seq[i].support(support_tol)
        for j in range(i + 1, count):
            if not si.disjoint_from(e_seq[j].support(support_tol)):
                raise NotDisjointImages(f"terms {i} and {j} overlap")

    images = [A.apply(e) for e in e_seq]
    norms = [g.norm() for g in images]
    peak = max(norms) if norms else 0.0
    overlap = 0.0
    if peak > 0:
        stacked = np.abs(np.stack([g.values for g in images]))
        p = images[0].p
        for i in range(count):
            for j in range(i + 1, count):
                olap = LpFunction(images[0].space,
                                  np.minimum(stacked[i], stacked[j]), p).norm()
                overlap = max(overlap, olap / peak)

    q = max(1, count // 4)
    head = max(norms[:q])
    tail = max(norms[-q:])
    return DecayReport(norms, tail < decay_factor * head, head, tail,
                       decay_factor, overlap)


def dyadic_indicator_family(space, count, p, widest=4, per_scale=8, lo=0.0, hi=1.0):
    """Disjoint normalized indicators with dyadically shrinking widths.

    Widths halve every ``per_scale`` terms starting from (hi - lo) * 2^-widest,
    packed left to right from ``lo``. The family fits inside [lo, hi] for the
    default shape and every width must cover at least one atom.
    """
    if space.geometry != "interval":
        raise InvalidDiscretization("the dyadic family needs an interval space")
    n = space.size
    span = hi - lo
    centers = space.centers
    out = []
    start = lo
    for term in range(count):
        width = span * 2.0 ** (-(widest + term // per_scale))
        stop = start + width
        if stop > hi + 1e-12:
            raise InvalidDiscretization("the family does not fit in the interval")
        mask = (centers >= start) & (centers < stop)
        if not mask.any():
            raise InvalidDiscretization(
                f"term {term} of width {width:g} covers no atom at n={n}"
            )
        chi = indicator(space.set_from_mask(mask), p)
        out.append(chi / chi.norm())
        start = stop
    return out
