"""Inductive construction of a disjoint unit sequence with images bounded below.

Given a positive-level-invariant operator A, a nonnegative multiplier phi
and a seed vector x with y = A x != 0, the recursion repeatedly cuts the
current multiplier interval at a point where the image splits into two
pieces of (as nearly as the grid allows) equal norm, keeps the source piece
of smaller norm, and drops the other piece. Normalizing the dropped source
pieces yields unit vectors whose images live on pairwise disjoint level
bands and whose image norms admit an explicit positive floor.

On a discrete space the equal-norm cut is a step function, so exact
equality is unattainable; each step records the achieved split ratio and
every inequality is verified with the achieved ratios in place of the ideal
ratio 2^(-1/p). The ideal ratio still bounds the kept-source norms from
above, because the kept piece is chosen as the smaller of the two.

Orientation bookkeeping: when the upper subinterval carries the smaller
source piece, the recursion descends into the upper side; each step records
the side taken and the child interval so the swap is fully auditable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FlatAtScale,
    InvarianceViolation,
    NoNonzeroImage,
    NotLevelInvariant,
    PreconditionError,
    StarvedSide,
)
from .levelsets import leaves_invariant, level_set
from .lpspace import LpFunction
from .operators import operator_norm


@dataclass
class WitnessConfig:
    """Knobs of the recursion.

    steps             number of splits; None uses floor(log2(#distinct
                      multiplier values on the seed support)) - 1, so that a
                      well-resolved run never starves of distinct values.
    split_resolution  cap on the number of candidate cut points scanned per
                      split (None scans every midpoint between consecutive
                      distinct values).
    split_dev_cap     halt with FlatAtScale when the best achievable split
                      ratio misses 2^(-1/p) by more than this; a large flat
                      straddling the equal-norm quantile is exactly what
                      makes the miss large.
    consistency_cap   relative tolerance for A(kept source) == kept image,
                      which band invariance promises.
    invariance_samples  number of quantile levels probed (both tails) before
                      the run starts.
    tie_rule          side kept when both source pieces have equal norm.
    verdict_slack     relative slack for the inequality verdicts.
    """

    steps: int | None = None
    split_resolution: int | None = None
    split_dev_cap: float = 0.01
    consistency_cap: float = 1e-9
    invariance_samples: int = 5
    tie_rule: str = "lower"
    verdict_slack: float = 1e-9

    def __post_init__(self):
        if self.split_dev_cap <= 0 or self.consistency_cap <= 0:
            raise PreconditionError("tolerance caps must be positive")
        if self.tie_rule not in ("lower", "upper"):
            raise PreconditionError("tie_rule must be 'lower' or 'upper'")
        if self.steps is not None and self.steps < 1:
            raise PreconditionError("steps must be at least 1")


@dataclass(frozen=True)
class SplitResult:
    """Outcome of one equal-norm cut search."""

    cut: float
    ratio: float       # norm of the lower piece over the whole norm
    deviation: float   # |ratio - 2^(-1/p)|


@dataclass
class WitnessStep:
    """State after step k of the recursion (k = 0 is the initial state).

    ``kept_source`` / ``kept_image`` feed the next step; ``dropped_source``
    normalizes into the k-th unit vector and ``dropped_image`` is its image.
    """

    k: int
    lo: float
    hi: float
    kept_source: LpFunction
    kept_image: LpFunction
    cut: float | None = None
    side: str | None = None
    dropped_source: LpFunction | None = None
    dropped_image: LpFunction | None = None
    split_ratio: float | None = None      # ||kept_image|| / ||parent image||
    split_deviation: float | None = None  # |lower-piece ratio - 2^(-1/p)|
    consistency_err: float | None = None  # ||A a - u|| / ||parent image||

    @property
    def kept_source_norm(self):
        return self.kept_source.norm()

    @property
    def kept_image_norm(self):
        return self.kept_image.norm()

    @property
    def dropped_source_norm(self):
        return self.dropped_source.norm() if self.dropped_source is not None else None

    @property
    def dropped_image_norm(self):
        return self.dropped_image.norm() if self.dropped_image is not None else None


@dataclass
class WitnessTrace:
    """Everything one run produces, sufficient to re-verify it from scratch."""

    p: float
    operator: object
    multiplier: LpFunction
    config: WitnessConfig
    source0: LpFunction
    image0: LpFunction
    half_ratio: float        # 2^(-1/p)
    residual_ratio: float    # (1 - (half_ratio ||y|| / (||A|| ||x||))^p)^(1/p)
    floor: float             # (half_ratio / residual_ratio) ||y|| / ||x||
    norm_estimate: object
    steps: list[WitnessStep] = field(default_factory=list)
    units: list[LpFunction] = field(default_factory=list)
    halted: str | None = None
    steps_requested: int = 0

    @property
    def steps_completed(self):
        return len(self.steps) - 1

    def to_json_dict(self):
        step_rows = []
        for s in self.steps[1:]:
            step_rows.append({
                "k": s.k,
                "lo": s.lo,
                "cut": s.cut,
                "hi": s.hi,
                "side": s.side,
                "kept_source_norm": s.kept_source_norm,
                "dropped_source_norm": s.dropped_source_norm,
                "kept_image_norm": s.kept_image_norm,
                "dropped_image_norm": s.dropped_image_norm,
                "split_ratio": s.split_ratio,
                "split_deviation": s.split_deviation,
                "consistency_err": s.consistency_err,
            })
        units = []
        for k, e in enumerate(self.units, start=1):
            idx = e.support(0.0).indices
            units.append({
                "k": k,
                "support": [int(i) for i in idx],
                "values": [float(v) for v in e.values[idx]],
            })
        return {
            "p": self.p,
            "constants": {
                "half_ratio": self.half_ratio,
                "residual_ratio": self.residual_ratio,
                "floor": self.floor,
                "operator_norm_upper": self.norm_estimate.upper,
                "source_norm": self.source0.norm(),
                "image_norm": self.image0.norm(),
            },
            "steps_requested": self.steps_requested,
            "steps_completed": self.steps_completed,
            "halted": self.halted,
            "steps": step_rows,
            "units": units,
        }

    def write_csv(self, path, verdicts=None):
        """Per-step norms and bound margins, one row per completed step."""
        margins = {v.k: v.margins for v in verdicts.steps} if verdicts is not None else {}
        cols = ["k", "kept_source_norm", "dropped_source_norm", "kept_image_norm",
                "dropped_image_norm", "split_ratio", "split_deviation",
                "source_lower_margin", "source_upper_margin", "pair_upper_margin",
                "unit_image_margin"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for s in self.steps[1:]:
                m = margins.get(s.k, {})
                writer.writerow([
                    s.k,
                    repr(s.kept_source_norm), repr(s.dropped_source_norm),
                    repr(s.kept_image_norm), repr(s.dropped_image_norm),
                    repr(s.split_ratio), repr(s.split_deviation),
                    repr(m.get("source_lower")), repr(m.get("source_upper")),
                    repr(m.get("pair_upper")), repr(m.get("unit_image")),
                ])


def split_level(phi, y, alpha, beta, p, resolution=None, max_deviation=None):
    """Cut [alpha, beta] so the two restrictions of y have nearly equal norm.

    Candidate cuts are midpoints between consecutive distinct multiplier
    values on the support of y, so no atom ever sits on the cut and the two
    level bands partition the support exactly. Among candidates the one
    minimizing |N(cut) - 2^(-1/p) ||y||| wins, where N(cut) is the norm of y
    below the cut; ties go to the smaller cut.

    Raises FlatAtScale when fewer than two distinct values remain, or when
    ``max_deviation`` is given and the best achievable ratio still misses
    2^(-1/p) by more than it: the no-flat hypothesis has failed at this
    resolution and the construction must stop.
    """
    if p == math.inf:
        raise PreconditionError("the construction needs a finite exponent")
    total = y.norm()
    if total <= 0.0:
        raise PreconditionError("cannot split a zero vector")
    supp = y.support(0.0)
    band = level_set(phi, "closed", alpha, beta).set
    if not supp.subset_of(band):
        raise PreconditionError("y must be supported inside the closed level band")

    idx = supp.indices
    vals = phi.values[idx]
    w = phi.space.weights[idx]
    terms = w * np.abs(y.values[idx]) ** p

    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    st = terms[order]
    distinct_end = np.flatnonzero(np.diff(sv) > 0)  # last index of each value group
    if distinct_end.size < 1:
        raise FlatAtScale("fewer than two distinct multiplier values on the support")

    prefix = np.cumsum(st)
    cuts = (sv[distinct_end] + sv[distinct_end + 1]) / 2
    masses = prefix[distinct_end]
    if resolution is not None and cuts.size > resolution:
        keep = np.linspace(0, cuts.size - 1, resolution).round().astype(int)
        cuts, masses = cuts[keep], masses[keep]

    target_ratio = 2.0 ** (-1.0 / p)
    ratios = (masses / math.fsum(st)) ** (1.0 / p)
    best = int(np.argmin(np.abs(ratios - target_ratio)))
    cut = float(cuts[best])

    # recompute the achieved ratio with compensated sums at the chosen cut
    low = level_set(phi, "closed", alpha, cut).set
    ratio = y.restrict(low).norm() / total
    deviation = abs(ratio - target_ratio)
    if max_deviation is not None and deviation > max_deviation:
        raise FlatAtScale(
            f"best split ratio {ratio:.6g} misses {target_ratio:.6g} by {deviation:.3g}"
        )
    return SplitResult(cut, ratio, deviation)


def init_state(A, phi, x, config=None):
    """Validate the run inputs and produce the k = 0 state.

    Checks that A is nonzero, that y = A x is nonzero, that the multiplier is
    nonnegative, and that A leaves sampled level bands of the multiplier
    invariant (the property a commuting dominator hands down to A).
    """
    config = config or WitnessConfig()
    if x.p == math.inf:
        raise PreconditionError("the construction needs a finite exponent")
    if phi.space is not x.space:
        raise PreconditionError("multiplier and seed live on different spaces")
    if float(np.min(phi.values)) < 0.0:
        raise PreconditionError("the multiplier must be nonnegative")
    if not A.matrix.any():
        raise PreconditionError("the operator is zero")
    y = A.apply(x)
    if y.norm() == 0.0:
        raise NoNonzeroImage("A x vanishes for the supplied x; pick another x")

    est = operator_norm(A)
    tol = config.consistency_cap * max(est.upper, 1.0)
    qs = np.quantile(np.unique(phi.values), np.linspace(0, 1, config.invariance_samples + 2)[1:-1])
    for alpha in qs:
        for kind in ("le", "ge"):
            band = level_set(phi, kind, float(alpha))
            check = leaves_invariant(A, band.set, tol)
            if not check.invariant:
                raise NotLevelInvariant(
                    f"operator moves mass out of the {kind} band at level {alpha:.6g} "
                    f"(violation {check.violation:.3g})"
                )
    hi = float(np.max(phi.values))
    return WitnessStep(k=0, lo=0.0, hi=hi, kept_source=x, kept_image=y), est


def witness_step(state, phi, A, config=None):
    """One split: cut the interval, keep the smaller source piece, record."""
    config = config or WitnessConfig()
    p = state.kept_source.p
    parent_u = state.kept_image
    parent_a = state.kept_source
    parent_norm = parent_u.norm()

    split = split_level(phi, parent_u, state.lo, state.hi, p,
                        resolution=config.split_resolution,
                        max_deviation=config.split_dev_cap)
    low = level_set(phi, "closed", state.lo, split.cut).set
    high = level_set(phi, "closed", split.cut, state.hi).set

    a_low, a_high = parent_a.restrict(low), parent_a.restrict(high)
    u_low, u_high = parent_u.restrict(low), parent_u.restrict(high)
    n_low, n_high = a_low.norm(), a_high.norm()

    if n_low < n_high or (n_low == n_high and config.tie_rule == "lower"):
        side = "lower"
        kept_a, dropped_a = a_low, a_high
        kept_u, dropped_u = u_low, u_high
        child_lo, child_hi = state.lo, split.cut
    else:
        side = "upper"
        kept_a, dropped_a = a_high, a_low
        kept_u, dropped_u = u_high, u_low
        child_lo, child_hi = split.cut, state.hi

    if kept_a.norm() == 0.0:
        raise StarvedSide(f"the source vanishes on the {side} side of the cut")
    err = (A.apply(kept_a) - kept_u).norm() / parent_norm
    if err > config.consistency_cap:
        raise InvarianceViolation(
            f"A(kept source) strays from the kept image by {err:.3g} of the parent norm"
        )
    return WitnessStep(
        k=state.k + 1,
        lo=child_lo,
        hi=child_hi,
        kept_source=kept_a,
        kept_image=kept_u,
        cut=split.cut,
        side=side,
        dropped_source=dropped_a,
        dropped_image=dropped_u,
        split_ratio=kept_u.norm() / parent_norm,
        split_deviation=split.deviation,
        consistency_err=err,
    )


def _default_steps(phi, x):
    distinct = np.unique(phi.values[x.support(0.0).mask]).size
    return max(int(math.floor(math.log2(distinct))) - 1, 0) if distinct > 1 else 0


def run_witness(A, phi, x, config=None):
    """Run the recursion and collect the trace with its unit sequence.

    A FlatAtScale or StarvedSide stop is recorded on the trace, not raised:
    a partial (possibly empty) unit sequence with the halt reason is the
    honest outcome at that resolution.
    """
    config = config or WitnessConfig()
    state, est = init_state(A, phi, x, config)
    y = state.kept_image
    p = x.p

    c = 2.0 ** (-1.0 / p)
    a_up = est.upper
    ratio = c * y.norm() / (a_up * x.norm())
    residual = (1.0 - ratio ** p) ** (1.0 / p)
    floor = (c / residual) * y.norm() / x.norm()

    trace = WitnessTrace(
        p=p, operator=A, multiplier=phi, config=config,
        source0=x, image0=y,
        half_ratio=c, residual_ratio=residual, floor=floor,
        norm_estimate=est, steps=[state],
        steps_requested=config.steps if config.steps is not None else _default_steps(phi, x),
    )
    for _ in range(trace.steps_requested):
        try:
            state = witness_step(state, phi, A, config)
        except FlatAtScale:
            trace.halted = "flat-at-scale"
            break
        except StarvedSide:
            trace.halted = "starved-side"
            break
        trace.steps.append(state)
        trace.units.append(state.dropped_source / state.dropped_source.norm())
    return trace


@dataclass
class StepVerdict:
    k: int
    unit_norm_ok: bool
    source_bounds_ok: bool     # achieved form of: c^k ||y||/||A|| <= ||a_k|| <= c^k ||x||
    pair_bounds_ok: bool       # achieved form of: ||a_k|| <= ||b_k|| <= c1 c^(k-1) ||x||
    image_chain_ok: bool       # ||u_k|| telescopes through the achieved ratios
    split_additive_ok: bool    # ||a_k||^p + ||b_k||^p == ||a_(k-1)||^p
    unit_image_chain_ok: bool  # ||A e_k|| * ||b_k|| == ||v_k||
    unit_image_floor_ok: bool  # ||A e_k|| >= achieved floor
    margins: dict

    @property
    def all_ok(self):
        return (self.unit_norm_ok and self.source_bounds_ok and self.pair_bounds_ok
                and self.image_chain_ok and self.split_additive_ok
                and self.unit_image_chain_ok and self.unit_image_floor_ok)


@dataclass
class TraceVerdicts:
    steps: list[StepVerdict]
    disjoint_images_ok: bool
    floor_achieved: float | None
    halted: str | None

    @property
    def all_pass(self):
        return self.disjoint_images_ok and all(v.all_ok for v in self.steps)

    def to_json_dict(self):
        return {
            "all_pass": self.all_pass,
            "disjoint_images_ok": self.disjoint_images_ok,
            "floor_achieved": self.floor_achieved,
            "halted": self.halted,
            "steps": [
                {
                    "k": v.k,
                    "unit_norm_ok": v.unit_norm_ok,
                    "source_bounds_ok": v.source_bounds_ok,
                    "pair_bounds_ok": v.pair_bounds_ok,
                    "image_chain_ok": v.image_chain_ok,
                    "split_additive_ok": v.split_additive_ok,
                    "unit_image_chain_ok": v.unit_image_chain_ok,
                    "unit_image_floor_ok": v.unit_image_floor_ok,
                    "margins": v.margins,
                }
                for v in self.steps
            ],
        }


def verify_trace(trace, unit_tol=1e-12, chain_tol=1e-10):
    """Re-derive every claimed property of a trace from its stored vectors.

    All inequality verdicts use the achieved split ratios (and the certified
    operator-norm upper bound) so they are literally true statements about
    this run; the ideal ratio enters only where the recursion guarantees it
    regardless of split quality. The unit sequence is re-applied through the
    operator, so a forged trace fails here.
    """
    slack = trace.config.verdict_slack
    A = trace.operator
    p = trace.p
    c = trace.half_ratio
    a_up = trace.norm_estimate.upper
    x_norm = trace.source0.norm()
    y_norm = trace.image0.norm()

    verdicts = []
    images = []
    ratio_product = 1.0
    prev_source_norm = x_norm
    floor_achieved = None
    for step, unit in zip(trace.steps[1:], trace.units):
        k = step.k
        ratio_product *= step.split_ratio
        a_n = step.kept_source_norm
        b_n = step.dropped_source_norm
        u_n = step.kept_image_norm
        v_n = step.dropped_image_norm

        source_lower = ratio_product * y_norm / a_up
        source_upper = c ** k * x_norm
        inner = ratio_product * y_norm / a_up
        pair_upper = max((c ** (k - 1) * x_norm) ** p - inner ** p, 0.0) ** (1.0 / p)

        image = A.apply(unit)
        images.append(image)
        image_norm = image.norm()
        unit_floor = v_n / pair_upper if pair_upper > 0 else math.inf
        floor_achieved = unit_floor if floor_achieved is None else min(floor_achieved, unit_floor)

        additive = a_n ** p + b_n ** p
        chain = ratio_product * y_norm

        verdicts.append(StepVerdict(
            k=k,
            unit_norm_ok=abs(unit.norm() - 1.0) <= unit_tol,
            source_bounds_ok=(source_lower <= a_n * (1 + slack)
                              and a_n <= source_upper * (1 + slack)),
            pair_bounds_ok=(a_n <= b_n * (1 + slack)
                            and b_n <= pair_upper * (1 + slack)),
            image_chain_ok=abs(u_n - chain) <= chain_tol * chain,
            split_additive_ok=abs(additive - prev_source_norm ** p)
                              <= chain_tol * prev_source_norm ** p,
            unit_image_chain_ok=abs(image_norm * b_n - v_n) <= chain_tol * v_n,
            unit_image_floor_ok=image_norm >= unit_floor * (1 - slack),
            margins={
                "source_lower": a_n - source_lower,
                "source_upper": source_upper - a_n,
                "pair_upper": pair_upper - b_n,
                "unit_image": image_norm - unit_floor,
            },
        ))
        prev_source_norm = a_n

    disjoint_ok = True
    for i in range(len(images)):
        si = images[i].support(0.0)
        for j in range(i + 1, len(images)):
            if not si.disjoint_from(images[j].support(0.0)):
                disjoint_ok = False
    return TraceVerdicts(verdicts, disjoint_ok, floor_achieved, trace.halted)
