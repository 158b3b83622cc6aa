"""Value-per-atom functions with L_p norms, restrictions, supports and CSV I/O.

A function carries its exponent ``p`` (a float >= 1 or ``math.inf``); binary
arithmetic requires matching spaces and exponents so that norms from
different spaces can never be mixed silently. Norm sums use compensated
summation, which keeps the p-additivity identity
``norm(f.restrict(E))**p + norm(f.restrict(~E))**p == norm(f)**p`` tight at
machine precision.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import SpaceMismatch
from .measure import MeasurableSet, MeasureSpace


def _check_p(p):
    if p == math.inf:
        return math.inf
    p = float(p)
    if not p >= 1:
        raise ValueError("the exponent must satisfy p >= 1 (or be math.inf)")
    return p


class LpFunction:
    """A real function on the atoms of a space, tagged with its exponent."""

    def __init__(self, space, values, p):
        v = np.asarray(values, dtype=float)
        if v.shape != (space.size,):
            raise SpaceMismatch("value vector length does not match the space")
        v = v.copy()
        v.flags.writeable = False
        self.space = space
        self.values = v
        self.p = _check_p(p)
        self._norm = None

    def norm(self):
        if self._norm is None:
            if self.p == math.inf:
                self._norm = float(np.max(np.abs(self.values)))
            else:
                terms = self.space.weights * np.abs(self.values) ** self.p
                self._norm = math.fsum(terms) ** (1.0 / self.p)
        return self._norm

    def restrict(self, E):
        """f * chi_E: values zeroed outside E, support exactly inside E."""
        if E.space is not self.space:
            raise SpaceMismatch("set and function live on different spaces")
        return LpFunction(self.space, np.where(E.mask, self.values, 0.0), self.p)

    def support(self, tol=0.0):
        """Atoms where |f| exceeds tol (tol=0 keeps every exact nonzero)."""
        if tol < 0:
            raise ValueError("support tolerance must be nonnegative")
        return MeasurableSet(self.space, np.abs(self.values) > tol)

    def abs(self):
        return LpFunction(self.space, np.abs(self.values), self.p)

    __abs__ = abs

    def _check(self, other):
        if other.space is not self.space or other.p != self.p:
            raise SpaceMismatch("operands must share space and exponent")

    def __add__(self, other):
        self._check(other)
        return LpFunction(self.space, self.values + other.values, self.p)

    def __sub__(self, other):
        self._check(other)
        return LpFunction(self.space, self.values - other.values, self.p)

    def __neg__(self):
        return LpFunction(self.space, -self.values, self.p)

    def __mul__(self, scalar):
        return LpFunction(self.space, self.values * float(scalar), self.p)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return LpFunction(self.space, self.values / float(scalar), self.p)

    def __repr__(self):
        return f"LpFunction(p={self.p}, atoms={self.space.size}, norm={self.norm():g})"


def constant(space, value, p):
    return LpFunction(space, np.full(space.size, float(value)), p)


def indicator(E, p):
    """chi_E as an LpFunction."""
    return LpFunction(E.space, E.mask.astype(float), p)


def from_callable(space, fn, p):
    """Evaluate fn on atom centers: fn(t) on intervals, fn(x, y) on grids."""
    if space.centers is None:
        raise SpaceMismatch("space carries no geometry to evaluate on")
    if space.geometry == "grid":
        vals = fn(space.centers[:, 0], space.centers[:, 1])
    else:
        vals = fn(space.centers)
    return LpFunction(space, np.broadcast_to(np.asarray(vals, dtype=float), (space.size,)), p)


def modulate(f, multiplier):
    """Pointwise product of f with a (sup-norm role) multiplier on the same space.

    The result keeps f's exponent; the multiplier's exponent is irrelevant.
    """
    if multiplier.space is not f.space:
        raise SpaceMismatch("multiplier lives on a different space")
    return LpFunction(f.space, f.values * multiplier.values, f.p)


def disjoint(f, g, tol=0.0):
    """True iff the tol-supports of f and g share no atom."""
    if g.space is not f.space:
        raise SpaceMismatch("functions live on different spaces")
    return not bool(np.any((np.abs(f.values) > tol) & (np.abs(g.values) > tol)))


def save_values_csv(f, path):
    """Write one value per atom below a header carrying p and the space hash."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        ptag = "inf" if f.p == math.inf else repr(f.p)
        writer.writerow([f"p={ptag}", f"space={f.space.descriptor_hash()}"])
        for v in f.values:
            writer.writerow([repr(float(v))])


def load_values_csv(path, space):
    """Read a value vector written by save_values_csv onto the given space."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        meta = dict(cell.split("=", 1) for cell in header)
        if meta.get("space") != space.descriptor_hash():
            raise SpaceMismatch("CSV was written for a different space")
        p = math.inf if meta.get("p") == "inf" else float(meta["p"])
        values = [float(row[0]) for row in reader if row]
    return LpFunction(space, values, p)
