"""Finite atomic measure spaces and exact set algebra over their atoms.

Atoms are the only measurable granularity, so almost-everywhere statements
collapse to exact statements about index sets and every null set is empty.
Totals are accumulated with compensated summation so they stay stable for
large atom counts.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .errors import InvalidDiscretization, SpaceMismatch


class MeasureSpace:
    """A finite list of atoms with positive weights and optional geometry.

    ``geometry`` is ``None``, ``"interval"`` (atoms are midpoints of a uniform
    partition of [0, 1]) or ``"grid"`` (atoms are cell centers of an nx-by-ny
    partition of the unit square, stored y-major: index = iy * nx + ix).
    """

    def __init__(self, weights, centers=None, geometry=None, grid_shape=None):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if w.ndim != 1 or w.size == 0:
            raise InvalidDiscretization("need a non-empty 1-d weight vector")
        if not np.all(np.isfinite(w)) or not np.all(w > 0):
            raise InvalidDiscretization("atom weights must be positive and finite")
        w = w.copy()
        w.flags.writeable = False
        self.weights = w
        self.geometry = geometry
        self.grid_shape = tuple(grid_shape) if grid_shape is not None else None
        if geometry == "grid":
            if self.grid_shape is None or self.grid_shape[0] * self.grid_shape[1] != w.size:
                raise InvalidDiscretization("grid shape inconsistent with atom count")
        if centers is not None:
            c = np.asarray(centers, dtype=float).copy()
            c.flags.writeable = False
            if c.shape[0] != w.size:
                raise InvalidDiscretization("centers inconsistent with atom count")
            self.centers = c
        else:
            self.centers = None
        self._total = math.fsum(w)
        if not math.isfinite(self._total) or self._total <= 0:
            raise InvalidDiscretization("total measure must be finite and positive")

    @property
    def size(self):
        return self.weights.size

    @property
    def total_measure(self):
        return self._total

    def __len__(self):
        return self.weights.size

    def __repr__(self):
        tag = self.geometry or "abstract"
        return f"MeasureSpace({tag}, atoms={self.size}, total={self._total:g})"

    # grid index helpers
    def grid_coords(self, index):
        """(ix, iy) cell indices of an atom on a grid space."""
        nx, _ = self.grid_shape
        return index % nx, index // nx

    def descriptor(self):
        if self.geometry == "interval":
            return {"kind": "interval", "n": int(self.size)}
        if self.geometry == "grid":
            nx, ny = self.grid_shape
            return {"kind": "grid", "nx": int(nx), "ny": int(ny)}
        return {"kind": "abstract", "n": int(self.size)}

    def descriptor_hash(self):
        blob = json.dumps(self.descriptor(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]

    # set constructors
    def full_set(self):
        return MeasurableSet(self, np.ones(self.size, dtype=bool))

    def empty_set(self):
        return MeasurableSet(self, np.zeros(self.size, dtype=bool))

    def set_from_indices(self, indices):
        mask = np.zeros(self.size, dtype=bool)
        mask[np.asarray(indices, dtype=int)] = True
        return MeasurableSet(self, mask)

    def set_from_mask(self, mask):
        return MeasurableSet(self, np.asarray(mask, dtype=bool))


def uniform_interval(n):
    """Uniform n-atom discretization of [0, 1]; atom i sits at (i + 0.5) / n."""
    if n < 2:
        raise InvalidDiscretization("an interval discretization needs at least 2 atoms")
    n = int(n)
    weights = np.full(n, 1.0 / n)
    centers = (np.arange(n) + 0.5) / n
    return MeasureSpace(weights, centers=centers, geometry="interval")


def product_grid(nx, ny):
    """Uniform nx-by-ny discretization of the unit square with cell-center atoms."""
    if nx < 2 or ny < 2:
        raise InvalidDiscretization("a grid discretization needs at least 2 atoms per side")
    nx, ny = int(nx), int(ny)
    weights = np.full(nx * ny, 1.0 / (nx * ny))
    ix = np.tile(np.arange(nx), ny)
    iy = np.repeat(np.arange(ny), nx)
    centers = np.column_stack([(ix + 0.5) / nx, (iy + 0.5) / ny])
    return MeasureSpace(weights, centers=centers, geometry="grid", grid_shape=(nx, ny))


class MeasurableSet:
    """A subset of atoms of a fixed space, stored as a boolean mask."""

    def __init__(self, space, mask):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (space.size,):
            raise SpaceMismatch("mask length does not match the space")
        mask = mask.copy()
        mask.flags.writeable = False
        self.space = space
        self.mask = mask

    @property
    def measure(self):
        return math.fsum(self.space.weights[self.mask])

    @property
    def indices(self):
        return np.flatnonzero(self.mask)

    @property
    def size(self):
        return int(np.count_nonzero(self.mask))

    @property
    def is_empty(self):
        return not self.mask.any()

    def _check(self, other):
        if other.space is not self.space:
            raise SpaceMismatch("sets live on different spaces")

    def complement(self):
        return MeasurableSet(self.space, ~self.mask)

    def union(self, other):
        self._check(other)
        return MeasurableSet(self.space, self.mask | other.mask)

    def intersect(self, other):
        self._check(other)
        return MeasurableSet(self.space, self.mask & other.mask)

    def difference(self, other):
        self._check(other)
        return MeasurableSet(self.space, self.mask & ~other.mask)

    def subset_of(self, other):
        self._check(other)
        return bool(np.all(~self.mask | other.mask))

    def disjoint_from(self, other):
        self._check(other)
        return not bool(np.any(self.mask & other.mask))

    __invert__ = complement
    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def __eq__(self, other):
        if not isinstance(other, MeasurableSet):
            return NotImplemented
        return self.space is other.space and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((id(self.space), self.mask.tobytes()))

    def __repr__(self):
        return f"MeasurableSet(atoms={self.size}/{self.space.size}, measure={self.measure:g})"

    def to_json(self):
        return [int(i) for i in self.indices]


def measure(E):
    """Total weight of a measurable set."""
    return E.measure


def complement(E):
    return E.complement()


def union(E, F):
    return E.union(F)


def intersect(E, F):
    return E.intersect(F)
