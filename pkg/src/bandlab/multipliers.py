"""A small named family of multipliers covering every scenario in the lab.

Specs are strings like ``identity``, ``const(0.5)``, ``plateau(0.25,0.5)``,
``affine(0.5,0.5)``, ``staircase(8)``, ``coord-x`` / ``coord-y`` (grids) or
``csv:path`` for an imported value vector. Multipliers are returned as
sup-norm functions (p = inf).
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import GeometryMismatch, PreconditionError
from .lpspace import LpFunction, load_values_csv

_SPEC_RE = re.compile(r"^([a-zA-Z][a-zA-Z0-9_-]*)(?:\(([^)]*)\))?$")

FAMILY = ("identity", "const", "plateau", "affine", "staircase", "coord-x", "coord-y")


def _interval_centers(space, what):
    if space.geometry != "interval":
        raise GeometryMismatch(f"{what} needs an interval space")
    return space.centers


def plateau_values(t, a, b):
    """t below a, constant a on [a, b], shifted t - (b - a) above b."""
    return np.where(t < a, t, np.where(t <= b, a, t - (b - a)))


def make_multiplier(space, spec):
    """Build the multiplier described by ``spec`` on the given space."""
    if spec.startswith("csv:"):
        f = load_values_csv(spec[4:], space)
        return LpFunction(space, f.values, math.inf)
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise PreconditionError(f"cannot parse multiplier spec {spec!r}")
    name = m.group(1)
    args = [float(a) for a in m.group(2).split(",")] if m.group(2) else []

    if name == "identity":
        values = _interval_centers(space, "identity")
    elif name == "const":
        values = np.full(space.size, args[0] if args else 1.0)
    elif name == "plateau":
        if len(args) != 2 or not 0 < args[0] < args[1] < 1:
            raise PreconditionError("plateau needs bounds 0 < a < b < 1")
        values = plateau_values(_interval_centers(space, "plateau"), args[0], args[1])
    elif name == "affine":
        if len(args) != 2:
            raise PreconditionError("affine needs a slope and an offset")
        values = args[0] * _interval_centers(space, "affine") + args[1]
    elif name == "staircase":
        if len(args) != 1 or args[0] < 1:
            raise PreconditionError("staircase needs a positive step count")
        k = args[0]
        values = np.floor(_interval_centers(space, "staircase") * k) / k
    elif name in ("coord-x", "coord-y"):
        if space.geometry != "grid":
            raise GeometryMismatch(f"{name} needs a product-grid space")
        values = space.centers[:, 0 if name == "coord-x" else 1]
    else:
        raise PreconditionError(f"unknown multiplier {name!r}; family: {FAMILY}")
    return LpFunction(space, values, math.inf)
