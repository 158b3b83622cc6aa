"""Dense-matrix linear operators on a discretized function space.

An operator acts on value vectors by ``(Tf)_i = sum_j a_ij f_j``. On atomic
spaces positivity, modulus and domination are entrywise facts about the
matrix, which keeps all order-theoretic checks exact. Induced norms are
computed exactly where a closed form exists (p = 1, p = inf, diagonal
matrices) and estimated by iteration elsewhere, always as a certified
(lower, upper) pair.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryMismatch, NotAFlat, SpaceMismatch
from .lpspace import LpFunction
from .measure import MeasurableSet

_TWO_NORM_TOL = 1e-13
_TWO_NORM_MAXITER = 20_000
_SCALING_TOL = 1e-12
_SCALING_MAXITER = 2_000


@dataclass(frozen=True)
class OperatorNormEstimate:
    """Certified bracket lower <= ||T|| <= upper for an induced p-norm.

    ``maximizer`` is a value vector whose norm ratio attains ``lower``.
    For the exact methods lower == upper.
    """

    lower: float
    upper: float
    method: str
    iterations: int = 0
    converged: bool = True
    maximizer: np.ndarray | None = None


class LinearOperator:
    """A dense real matrix bound to a space and an ambient exponent."""

    def __init__(self, space, matrix, p):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (space.size, space.size):
            raise SpaceMismatch("matrix shape does not match the space")
        m = m.copy()
        m.flags.writeable = False
        self.space = space
        self.matrix = m
        self.p = p
        self._diag = None

    def apply(self, f):
        if f.space is not self.space or f.p != self.p:
            raise SpaceMismatch("function space or exponent does not match the operator")
        return LpFunction(self.space, self.matrix @ f.values, self.p)

    def matvec(self, values):
        return self.matrix @ np.asarray(values, dtype=float)

    @property
    def is_positive(self):
        return bool(np.all(self.matrix >= 0))

    @property
    def is_diagonal(self):
        if self._diag is None:
            off = self.matrix.copy()
            np.fill_diagonal(off, 0.0)
            self._diag = not off.any()
        return self._diag

    def modulus(self):
        """Entrywise absolute value: the least positive operator dominating T."""
        return LinearOperator(self.space, np.abs(self.matrix), self.p)

    def _check(self, other):
        if other.space is not self.space or other.p != self.p:
            raise SpaceMismatch("operators must share space and exponent")

    def compose(self, other):
        self._check(other)
        return LinearOperator(self.space, self.matrix @ other.matrix, self.p)

    __matmul__ = compose

    def __add__(self, other):
        self._check(other)
        return LinearOperator(self.space, self.matrix + other.matrix, self.p)

    def __sub__(self, other):
        self._check(other)
        return LinearOperator(self.space, self.matrix - other.matrix, self.p)

    def __mul__(self, scalar):
        return LinearOperator(self.space, self.matrix * float(scalar), self.p)

    __rmul__ = __mul__

    def __repr__(self):
        return f"LinearOperator(p={self.p}, shape={self.matrix.shape})"


def identity_operator(space, p):
    return LinearOperator(space, np.eye(space.size), p)


def multiplication(phi, p):
    """Diagonal operator f -> phi * f for a bounded multiplier phi."""
    return LinearOperator(phi.space, np.diag(phi.values), p)


def row_averaging(grid, p):
    """On a product grid, replace f by its average along the x direction.

    Every output row (fixed y) is constant; the operator is positive, is not
    disjointness preserving, and commutes with multiplication by any function
    of y alone.
    """
    if grid.geometry != "grid":
        raise GeometryMismatch("row averaging needs a product-grid space")
    nx, ny = grid.grid_shape
    block = np.full((nx, nx), 1.0 / nx)
    m = np.kron(np.eye(ny), block)
    return LinearOperator(grid, m, p)


def gaussian_kernel(width):
    """k(s, t) = exp(-|s - t|^2 / width) on interval or grid centers."""

    def k(s, t):
        diff = np.asarray(s, dtype=float) - np.asarray(t, dtype=float)
        d2 = diff ** 2 if diff.ndim <= 2 else np.sum(diff ** 2, axis=-1)
        return np.exp(-d2 / width)

    return k


def kernel_operator(space, kernel, p):
    """Quadrature discretization a_ij = k(c_i, c_j) w_j of an integral kernel.

    ``kernel`` is evaluated on broadcast center arrays: scalars on an
    interval, coordinate pairs (last axis of length 2) on a grid.
    """
    if space.centers is None:
        raise GeometryMismatch("kernel discretization needs atom centers")
    c = space.centers
    if c.ndim == 1:
        k = np.asarray(kernel(c[:, None], c[None, :]), dtype=float)
    else:
        k = np.asarray(kernel(c[:, None, :], c[None, :, :]), dtype=float)
    return LinearOperator(space, k * space.weights[None, :], p)


def rank_one_flat(phi, flat, p, tol=0.0):
    """Averaging projection onto a flat of the multiplier.

    For A with phi constant on A and mu(A) > 0 this returns
    ``Pf = mean_A(f) * chi_A``, a positive rank-one idempotent commuting with
    multiplication by phi.
    """
    if flat.space is not phi.space:
        raise SpaceMismatch("flat set lives on a different space")
    if flat.is_empty:
        raise NotAFlat("the proposed flat has no atoms")
    on_flat = phi.values[flat.mask]
    spread = float(on_flat.max() - on_flat.min())
    if spread > 2 * tol:
        raise NotAFlat(f"multiplier varies by {spread:g} on the proposed set")
    mass = flat.measure
    chi = flat.mask.astype(float)
    m = np.outer(chi, chi * phi.space.weights) / mass
    return LinearOperator(phi.space, m, p)


def save_matrix_csv(op, path):
    """Write the matrix row by row below a header carrying p and the space hash."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        ptag = "inf" if op.p == math.inf else repr(op.p)
        writer.writerow([f"p={ptag}", f"space={op.space.descriptor_hash()}"])
        for row in op.matrix:
            writer.writerow([repr(float(v)) for v in row])


def load_matrix_csv(path, space):
    """Read an operator written by save_matrix_csv onto the given space."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        meta = dict(cell.split("=", 1) for cell in header)
        if meta.get("space") != space.descriptor_hash():
            raise SpaceMismatch("CSV was written for a different space")
        p = math.inf if meta.get("p") == "inf" else float(meta["p"])
        rows = [[float(v) for v in row] for row in reader if row]
    return LinearOperator(space, rows, p)


def dominates(big, small):
    """True iff |small| <= big entrywise, i.e. |small x| <= big |x| for all x."""
    if small.space is not big.space:
        raise SpaceMismatch("operators live on different spaces")
    return bool(np.all(np.abs(small.matrix) <= big.matrix))


def commutator_norm(a, b):
    """Upper estimate of the L2(mu) norm of AB - BA (exact zero when they commute).

    Uses the Frobenius norm of the weight-conjugated commutator, a valid
    upper bound of the induced weighted 2-norm.
    """
    a._check(b)
    c = a.matrix @ b.matrix - b.matrix @ a.matrix
    rw = np.sqrt(a.space.weights)
    return float(np.linalg.norm(c * rw[:, None] / rw[None, :]))


def _weighted_pnorm(values, weights, p):
    if p == math.inf:
        return float(np.max(np.abs(values))) if len(values) else 0.0
    return float(math.fsum(weights * np.abs(values) ** p) ** (1.0 / p))


def _exact_l1_norm(matrix, weights):
    cols = (weights[:, None] * np.abs(matrix)).sum(axis=0) / weights
    return float(cols.max()), int(np.argmax(cols))


def _exact_linf_norm(matrix):
    rows = np.abs(matrix).sum(axis=1)
    return float(rows.max()), int(np.argmax(rows))


def weighted_two_norm_estimate(block, w_out, w_in, tol=_TWO_NORM_TOL,
                               max_iter=_TWO_NORM_MAXITER):
    """(lower, upper, iterations, converged, maximizer) for a weighted 2-norm.

    The block may be rectangular; it maps L2(w_in) into L2(w_out). The lower
    bound comes from power iteration on the conjugated matrix, the upper from
    min(Frobenius, Schur row/column bound).
    """
    if block.size == 0 or not block.any():
        return 0.0, 0.0, 0, True, None
    b = block * np.sqrt(w_out)[:, None] / np.sqrt(w_in)[None, :]
    fro = float(np.linalg.norm(b))
    schur = math.sqrt(float(np.abs(b).sum(axis=0).max()) * float(np.abs(b).sum(axis=1).max()))
    upper = min(fro, schur)

    rng = np.random.default_rng(0)
    v = rng.standard_normal(b.shape[1])
    v /= np.linalg.norm(v)
    sigma2 = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = b.T @ (b @ v)
        new = float(v @ z)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            v = rng.standard_normal(b.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = z / nz
        if abs(new - sigma2) <= tol * max(new, 1e-300):
            sigma2 = new
            converged = True
            break
        sigma2 = new
    lower = min(math.sqrt(max(sigma2, 0.0)), upper)
    maximizer = v / np.sqrt(w_in)
    return lower, max(upper, lower), it, converged, maximizer


def _scaling_iteration(matrix, weights, p, tol=_SCALING_TOL, max_iter=_SCALING_MAXITER):
    """Monotone fixed-point iteration for a lower bound of the induced p-norm.

    Alternates the norming map y -> sign(y)|y|^(p-1) with the weighted
    adjoint; the Rayleigh-type ratio ||Ax||_p is nondecreasing and converges
    to a stationary ratio, which is a valid lower bound (and the norm itself
    for positive matrices).
    """
    n = matrix.shape[1]
    x = np.ones(n)
    x /= _weighted_pnorm(x, weights, p)
    lam = 0.0
    converged = False
    it = 0
    restarted = False
    for it in range(1, max_iter + 1):
        y = matrix @ x
        new = _weighted_pnorm(y, weights, p)
        if new == 0.0:
            if restarted:
                break
            rng = np.random.default_rng(0)
            x = rng.standard_normal(n)
            x /= _weighted_pnorm(x, weights, p)
            restarted = True
            continue
        if abs(new - lam) <= tol * new:
            lam = new
            converged = True
            break
        lam = new
        g = np.sign(y) * np.abs(y) ** (p - 1.0)
        z = (matrix.T @ (weights * g)) / weights
        xr = np.sign(z) * np.abs(z) ** (1.0 / (p - 1.0))
        nx = _weighted_pnorm(xr, weights, p)
        if nx == 0.0:
            break
        x = xr / nx
    return lam, x, it, converged


def operator_norm(op, p=None):
    """Certified estimate of the induced norm of ``op`` on L_p(mu).

    Exact for diagonal matrices (any p), for p = 1 (max weighted column sum)
    and for p = inf (max absolute row sum). p = 2 uses power iteration on the
    weight-conjugated matrix; other finite p use the monotone scaling
    iteration for the lower bound, bracketed above by the interpolation bound
    ``||T||_1^(1/p) * ||T||_inf^(1-1/p)``.
    """
    if p is None:
        p = op.p
    elif p != op.p:
        raise SpaceMismatch("requested exponent does not match the operator")
    matrix = op.matrix
    w = op.space.weights

    if op.is_diagonal:
        d = np.abs(np.diag(matrix))
        j = int(np.argmax(d))
        peak = float(d[j])
        maximizer = np.zeros(op.space.size)
        maximizer[j] = 1.0
        return OperatorNormEstimate(peak, peak, "exact-multiplication", 0, True, maximizer)

    if p == 1:
        val, j = _exact_l1_norm(matrix, w)
        maximizer = np.zeros(op.space.size)
        maximizer[j] = 1.0
        return OperatorNormEstimate(val, val, "exact-p1", 0, True, maximizer)

    if p == math.inf:
        val, i = _exact_linf_norm(matrix)
        signs = np.sign(matrix[i])
        signs[signs == 0] = 1.0
        return OperatorNormEstimate(val, val, "exact-pinf", 0, True, signs)

    if p == 2:
        lower, upper, it, conv, maximizer = weighted_two_norm_estimate(matrix, w, w)
        return OperatorNormEstimate(lower, upper, "power-iteration-p2", it, conv, maximizer)

    lam, x, it, conv = _scaling_iteration(matrix, w, p)
    n1, _ = _exact_l1_norm(matrix, w)
    ninf, _ = _exact_linf_norm(matrix)
    upper = n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p)
    return OperatorNormEstimate(min(lam, upper), max(upper, lam), "boyd-iteration", it, conv, x)
