"""Truncated grids and the model SG-elliptic operators on the line.

The model family is

    P = <x>^{m/2} (1 - d^2/dx^2)^{mu/2} <x>^{m/2},    m, mu in {2, 4, 6},

discretised on [-L, L] with the standard second-difference matrix K and a
Dirichlet closure.  The assembled matrix is banded with half bandwidth
``mu // 2`` and is kept in LAPACK upper banded storage, so fine grids never
need a dense N x N array.
"""

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
from scipy import sparse

from .errors import ParameterError, UnsupportedOrderError

SUPPORTED_ORDERS = (2, 4, 6)


@dataclass(frozen=True)
class Grid:
    half_width: float
    points: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ParameterError(f"half_width must be positive, got {self.half_width}")
        if int(self.points) != self.points or self.points < 3 or self.points % 2 == 0:
            raise ParameterError(f"points must be an odd integer >= 3, got {self.points}")

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.points - 1)

    @cached_property
    def nodes(self):
        n = self.points
        half = (n - 1) // 2
        # built from the centre out so that x[i] == -x[n-1-i] bit for bit
        right = np.arange(1, half + 1) * self.spacing
        right[-1] = self.half_width
        x = np.concatenate([-right[::-1], [0.0], right])
        x.flags.writeable = False
        return x


@dataclass(frozen=True)
class OperatorSpec:
    m: int = 2
    mu: int = 2
    boundary: str = "dirichlet"

    def __post_init__(self):
        for name in ("m", "mu"):
            value = getattr(self, name)
            if value not in SUPPORTED_ORDERS:
                raise UnsupportedOrderError(
                    f"{name}={value!r} unsupported; orders must be one of {SUPPORTED_ORDERS}")
        if self.boundary != "dirichlet":
            raise ParameterError("only the Dirichlet closure is implemented")


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Symmetric banded matrix plus the grid and orders it came from.

    ``bands[bw + i - j, j] == A[i, j]`` for ``i <= j`` (LAPACK upper form).
    """

    grid: Grid
    spec: OperatorSpec
    bands: np.ndarray

    @property
    def bandwidth(self):
        return self.bands.shape[0] - 1

    @property
    def shape(self):
        n = self.grid.points
        return (n, n)

    @cached_property
    def matrix(self):
        """The operator as a scipy CSR matrix (exactly symmetric)."""
        n, bw = self.grid.points, self.bandwidth
        diags, offsets = [], []
        for k in range(bw + 1):
            upper = self.bands[bw - k, k:]
            diags.append(upper)
            offsets.append(k)
            if k:
                diags.append(upper)
                offsets.append(-k)
        return sparse.diags(diags, offsets, shape=(n, n), format="csr")

    def toarray(self):
        return self.matrix.toarray()

    def matvec(self, v):
        return self.matrix @ np.asarray(v)


def build_grid(half_width, points):
    return Grid(float(half_width), int(points) if float(points).is_integer() else points)


def japanese_bracket(x):
    """<x> = sqrt(1 + x^2); works elementwise on arrays."""
    return np.sqrt(1.0 + np.square(x))


def second_difference(grid):
    """K with K_ii = 2/h^2, K_{i,i+-1} = -1/h^2 (Dirichlet closure)."""
    n, h = grid.points, grid.spacing
    off = np.full(n - 1, -1.0 / h**2)
    return sparse.diags([off, np.full(n, 2.0 / h**2), off], [-1, 0, 1], format="csr")


def _bessel_power(grid, p):
    """(I + K)^p as a sparse matrix, p >= 0."""
    n = grid.points
    base = sparse.identity(n, format="csr") + second_difference(grid)
    out = sparse.identity(n, format="csr")
    for _ in range(p):
        out = out @ base
    return out


def _check_even(order, name):
    if int(order) != order or order < 0 or order % 2:
        raise UnsupportedOrderError(f"{name}={order!r}: only non-negative even orders are supported")
    return int(order)


def _bessel_power_diagonals(grid, p):
    """Upper diagonals 0..p of (I + K)^p.

    Uses (I + K) = h^-2 ((h^2 + 2) I - S) with S the path adjacency matrix;
    the powers of S are exact integers, so every entry is evaluated by the same
    floating point formula as its mirror image across the grid centre.
    """
    n, h = grid.points, grid.spacing
    adjacency = sparse.diags([np.ones(n - 1, dtype=np.int64)] * 2, [-1, 1], format="csr", dtype=np.int64)
    walks = [sparse.identity(n, format="csr", dtype=np.int64)]
    for _ in range(p):
        walks.append(walks[-1] @ adjacency)
    c = h * h + 2.0
    diagonals = []
    for k in range(p + 1):
        acc = np.zeros(n - k)
        for q in range(p + 1):
            coeff = comb(p, q) * c ** (p - q) * (-1) ** q
            acc = acc + coeff * walks[q].diagonal(k).astype(float)
        diagonals.append(acc / h ** (2 * p))
    return diagonals


def assemble_operator(grid, spec):
    """Assemble A = M^{m/2} (I + K)^{mu/2} M^{m/2} with M = diag(<x_i>).

    Only the upper triangle is computed; the lower one is its mirror image,
    which makes A == A.T hold exactly.  Entries are formed as d * (w_i w_j)
    so that A also commutes exactly with the reflection x -> -x.
    """
    m = _check_even(spec.m, "m")
    mu = _check_even(spec.mu, "mu")
    x = grid.nodes
    weight = japanese_bracket(x) ** (m // 2)
    bw = mu // 2
    diagonals = _bessel_power_diagonals(grid, bw)
    bands = np.zeros((bw + 1, grid.points))
    # diagonal: <x>^m exactly, no rounding from multiplying two square roots
    bands[bw] = diagonals[0] * (1.0 + x**2) ** (m // 2)
    for k in range(1, bw + 1):
        bands[bw - k, k:] = diagonals[k] * (weight[:-k] * weight[k:])
    bands.flags.writeable = False
    return DiscretizedOperator(grid=grid, spec=spec, bands=bands)


def symbol_eval(spec, x, xi):
    """Principal symbol <x>^m <xi>^mu of the model operator."""
    return (1.0 + np.square(x)) ** (spec.m / 2) * (1.0 + np.square(xi)) ** (spec.mu / 2)


def ellipticity_ratio(spec, x, xi):
    return symbol_eval(spec, x, xi) / (japanese_bracket(x) ** spec.m * japanese_bracket(xi) ** spec.mu)


def direct_norm(v, r, rho, grid):
    """Discrete weighted Sobolev norm sqrt(h * |<x>^r (I+K)^{rho/2} v|^2)."""
    rho = _check_even(rho, "rho")
    v = np.asarray(v)
    if v.shape[0] != grid.points:
        raise ParameterError(f"vector length {v.shape[0]} does not match grid ({grid.points})")
    w = _bessel_power(grid, rho // 2) @ v if rho else v
    if r:
        w = japanese_bracket(grid.nodes) ** r * w
    return float(np.sqrt(grid.spacing) * np.linalg.norm(w))


def reflection_defect(op):
    """max |A R - R A| where R reverses the grid indices.

    A R - R A = (A - R A R) R, and R A R reverses every diagonal, so the
    defect is the largest asymmetry of a diagonal read back to front.
    """
    bw = op.bandwidth
    worst = 0.0
    for k in range(bw + 1):
        d = op.bands[bw - k, k:]
        worst = max(worst, float(np.max(np.abs(d - d[::-1]))))
    return worst
