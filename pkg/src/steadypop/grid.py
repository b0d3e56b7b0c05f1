"""Truncated quadrature grids on [0, x_max] standing in for the half line.

A :class:`Grid` carries composite-trapezoid weights, so plain, cumulative and
reverse-cumulative integrals are mutually consistent. Two node layouts are
available: uniform spacing and a geometrically graded layout that clusters
nodes near 0, which cuts the trapezoid bias on decaying exponentials by more
than an order of magnitude at equal node count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import GridMismatchError, ParameterError

UNIFORM = "uniform_trapezoid"
GRADED = "graded_trapezoid"
SCHEMES = (UNIFORM, GRADED)

# last/first spacing for the graded layout
_GRADED_SPACING_RATIO = 100.0


@dataclass(frozen=True)
class Grid:
    """Strictly increasing nodes starting at 0, with positive quadrature weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=float))
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        if nodes.ndim != 1 or weights.shape != nodes.shape:
            raise ParameterError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size < 3:
            raise ParameterError("a grid needs at least 3 nodes")
        if nodes[0] != 0.0:
            raise ParameterError("first node must be exactly 0")
        if np.any(np.diff(nodes) <= 0):
            raise ParameterError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ParameterError("all quadrature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def x_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))


@dataclass(frozen=True)
class DensityProfile:
    """Nonnegative samples of an L1 density on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if values.shape != self.grid.nodes.shape:
            raise GridMismatchError(
                "profile has %d values for a grid of %d nodes" % (values.size, self.grid.n)
            )
        if np.any(values < 0):
            raise ParameterError("density values must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def norm_l1(self) -> float:
        return integrate(self.grid, self.values)


def build_grid(x_max: float, n: int, scheme: str = UNIFORM) -> Grid:
    """Build a composite-trapezoid grid on [0, x_max] with ``n`` nodes."""
    if not x_max > 0:
        raise ParameterError("x_max must be positive, got %r" % (x_max,))
    if n < 3:
        raise ParameterError("n must be at least 3, got %r" % (n,))
    if scheme == UNIFORM:
        nodes = np.linspace(0.0, x_max, n)
    elif scheme == GRADED:
        q = _GRADED_SPACING_RATIO ** (1.0 / (n - 2))
        h0 = x_max * (q - 1.0) / (q ** (n - 1) - 1.0)
        spacings = h0 * q ** np.arange(n - 1)
        nodes = np.concatenate(([0.0], np.cumsum(spacings)))
        nodes[-1] = x_max
    else:
        raise ParameterError("unknown scheme %r (expected one of %s)" % (scheme, SCHEMES))
    d = np.diff(nodes)
    weights = np.empty(n)
    weights[0] = 0.5 * d[0]
    weights[-1] = 0.5 * d[-1]
    weights[1:-1] = 0.5 * (d[:-1] + d[1:])
    return Grid(nodes=nodes, weights=weights)


def _values(grid: Grid, f) -> np.ndarray:
    if isinstance(f, DensityProfile):
        if f.grid is not grid and not np.array_equal(f.grid.nodes, grid.nodes):
            raise GridMismatchError("profile belongs to a different grid")
        return f.values
    arr = np.asarray(f, dtype=float)
    if arr.shape != grid.nodes.shape:
        raise GridMismatchError(
            "got %d samples for a grid of %d nodes" % (arr.size, grid.n)
        )
    return arr


def integrate(grid: Grid, f) -> float:
    """Quadrature approximation of the integral of ``f`` over [0, x_max]."""
    return _accel.weighted_sum(grid.weights, _values(grid, f))


def cumulative_integral(grid: Grid, f) -> np.ndarray:
    """Running trapezoid integral F with F(0) = 0."""
    return _accel.cumtrapz(grid.nodes, _values(grid, f))


def reverse_cumulative_integral(grid: Grid, f) -> np.ndarray:
    """Tail trapezoid integral G with G(x_max) = 0."""
    return _accel.revcumtrapz(grid.nodes, _values(grid, f))


def translate(grid: Grid, f, h: float) -> np.ndarray:
    """Samples of x -> f(x + h), extending f by 0 outside [0, x_max].

    Non-grid-aligned shifts use linear interpolation, consistent with the
    trapezoid accuracy order. Requires a uniform grid.
    """
    if abs(h) >= grid.x_max:
        raise ParameterError("|h| must be smaller than x_max")
    if not grid.is_uniform:
        raise ParameterError("translate requires a uniform grid")
    vals = _values(grid, f)
    return np.interp(grid.nodes + h, grid.nodes, vals, left=0.0, right=0.0)


def zero_profile(grid: Grid) -> DensityProfile:
    return DensityProfile(grid, np.zeros(grid.n))
