"""Midpoint grids and the discretized integral operator of the test problem.

The forward map is the integral operator on [0, 1] whose kernel
``k(x, y) = min{x(1-y), y(1-x)}`` is the Green's function of the negative
second derivative with zero boundary values, so inverting it amounts to
numerically differentiating the data twice.  The operator is discretized by
the composite midpoint rule on a uniform grid; the same grid carries the
quadrature weight used for all discrete norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid on [0, 1].

    Attributes
    ----------
    n : int
        Number of grid points.
    points : np.ndarray
        Cell midpoints, ``points[i] = (2(i+1) - 1) / (2n)``.
    weight : float
        Quadrature weight ``1/n`` of the composite midpoint rule; doubles as
        the measure of a single cell, so ``weight * n == 1``.
    """

    n: int
    points: np.ndarray
    weight: float


def make_midpoint_grid(n: int) -> Grid:
    """Build the n-point midpoint grid on [0, 1].

    Raises
    ------
    ValueError
        If ``n`` is not a positive integer.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"grid size n must be a positive integer, got {n!r}")
    n = int(n)
    points = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    points.flags.writeable = False
    return Grid(n=n, points=points, weight=1.0 / n)


def green_kernel(x, y):
    """Kernel ``min{x(1-y), y(1-x)}`` on the unit square.

    Accepts scalars or broadcastable arrays; symmetric in its arguments and
    zero whenever either argument lies on the boundary.

    Raises
    ------
    ValueError
        If any argument lies outside [0, 1].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("kernel arguments must lie in [0, 1]")
    return np.minimum(x * (1.0 - y), y * (1.0 - x))


@dataclass(frozen=True)
class DiscretizedOperator:
    """Midpoint-rule discretization of an integral operator.

    ``apply`` realizes ``(Tu)(x_i) = weight * sum_j k(x_i, x_j) u_j`` through
    the assembled matrix ``A_ij = weight * k(x_i, x_j)``.  The adjoint is
    taken in the weighted inner product; because the weight is uniform it
    coincides with the plain matrix transpose.  Instances are immutable and
    safe for concurrent read-only use.
    """

    domain_grid: Grid
    codomain_grid: Grid
    matrix: np.ndarray
    kernel: Kernel | None = None

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Forward application; ``u`` may be a vector or an (n, m) block."""
        return self.matrix @ u

    def apply_adjoint(self, w: np.ndarray) -> np.ndarray:
        """Adjoint application in the weighted inner product."""
        return self.matrix.T @ w


def assemble_operator(grid: Grid, kernel: Kernel) -> DiscretizedOperator:
    """Assemble the midpoint discretization of the integral operator.

    The matrix entries are ``weight * kernel(x_i, x_j)``; for a symmetric
    kernel the matrix is symmetric and the adjoint equals the forward map.
    """
    x = grid.points
    matrix = grid.weight * np.asarray(kernel(x[:, None], x[None, :]), dtype=float)
    matrix.flags.writeable = False
    return DiscretizedOperator(
        domain_grid=grid, codomain_grid=grid, matrix=matrix, kernel=kernel
    )


def identity_operator(grid: Grid) -> DiscretizedOperator:
    """Identity map on the grid, useful as a trivial forward operator."""
    matrix = np.eye(grid.n)
    matrix.flags.writeable = False
    return DiscretizedOperator(domain_grid=grid, codomain_grid=grid, matrix=matrix)


def true_solution(grid: Grid) -> np.ndarray:
    """Hat-function truth sampled at the grid: x below 1/2, 1-x above."""
    x = grid.points
    return np.where(x <= 0.5, x, 1.0 - x)


def exact_data(grid: Grid) -> np.ndarray:
    """Analytic image of the hat function under the integral operator.

    Evaluates the closed form of g with -g'' = u_true and g(0) = g(1) = 0,
    which is piecewise cubic:

        g(x) = x/8 - x^3/6                          for x in [0, 1/2],
        g(x) = x^3/6 - x^2/2 + 3x/8 - 1/24          for x in [1/2, 1].

    Sampling this closed form keeps the data independent of the grid used
    for reconstruction, so no discretization error of the forward map leaks
    into the simulated observations.
    """
    x = grid.points
    left = x / 8.0 - x**3 / 6.0
    right = x**3 / 6.0 - x**2 / 2.0 + 3.0 * x / 8.0 - 1.0 / 24.0
    return np.where(x <= 0.5, left, right)
