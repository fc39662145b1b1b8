"""Matrix-free linear algebra on the weighted grid space.

Conjugate gradients and power iteration operate on callables, never on
explicit matrices, so they work with any linear map.  Norms and inner
products carry the grid's quadrature weight; since that weight is a single
uniform scalar, relative stopping criteria are identical in the weighted
and the plain Euclidean norm, and the iterations below may use Euclidean
arithmetic internally without changing any contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalError
from .linop import Grid


@dataclass(frozen=True)
class WeightedSpace:
    """Discrete L1/L2 structure induced by a grid's quadrature weight.

    ``l1_norm(u) = weight * sum |u_i|`` and
    ``l2_norm(u)^2 = weight * sum u_i^2`` approximate the continuous norms
    over the sampled domain.
    """

    grid: Grid

    @property
    def weight(self) -> float:
        return self.grid.weight

    def inner(self, u: np.ndarray, w: np.ndarray) -> float:
        return self.weight * float(np.dot(u, w))

    def l2_norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(self.weight * np.dot(u, u)))

    def l1_norm(self, u: np.ndarray) -> float:
        return self.weight * float(np.abs(u).sum())


@dataclass(frozen=True)
class CGResult:
    """Outcome of a conjugate-gradient solve."""

    solution: np.ndarray
    converged: bool
    iterations: int


def conjugate_gradient(
    apply_a: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> CGResult:
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Parameters
    ----------
    apply_a : callable
        The linear map.  For a 1-D ``b`` it receives and returns vectors.
        ``b`` may also be an (n, m) block of right-hand sides, in which case
        ``apply_a`` must act columnwise on (n, m) arrays; each column then
        converges independently and is frozen once its residual satisfies
        the tolerance.
    b : np.ndarray
        Right-hand side(s).
    tol : float
        Relative residual tolerance: the solve stops once
        ``norm(A x - b) <= tol * norm(b)`` (per column).
    max_iter : int, optional
        Iteration cap; defaults to twice the dimension, which makes CG an
        effectively exact solver in exact arithmetic.
    x0 : np.ndarray, optional
        Warm start, same shape as ``b``.  Defaults to zero.

    Returns
    -------
    CGResult
        The iterate, whether every column met the tolerance, and the number
        of iterations performed.

    Raises
    ------
    NumericalError
        If non-finite values appear during the iteration.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=float)
    single = b.ndim == 1
    if single:
        block = b[:, None]
        op = lambda block_x: np.asarray(apply_a(block_x[:, 0]), dtype=float)[:, None]
        start = None if x0 is None else np.asarray(x0, dtype=float)[:, None]
    else:
        block = b
        op = apply_a
        start = x0
    result = _cg_columns(op, block, tol=tol, max_iter=max_iter, x0=start)
    if single:
        return CGResult(result.solution[:, 0], result.converged, result.iterations)
    return result


def _cg_columns(apply_a, b, tol, max_iter, x0=None) -> CGResult:
    """Columnwise CG engine; ``apply_a`` must accept (n, m) blocks."""
    n, m = b.shape
    if max_iter is None:
        max_iter = 2 * n
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float, copy=True)
    b_norm = np.sqrt(np.einsum("ij,ij->j", b, b))
    target = tol * b_norm
    r = b - apply_a(x)
    if not np.isfinite(r).all():
        raise NumericalError("conjugate gradient: non-finite initial residual")
    rs = np.einsum("ij,ij->j", r, r)
    # Columns with a zero right-hand side have the exact solution zero.
    trivial = b_norm == 0.0
    if trivial.any():
        x[:, trivial] = 0.0
        rs[trivial] = 0.0
    active = np.sqrt(rs) > target
    p = np.where(active, r, 0.0)
    iterations = 0
    while active.any() and iterations < max_iter:
        q = apply_a(p)
        pq = np.einsum("ij,ij->j", p, q)
        ok = pq > 0.0
        step = np.where(ok, rs / np.where(ok, pq, 1.0), 0.0)
        x = x + step * p
        r = r - step * q
        rs_new = np.einsum("ij,ij->j", r, r)
        if not np.isfinite(rs_new).all():
            raise NumericalError(
                f"conjugate gradient: non-finite residual at iteration {iterations + 1}"
            )
        # A non-positive curvature pq on an active column means the residual
        # has hit its round-off floor; freeze that column where it stands.
        active = active & ok & (np.sqrt(rs_new) > target)
        ratio = np.where(rs > 0.0, rs_new / np.where(rs > 0.0, rs, 1.0), 0.0)
        p = np.where(active, r + ratio * p, 0.0)
        rs = rs_new
        iterations += 1
    converged = bool(np.all(np.sqrt(rs) <= target))
    return CGResult(solution=x, converged=converged, iterations=iterations)


def power_iteration(
    apply_a: Callable[[np.ndarray], np.ndarray],
    dim: int,
    iters: int = 100,
    seed: int = 0,
) -> float:
    """Estimate the largest eigenvalue of a symmetric PSD linear map.

    Runs ``iters`` power steps from a pseudo-random unit start vector drawn
    from ``seed`` and returns the final Rayleigh quotient.  For symmetric
    positive semidefinite maps the estimate never exceeds the true largest
    eigenvalue and is nondecreasing in ``iters`` up to round-off.  A start
    vector that happens to be identically zero is regenerated from
    ``seed + 1``; the all-zero operator yields 0.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    x = np.random.default_rng(seed).standard_normal(dim)
    while not x.any():
        seed += 1
        x = np.random.default_rng(seed).standard_normal(dim)
    x = x / np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iters):
        ax = np.asarray(apply_a(x), dtype=float)
        norm_ax = np.linalg.norm(ax)
        if norm_ax == 0.0:
            return 0.0
        estimate = float(np.dot(x, ax))  # Rayleigh quotient of the unit vector x
        x = ax / norm_ax
    return estimate
