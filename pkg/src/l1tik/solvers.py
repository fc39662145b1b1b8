"""Reconstruction methods for absolute-deviation data fitting.

All three solvers minimize a data-fit term plus ``alpha`` times the squared
weighted L2 norm of the unknown:

* ``admm_solve``: operator splitting on ``Tu - v = g`` whose primal update
  solves the regularized normal equations ``(2 alpha I + rho T*T) u = rhs``
  with warm-started conjugate gradients, followed by a componentwise
  soft-threshold update of the split variable and a dual ascent step.
* ``adlpmm_solve``: the linearized proximal variant.  Adding a proximal term
  ``(1/2)||u - u_k||_G^2`` with ``G = beta I - rho T*T`` turns the primal
  update into a single adjoint application, valid whenever
  ``beta > rho * lambda_max(T*T)``.
* ``l2_tikhonov_solve``: the least-squares baseline via the normal equations
  ``(T*T + alpha I) u = T* g``.

The splitting solvers run a fixed number of iterations from zero initial
values; an optional residual-based stop is available but off by default.
Norms are measure-weighted throughout, yet the update formulas themselves
are weight-free: the uniform weight multiplies both the L1 term and the
augmented L2 term of the split objective, so it cancels componentwise and
the soft-threshold level is exactly ``1/rho``.  The multiplier is stored as
a raw vector for the same reason.

Internally every iteration acts on an ``(n, m)`` block of iterates with one
regularization value per column, which is what makes sweeping a whole alpha
grid affordable; the public entry points are the single-column case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .linop import DiscretizedOperator
from .numlin import WeightedSpace, _cg_columns, power_iteration

POWER_ITERS = 100
BETA_MARGIN = 1.05


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by the splitting solvers.

    Attributes
    ----------
    alpha : float
        Regularization weight of the squared-norm penalty, > 0.
    rho_pen : float
        Augmented-Lagrangian penalty, > 0.  The minimizer does not depend on
        it; it only affects convergence speed.
    beta : float or None
        Proximal constant of the linearized solver.  ``None`` selects the
        automatic rule ``1.05 * rho_pen * lambda_max(T*T)`` with the spectral
        norm estimated by power iteration; an explicit value must exceed
        ``rho_pen * lambda_max(T*T)``.
    max_iter : int
        Fixed iteration count of the splitting loop.
    seed : int
        Seed of the power-iteration start vector (beta handling only).
    inner_tol : float
        Relative tolerance of the inner conjugate-gradient solves.
    stop_tol : float or None
        Optional early stop: terminate once the weighted primal residual
        falls below ``stop_tol * (1 + ||g||)``.  Off by default to keep the
        fixed-iteration protocol.
    """

    alpha: float
    rho_pen: float = 1.0
    beta: float | None = None
    max_iter: int = 10_000
    seed: int = 0
    inner_tol: float = 1e-10
    stop_tol: float | None = None

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha!r}")
        if not self.rho_pen > 0.0:
            raise ConfigurationError(f"rho_pen must be positive, got {self.rho_pen!r}")
        if self.beta is not None and not self.beta > 0.0:
            raise ConfigurationError(f"beta must be positive or None, got {self.beta!r}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be at least 1, got {self.max_iter!r}")
        if not self.inner_tol > 0.0:
            raise ConfigurationError(f"inner_tol must be positive, got {self.inner_tol!r}")
        if self.stop_tol is not None and not self.stop_tol > 0.0:
            raise ConfigurationError(f"stop_tol must be positive or None, got {self.stop_tol!r}")


@dataclass(frozen=True)
class SolveResult:
    """Final iterates and diagnostics of a solve.

    ``objective`` is the value of the solved problem's objective at ``u``;
    ``primal_residual`` is the weighted L2 norm of ``Tu - v - g`` (of
    ``Tu - g`` for the least-squares baseline, whose ``v`` and ``mu`` are
    empty).  ``objective_history`` samples the objective every 100
    iterations when recorded.
    """

    u: np.ndarray
    v: np.ndarray
    mu: np.ndarray
    objective: float
    primal_residual: float
    iterations_run: int
    objective_history: list[float] | None = None


def soft_threshold(x, tau):
    """Componentwise shrinkage toward zero with dead zone ``[-tau, tau]``.

    Returns ``x - tau`` for ``x >= tau``, zero for ``|x| <= tau`` and
    ``x + tau`` for ``x < -tau``; this is the proximal map of the absolute
    value.  Applies elementwise to arrays.
    """
    if tau < 0.0:
        raise ValueError(f"threshold tau must be nonnegative, got {tau!r}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def objective_l1(op: DiscretizedOperator, g_obs: np.ndarray, alpha: float, u: np.ndarray) -> float:
    """Weighted objective ``||Tu - g||_L1 + alpha ||u||_L2^2``."""
    w = op.codomain_grid.weight
    residual = op.apply(u) - g_obs
    return w * float(np.abs(residual).sum()) + alpha * op.domain_grid.weight * float(np.dot(u, u))


def objective_l2(op: DiscretizedOperator, g_obs: np.ndarray, alpha: float, u: np.ndarray) -> float:
    """Weighted objective ``||Tu - g||_L2^2 + alpha ||u||_L2^2``."""
    w = op.codomain_grid.weight
    residual = op.apply(u) - g_obs
    return w * float(np.dot(residual, residual)) + alpha * op.domain_grid.weight * float(np.dot(u, u))


def resolve_beta(op: DiscretizedOperator, cfg: SolverConfig) -> float:
    """Return the proximal constant, validating an explicit choice.

    The spectral norm of ``T*T`` is estimated by power iteration (a lower
    bound up to round-off), the automatic rule adds a 5% safety margin on
    top of it, and an explicit ``beta`` at or below ``rho_pen`` times the
    estimate is rejected.
    """
    n = op.domain_grid.n
    estimate = power_iteration(
        lambda x: op.apply_adjoint(op.apply(x)), dim=n, iters=POWER_ITERS, seed=cfg.seed
    )
    if cfg.beta is None:
        return BETA_MARGIN * cfg.rho_pen * estimate
    if cfg.beta <= cfg.rho_pen * estimate:
        raise ConfigurationError(
            f"beta = {cfg.beta!r} must exceed rho_pen * lambda_max(T*T) "
            f"(estimated {cfg.rho_pen * estimate!r})"
        )
    return cfg.beta


def _objective_columns(w, alphas, big_tu, big_u, big_g):
    """Per-column weighted L1 objective of an iterate block."""
    misfit = w * np.abs(big_tu - big_g).sum(axis=0)
    penalty = alphas * w * np.einsum("ij,ij->j", big_u, big_u)
    return misfit + penalty


def _check_finite(block, name, k):
    if not np.isfinite(block).all():
        raise NumericalError(f"{name} produced non-finite values at iteration {k}")


def _iterate_admm(op, g, alphas, rho, inner_tol, max_iter, history_every=None, stop_tol=None):
    """Splitting loop with exact (CG) primal updates on an (n, m) block."""
    n = g.size
    m = alphas.size
    w = op.codomain_grid.weight
    arow = alphas[None, :]
    big_g = np.broadcast_to(g[:, None], (n, m))
    u = np.zeros((n, m))
    v = np.zeros((n, m))
    mu = np.zeros((n, m))
    tu = np.zeros((n, m))

    def normal_op(x):
        return 2.0 * arow * x + rho * op.apply_adjoint(op.apply(x))

    stop_level = None if stop_tol is None else stop_tol * (1.0 + np.sqrt(w * np.dot(g, g)))
    history = [] if history_every else None
    iterations = 0
    for k in range(max_iter):
        rhs = op.apply_adjoint(rho * (v + big_g) - mu)
        cg = _cg_columns(normal_op, rhs, tol=inner_tol, max_iter=2 * n, x0=u)
        u = cg.solution
        tu = op.apply(u)
        v = soft_threshold(mu / rho + tu - big_g, 1.0 / rho)
        d = tu - v - big_g
        mu = mu + rho * d
        iterations = k + 1
        _check_finite(mu, "admm", iterations)
        if history is not None and iterations % history_every == 0:
            history.append(_objective_columns(w, alphas, tu, u, big_g))
        if stop_level is not None:
            residual = np.sqrt(w * np.einsum("ij,ij->j", d, d))
            if np.all(residual <= stop_level):
                break
    return u, v, mu, tu, iterations, history


def _iterate_adlpmm(op, g, alphas, rho, beta, max_iter, history_every=None, stop_tol=None):
    """Splitting loop with linearized proximal primal updates."""
    n = g.size
    m = alphas.size
    w = op.codomain_grid.weight
    big_g = np.broadcast_to(g[:, None], (n, m))
    factor = 1.0 / (1.0 + 2.0 * alphas[None, :] / beta)
    u = np.zeros((n, m))
    v = np.zeros((n, m))
    mu = np.zeros((n, m))
    tu = np.zeros((n, m))

    stop_level = None if stop_tol is None else stop_tol * (1.0 + np.sqrt(w * np.dot(g, g)))
    history = [] if history_every else None
    iterations = 0
    for k in range(max_iter):
        u = factor * (u - (rho / beta) * op.apply_adjoint(tu - v - big_g + mu / rho))
        tu = op.apply(u)
        v = soft_threshold(mu / rho + tu - big_g, 1.0 / rho)
        d = tu - v - big_g
        mu = mu + rho * d
        iterations = k + 1
        _check_finite(mu, "adlpmm", iterations)
        if history is not None and iterations % history_every == 0:
            history.append(_objective_columns(w, alphas, tu, u, big_g))
        if stop_level is not None:
            residual = np.sqrt(w * np.einsum("ij,ij->j", d, d))
            if np.all(residual <= stop_level):
                break
    return u, v, mu, tu, iterations, history


def _solve_l2_columns(op, g, alphas, inner_tol):
    """Normal-equation solves ``(T*T + alpha I) u = T*g``, one alpha per column."""
    n = g.size
    m = alphas.size
    arow = alphas[None, :]

    def normal_op(x):
        return op.apply_adjoint(op.apply(x)) + arow * x

    rhs = np.broadcast_to(op.apply_adjoint(g)[:, None], (n, m))
    return _cg_columns(normal_op, rhs, tol=inner_tol, max_iter=2 * n)


def _check_shapes(op: DiscretizedOperator, g_obs: np.ndarray) -> np.ndarray:
    g = np.asarray(g_obs, dtype=float)
    if g.shape != (op.codomain_grid.n,):
        raise ValueError(
            f"g_obs has shape {g.shape}, expected ({op.codomain_grid.n},) for this operator"
        )
    return g


def admm_solve(op: DiscretizedOperator, g_obs: np.ndarray, cfg: SolverConfig) -> SolveResult:
    """Minimize ``||Tu - g||_L1 + alpha ||u||_L2^2`` by operator splitting.

    Runs exactly ``cfg.max_iter`` iterations of the three-step scheme (primal
    CG solve, soft-threshold split update, dual ascent) from zero initial
    values and returns the final iterates.

    Raises
    ------
    NumericalError
        If an iterate or an inner solve becomes non-finite.
    """
    g = _check_shapes(op, g_obs)
    u, v, mu, tu, iterations, history = _iterate_admm(
        op,
        g,
        np.array([cfg.alpha]),
        cfg.rho_pen,
        cfg.inner_tol,
        cfg.max_iter,
        history_every=100,
        stop_tol=cfg.stop_tol,
    )
    return _pack_l1_result(op, g, cfg.alpha, u, v, mu, tu, iterations, history)


def adlpmm_solve(op: DiscretizedOperator, g_obs: np.ndarray, cfg: SolverConfig) -> SolveResult:
    """Minimize ``||Tu - g||_L1 + alpha ||u||_L2^2`` without inner solves.

    Same splitting as ``admm_solve`` but with the linearized proximal primal
    update, so each iteration costs one forward and one adjoint application.

    Raises
    ------
    ConfigurationError
        If an explicit ``beta`` does not exceed ``rho_pen * lambda_max(T*T)``.
    NumericalError
        If an iterate becomes non-finite.
    """
    g = _check_shapes(op, g_obs)
    beta = resolve_beta(op, cfg)
    u, v, mu, tu, iterations, history = _iterate_adlpmm(
        op,
        g,
        np.array([cfg.alpha]),
        cfg.rho_pen,
        beta,
        cfg.max_iter,
        history_every=100,
        stop_tol=cfg.stop_tol,
    )
    return _pack_l1_result(op, g, cfg.alpha, u, v, mu, tu, iterations, history)


def _pack_l1_result(op, g, alpha, u, v, mu, tu, iterations, history):
    space = WeightedSpace(op.codomain_grid)
    u1, v1, mu1 = u[:, 0], v[:, 0], mu[:, 0]
    return SolveResult(
        u=u1,
        v=v1,
        mu=mu1,
        objective=objective_l1(op, g, alpha, u1),
        primal_residual=space.l2_norm(tu[:, 0] - v1 - g),
        iterations_run=iterations,
        objective_history=None if history is None else [float(h[0]) for h in history],
    )


def l2_tikhonov_solve(
    op: DiscretizedOperator,
    g_obs: np.ndarray,
    alpha: float,
    inner_tol: float = 1e-10,
) -> SolveResult:
    """Least-squares baseline ``||Tu - g||_L2^2 + alpha ||u||_L2^2``.

    Solved through the normal equations by conjugate gradients; the split
    variable and multiplier of the returned result are empty.
    """
    if not alpha > 0.0:
        raise ConfigurationError(f"alpha must be positive, got {alpha!r}")
    g = _check_shapes(op, g_obs)
    cg = _solve_l2_columns(op, g, np.array([alpha]), inner_tol)
    u = cg.solution[:, 0]
    space = WeightedSpace(op.codomain_grid)
    return SolveResult(
        u=u,
        v=np.empty(0),
        mu=np.empty(0),
        objective=objective_l2(op, g, alpha, u),
        primal_residual=space.l2_norm(op.apply(u) - g),
        iterations_run=cg.iterations,
        objective_history=None,
    )
