"""Noise models, the threshold decomposition, and moment-bound checks.

A noise vector is split at a threshold into a corrupted index set (entries
exceeding the threshold in absolute value) and an intact remainder.  The
weighted L1 mass of the intact part and the measure of the corrupted set
are the two scalars that quantify how impulsive the vector is; for centered
i.i.d. noise their expectations admit closed-form bounds through the
distribution function, which ``gaussian_moment_bounds`` evaluates in the
Gaussian case and ``empirical_moments`` estimates by Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .linop import Grid, make_midpoint_grid


@dataclass(frozen=True)
class NoiseModel:
    """Centered i.i.d. noise: Gaussian, optionally with symmetric outliers.

    Each component is N(0, sigma^2); with probability ``outlier_prob`` a
    component additionally receives ``+outlier_scale`` or ``-outlier_scale``
    with equal probability.  The additive symmetric construction keeps the
    noise centered.  ``outlier_prob = 0`` reduces exactly to the plain
    Gaussian model, including the sampled values for a given seed.
    """

    sigma: float
    outlier_prob: float = 0.0
    outlier_scale: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if not 0.0 <= self.outlier_prob <= 1.0:
            raise ValueError(f"outlier_prob must lie in [0, 1], got {self.outlier_prob!r}")
        if not self.outlier_scale > 0.0:
            raise ValueError(f"outlier_scale must be positive, got {self.outlier_scale!r}")


def gaussian(sigma: float) -> NoiseModel:
    """Plain centered Gaussian noise with standard deviation ``sigma``."""
    return NoiseModel(sigma=sigma)


def gaussian_with_outliers(sigma: float, outlier_prob: float, outlier_scale: float) -> NoiseModel:
    """Gaussian noise plus Bernoulli-selected symmetric outliers."""
    return NoiseModel(sigma=sigma, outlier_prob=outlier_prob, outlier_scale=outlier_scale)


def sample_noise(model: NoiseModel, n: int, rng_seed) -> np.ndarray:
    """Draw one noise vector of length ``n``, deterministic given the seed.

    ``rng_seed`` may be an integer or a tuple of integers; tuples derive
    independent streams, e.g. ``(master_seed, replicate_index)``.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    rng = np.random.default_rng(rng_seed)
    xi = model.sigma * rng.standard_normal(n)
    if model.outlier_prob > 0.0:
        hit = rng.random(n) < model.outlier_prob
        signs = 2.0 * rng.integers(0, 2, size=n) - 1.0
        xi = xi + hit * signs * model.outlier_scale
    return xi


@dataclass(frozen=True)
class ImpulsiveDecomposition:
    """Split of a noise vector at a threshold.

    ``corrupted`` holds the indices whose magnitude exceeds the threshold;
    ``epsilon`` is the weighted L1 mass of the remaining (intact) entries
    and ``eta`` the measure of the corrupted set, i.e. ``weight`` times its
    cardinality.
    """

    threshold: float
    corrupted: np.ndarray
    epsilon: float
    eta: float


def decompose(xi: np.ndarray, lam: float, grid: Grid) -> ImpulsiveDecomposition:
    """Decompose ``xi`` at threshold ``lam`` using the grid's weight."""
    if lam < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {lam!r}")
    xi = np.asarray(xi, dtype=float)
    magnitude = np.abs(xi)
    corrupted = np.flatnonzero(magnitude > lam)
    intact_mass = magnitude.sum() - magnitude[corrupted].sum()
    return ImpulsiveDecomposition(
        threshold=lam,
        corrupted=corrupted,
        epsilon=grid.weight * float(intact_mass),
        eta=grid.weight * corrupted.size,
    )


def gaussian_moment_bounds(sigma: float, lam: float, r: float, measure: float) -> tuple[float, float]:
    """Closed-form bounds on the expected decomposition of Gaussian noise.

    For N(0, sigma^2) components split at ``lam``, with Phi the standard
    normal cdf:

        E[epsilon] <= sigma * sqrt(1 - 2 Phi(-lam/sigma)),
        E[eta^r]   <= 2 * measure^r * Phi(-lam/sigma)        for r >= 1.
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if lam < 0.0:
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    if r < 1.0:
        raise ValueError(f"r must be at least 1, got {r!r}")
    if not measure > 0.0:
        raise ValueError(f"measure must be positive, got {measure!r}")
    tail = float(stats.norm.cdf(-lam / sigma))
    eps_bound = sigma * float(np.sqrt(max(1.0 - 2.0 * tail, 0.0)))
    eta_bound = 2.0 * measure**r * tail
    return eps_bound, eta_bound


def moment_samples(
    model: NoiseModel, lam: float, r: float, n: int, trials: int, seed
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial decomposition statistics over independent noise draws.

    Returns the arrays of epsilon values and of eta^r values, one entry per
    trial; trial ``i`` uses the stream derived from ``(seed, i)``.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials!r}")
    grid = make_midpoint_grid(n)
    eps = np.empty(trials)
    eta_r = np.empty(trials)
    for i in range(trials):
        xi = sample_noise(model, n, (seed, i))
        part = decompose(xi, lam, grid)
        eps[i] = part.epsilon
        eta_r[i] = part.eta**r
    return eps, eta_r


def empirical_moments(
    model: NoiseModel, lam: float, r: float, n: int, trials: int, seed
) -> tuple[float, float]:
    """Monte Carlo means of epsilon and eta^r, deterministic given the seed."""
    eps, eta_r = moment_samples(model, lam, r, n, trials, seed)
    return float(eps.mean()), float(eta_r.mean())
