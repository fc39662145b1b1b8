"""Closed-form rate calculators and the effective noise level diagnostic.

The calculators turn smoothness and sampling parameters into convergence
exponents: the combined exponent

    theta = 2 s (2 vt + 1) / ((2 vt + 1)(a - s) + a),    vt = k/d - 1/p,

the expected squared error decay ``sigma^(theta/(theta+1))`` at the best
regularization weight, and the classical benchmark ``sigma^(2s/(2a+2s+d))``
for the norm error.  For operators that are a-times smoothing in both
directions (k = a, p = 2) the two coincide, which
``consistency_check_a_smoothing`` verifies numerically.  Generic constants
of the underlying bounds are not modeled; everything here is exponent
algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numlin import WeightedSpace


@dataclass(frozen=True)
class SmoothnessParams:
    """Smoothing order ``a``, solution smoothness ``s``, data dimension ``d``
    and the Sobolev pair ``(k, p)`` of the forward map's codomain.

    Requires ``0 < s < a`` and ``k > d/p`` so that the derived exponent
    ``vartheta = k/d - 1/p`` is positive.  ``rho_source`` records the source
    radius; it does not enter any exponent.
    """

    a: float
    s: float
    d: int
    k: float
    p: float
    rho_source: float = 1.0

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"a must be positive, got {self.a!r}")
        if not 0.0 < self.s < self.a:
            raise ValueError(f"s must lie in (0, a), got s={self.s!r} with a={self.a!r}")
        if self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if not self.p >= 1.0:
            raise ValueError(f"p must be at least 1, got {self.p!r}")
        if not self.k > self.d / self.p:
            raise ValueError(
                f"k must exceed d/p for a positive vartheta, got k={self.k!r}, d/p={self.d / self.p!r}"
            )
        if not self.rho_source > 0.0:
            raise ValueError(f"rho_source must be positive, got {self.rho_source!r}")

    @property
    def vartheta(self) -> float:
        return self.k / self.d - 1.0 / self.p


class RateExponents(NamedTuple):
    theta: float
    squared_rate: float
    norm_rate: float


def rate_exponents(params: SmoothnessParams) -> RateExponents:
    """Exponents of the optimal-alpha error bounds.

    Returns ``theta``, the squared-error exponent ``theta/(theta+1)`` and
    the norm-error exponent ``theta/(2(theta+1))``.
    """
    vt = params.vartheta
    theta = 2.0 * params.s * (2.0 * vt + 1.0) / ((2.0 * vt + 1.0) * (params.a - params.s) + params.a)
    squared = theta / (theta + 1.0)
    return RateExponents(theta=theta, squared_rate=squared, norm_rate=squared / 2.0)


def optimal_gaussian_rate(a: float, s: float, d: int) -> float:
    """Benchmark norm-error exponent ``2s / (2a + 2s + d)`` for white noise."""
    if not a > 0.0 or not s > 0.0:
        raise ValueError(f"a and s must be positive, got a={a!r}, s={s!r}")
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    return 2.0 * s / (2.0 * a + 2.0 * s + d)


def consistency_check_a_smoothing(a: float, s: float, d: int) -> bool:
    """Whether the derived norm rate matches the benchmark at ``k=a, p=2``.

    For operators smoothing by exactly ``a`` orders the Sobolev pair is
    ``(k, p) = (a, 2)``; the check requires ``a > d/2`` (else that pair is
    inadmissible) and compares the two exponents to 1e-12.
    """
    if not a > d / 2.0:
        raise ValueError(f"requires a > d/2, got a={a!r}, d={d!r}")
    rates = rate_exponents(SmoothnessParams(a=a, s=s, d=d, k=a, p=2.0))
    return abs(rates.norm_rate - optimal_gaussian_rate(a, s, d)) <= 1e-12


@dataclass(frozen=True)
class HolderIndexFunction:
    """Concave power function ``phi(t) = c * t^kappa`` with ``0 < kappa < 1``."""

    c: float
    kappa: float

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa!r}")

    def __call__(self, t):
        return self.c * np.power(t, self.kappa)


def phi_app_holder(phi: HolderIndexFunction, alpha: float) -> float:
    """Regularization-bias transform ``sup_{t >= 0} [phi(t) - t/alpha]``.

    For the power function the supremum is attained at
    ``t* = (c kappa alpha)^(1/(1-kappa))`` and evaluates in closed form to
    ``c (1 - kappa) (c kappa alpha)^(kappa/(1-kappa))``; it is nonnegative,
    increasing in ``alpha`` and vanishes as ``alpha`` tends to zero.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    c, kappa = phi.c, phi.kappa
    return c * (1.0 - kappa) * (c * kappa * alpha) ** (kappa / (1.0 - kappa))


def effective_noise_level(op, g_exact, g_obs, u, u_true) -> float:
    """Gap between the ideal and the computable misfit differences.

    In the weighted L1 norm this is

        ||Tu - g_exact|| - ( ||Tu - g_obs|| - ||T u_true - g_obs|| ),

    with both operator applications on the same grid.  It vanishes at
    ``u = u_true`` when ``g_exact`` is the operator image of ``u_true``, and
    is bounded by twice the L1 norm of the observation error in general.
    """
    space = WeightedSpace(op.codomain_grid)
    tu = op.apply(u)
    ideal = space.l1_norm(tu - g_exact)
    computable = space.l1_norm(tu - g_obs) - space.l1_norm(op.apply(u_true) - g_obs)
    return ideal - computable
