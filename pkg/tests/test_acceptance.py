"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The rate-study and
robustness criteria run the desk-scale Monte Carlo study and take several
minutes; everything else is seconds.
"""

import math
import time

import numpy as np
import pytest

from l1tik import (
    ExperimentConfig,
    HolderIndexFunction,
    SolverConfig,
    WeightedSpace,
    adlpmm_solve,
    admm_solve,
    assemble_operator,
    decompose,
    effective_noise_level,
    exact_data,
    gaussian,
    gaussian_moment_bounds,
    green_kernel,
    identity_operator,
    make_midpoint_grid,
    monte_carlo_rate_study,
    phi_app_holder,
    power_iteration,
    sample_noise,
    true_solution,
)
from l1tik import SmoothnessParams, consistency_check_a_smoothing, rate_exponents
from l1tik.cli import main

JOBS = 2  # worker processes for the study criteria; output is order-independent

# Master seed for criterion 4.  Seed 0 is a neutral, unmined choice: the
# slope window holds for every seed tested, while the pairwise-1.5 clause
# holds for only ~1 in 30 master seeds (see the assertion message below for
# the measured systematics), so mining for one of those would misrepresent
# the artifact's typical behavior.
CRITERION4_SEED = 0

PAIRWISE_CONTEXT = (
    "The systematic L1/L2 optimal-RMSE ratio under this protocol is 1.36-1.51 "
    "across the six noise levels (the L1 oracle alpha is capped by the grid top "
    "1e-2, and L1 fitting pays the median-vs-mean efficiency factor ~1.25 under "
    "Gaussian noise); with the prescribed per-method independent noise streams "
    "the realized max-pairwise ratio at M=20 lands in 1.33-1.89, so the 1.5 "
    "bound holds only for rare master seeds (1 of 28 swept)."
)


def report(number, description, elapsed, budget):
    print(f"\nPASS criterion {number}: {description} ({elapsed:.1f}s < {budget:.0f}s budget)")


class TestCriterion1ClippingOracle:
    def test_identity_solvers_match_clipping_formula(self):
        started = time.monotonic()
        grid = make_midpoint_grid(50)
        op = identity_operator(grid)
        for seed in range(20):
            rng = np.random.default_rng((101, seed))
            g = 2.0 * rng.standard_normal(50)
            alpha = 10.0 ** rng.uniform(-1.0, 1.0)
            expected = np.clip(g, -1.0 / (2.0 * alpha), 1.0 / (2.0 * alpha))
            admm = admm_solve(op, g, SolverConfig(alpha=alpha, max_iter=2000))
            adlpmm = adlpmm_solve(op, g, SolverConfig(alpha=alpha, max_iter=5000))
            np.testing.assert_allclose(admm.u, expected, atol=1e-5)
            np.testing.assert_allclose(adlpmm.u, expected, atol=1e-5)
        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        report(1, "both solvers match the clipping oracle on 20 random instances", elapsed, 10)


class TestCriterion2SolverAgreement:
    def test_admm_and_adlpmm_agree_on_test_problem(self):
        started = time.monotonic()
        grid = make_midpoint_grid(257)
        op = assemble_operator(grid, green_kernel)
        g_exact = exact_data(grid)
        space = WeightedSpace(grid)
        alpha = 1e-5
        # rho/K per method: the minimizer is rho-independent; these settings
        # bring each solver well past the agreement tolerances (see ledger).
        admm_cfg = SolverConfig(alpha=alpha, rho_pen=100.0, max_iter=10_000)
        adlpmm_cfg = SolverConfig(alpha=alpha, rho_pen=10.0, max_iter=100_000)
        for i in range(5):
            g_obs = g_exact + sample_noise(gaussian(1e-3), 257, (11, i))
            a = admm_solve(op, g_obs, admm_cfg)
            b = adlpmm_solve(op, g_obs, adlpmm_cfg)
            assert b.objective == pytest.approx(a.objective, rel=1e-6)
            assert space.l2_norm(a.u - b.u) <= 1e-3
        elapsed = time.monotonic() - started
        assert elapsed < 120.0
        report(2, "ADMM and AD-LPMM agree (objective 1e-6 rel, iterates 1e-3)", elapsed, 120)


class TestCriterion3Spectral:
    def test_power_iteration_spectral_values(self):
        started = time.monotonic()
        op257 = assemble_operator(make_midpoint_grid(257), green_kernel)
        estimate = power_iteration(
            lambda x: op257.apply_adjoint(op257.apply(x)), dim=257, iters=100, seed=0
        )
        target = (1.0 / np.pi**2) ** 2
        assert abs(estimate - target) / target <= 1e-4
        op2 = assemble_operator(make_midpoint_grid(2), green_kernel)
        estimate2 = power_iteration(
            lambda x: op2.apply_adjoint(op2.apply(x)), dim=2, iters=100, seed=0
        )
        assert abs(estimate2 - 1.0 / 64.0) <= 1e-12
        elapsed = time.monotonic() - started
        assert elapsed < 1.0
        report(3, "spectral estimates match (1/pi^2)^2 at n=257 and 1/64 at n=2", elapsed, 1)


class TestCriterion4RateReproduction:
    def test_desk_scale_rate_study(self):
        started = time.monotonic()
        cfg = ExperimentConfig(
            n=129,
            runs=20,
            solver=SolverConfig(alpha=1.0, rho_pen=10.0, max_iter=5000),
            master_seed=CRITERION4_SEED,
        )
        assert cfg.alpha_lo == 1e-8 and cfg.alpha_hi == 1e-2 and cfg.alpha_count == 25
        assert len(cfg.sigmas) == 6
        np.testing.assert_allclose(cfg.sigmas, np.logspace(-4, -2, 6), rtol=1e-12)
        report_obj = monte_carlo_rate_study(cfg, jobs=JOBS)

        slopes = {fit.method: fit.slope for fit in report_obj.fits}
        for method in ("l1_admm", "l1_adlpmm", "l2"):
            assert 0.28 <= slopes[method] <= 0.47, f"{method} slope {slopes[method]}"

        by_sigma = {}
        for cell in report_obj.cells:
            by_sigma.setdefault(cell.sigma, []).append(cell.rmse)
        worst = 0.0
        for sigma, rmses in by_sigma.items():
            assert len(rmses) == 3
            ratio = max(rmses) / min(rmses)
            worst = max(worst, ratio)
            assert ratio <= 1.5, f"pairwise ratio {ratio:.3f} at sigma {sigma:.2e}"

        elapsed = time.monotonic() - started
        assert elapsed <= 900.0
        detail = ", ".join(f"{m}={s:.3f}" for m, s in slopes.items())
        report(
            4,
            f"desk-scale slopes in [0.28, 0.47] ({detail}), worst pairwise ratio {worst:.3f}",
            elapsed,
            900,
        )


class TestCriterion5MomentBounds:
    def test_empirical_moments_respect_bounds(self):
        started = time.monotonic()
        n, trials = 100, 10_000
        grid = make_midpoint_grid(n)
        for sigma in (0.1, 1.0):
            for ratio in (0.5, 1.0, 2.0, 3.0):
                lam = ratio * sigma
                # one set of draws per (sigma, lambda); eta^r derived per r
                eps = np.empty(trials)
                eta = np.empty(trials)
                for i in range(trials):
                    xi = sample_noise(gaussian(sigma), n, (505, i))
                    part = decompose(xi, lam, grid)
                    eps[i] = part.epsilon
                    eta[i] = part.eta
                for r in (1.0, 2.0, 4.0):
                    eps_bound, eta_bound = gaussian_moment_bounds(sigma, lam, r, measure=1.0)
                    eta_r = eta**r
                    eps_slack = 3.0 * eps.std(ddof=1) / math.sqrt(trials)
                    eta_slack = 3.0 * eta_r.std(ddof=1) / math.sqrt(trials)
                    assert eps.mean() <= eps_bound + eps_slack
                    assert eta_r.mean() <= eta_bound + eta_slack
        elapsed = time.monotonic() - started
        assert elapsed < 30.0
        report(5, "empirical moments respect the closed-form bounds (24 cells)", elapsed, 30)


class TestCriterion6ExponentAlgebra:
    def test_exponent_calculators(self, capsys):
        started = time.monotonic()
        assert main(["exponents", "--a", "2", "--s", "1.5", "--d", "1", "--k", "2", "--p", "2"]) == 0
        out = capsys.readouterr().out
        printed = {
            line.split(" = ")[0]: line.split(" = ")[1] for line in out.strip().splitlines()
        }
        assert abs(float(printed["norm_rate"]) - 0.375) <= 1e-12
        assert printed["a_smoothing_consistent"] == "true"

        rng = np.random.default_rng(606)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            a = rng.uniform(d / 2.0 + 0.05, 5.0)
            s = rng.uniform(0.05, 0.95) * a
            assert consistency_check_a_smoothing(a, s, d) is True
            theta = rate_exponents(SmoothnessParams(a=a, s=s, d=d, k=a, p=2.0)).theta
            assert theta > s / a
        elapsed = time.monotonic() - started
        assert elapsed < 1.0
        report(6, "norm rate 3/8 exact, order-optimality and improvement hold", elapsed, 1)


class TestCriterion7Robustness:
    def test_l1_beats_l2_under_outliers(self):
        started = time.monotonic()
        cfg = ExperimentConfig(
            n=129,
            methods=("l1_admm", "l2"),
            sigmas=(1e-3,),
            runs=20,
            solver=SolverConfig(alpha=1.0, rho_pen=10.0, max_iter=5000),
            master_seed=707,
            outlier_prob=0.05,
            outlier_scale=1.0,
        )
        report_obj = monte_carlo_rate_study(cfg, jobs=JOBS)
        rmse = {cell.method: cell.rmse for cell in report_obj.cells}
        assert rmse["l1_admm"] < rmse["l2"]
        elapsed = time.monotonic() - started
        assert elapsed < 600.0
        report(
            7,
            f"optimal RMSE under 5% outliers: L1 {rmse['l1_admm']:.4f} < L2 {rmse['l2']:.4f}",
            elapsed,
            600,
        )


class TestCriterion8Diagnostics:
    def test_phi_app_and_effective_noise_level(self):
        started = time.monotonic()
        # 27-point (c, kappa, alpha) grid against an independent grid search
        for c in (0.5, 1.0, 2.0):
            for kappa in (0.25, 0.5, 0.75):
                for alpha in (0.1, 1.0, 10.0):
                    phi = HolderIndexFunction(c=c, kappa=kappa)
                    closed = phi_app_holder(phi, alpha)
                    lo, hi = 1e-12, 1e6
                    for _ in range(4):
                        t = np.logspace(np.log10(lo), np.log10(hi), 20_000)
                        values = phi(t) - t / alpha
                        j = int(np.argmax(values))
                        lo, hi = t[max(j - 1, 0)], t[min(j + 1, t.size - 1)]
                        numeric = float(values[j])
                    assert closed == pytest.approx(numeric, rel=1e-6)

        grid = make_midpoint_grid(64)
        op = assemble_operator(grid, green_kernel)
        u_true = true_solution(grid)
        g_exact = op.apply(u_true)
        space = WeightedSpace(grid)
        rng = np.random.default_rng(808)
        g_obs0 = g_exact + 0.01 * rng.standard_normal(64)
        assert effective_noise_level(op, g_exact, g_obs0, u_true, u_true) == 0.0
        for _ in range(100):
            u = rng.standard_normal(64)
            xi = 0.05 * rng.standard_normal(64)
            err = effective_noise_level(op, g_exact, g_exact + xi, u, u_true)
            assert abs(err) <= 2.0 * space.l1_norm(xi) + 1e-14
        elapsed = time.monotonic() - started
        assert elapsed < 5.0
        report(8, "phi_app matches grid search; err diagnostics hold", elapsed, 5)
