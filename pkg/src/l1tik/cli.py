"""Command-line front end: single solves, rate studies, moment and exponent tables.

Commands read a single JSON configuration file with the fixed top-level
sections ``problem`` (single-solve instance), ``solver`` (splitting solver
parameters), ``experiment`` (rate-study layout) and ``seed``; unknown keys
anywhere are rejected so a misspelled parameter cannot silently fall back
to a default.  Every run writes a manifest next to its outputs holding the
fully resolved configuration, the package version and the wall-clock
duration; feeding the manifest back in as the configuration reproduces the
outputs byte for byte (the duration aside).

Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures inside a solver.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, NumericalError
from .experiment import (
    METHODS,
    ExperimentConfig,
    RateReport,
    monte_carlo_rate_study,
)
from .linop import assemble_operator, exact_data, green_kernel, make_midpoint_grid, true_solution
from .noise import NoiseModel, gaussian_moment_bounds, moment_samples, sample_noise
from .solvers import SolverConfig, adlpmm_solve, admm_solve, l2_tikhonov_solve
from .theory import SmoothnessParams, consistency_check_a_smoothing, optimal_gaussian_rate, rate_exponents

DAT_FILENAMES = {"l1_admm": "admm.dat", "l1_adlpmm": "adlpmm.dat", "l2": "L2.dat"}

_SCHEMA = {
    "problem": {"n", "sigma", "alpha", "method"},
    "solver": {"rho_pen", "beta", "max_iter", "inner_tol", "stop_tol"},
    "experiment": {"n", "methods", "sigmas", "alpha_grid", "runs", "outliers"},
    "seed": None,
    "version": None,
    "duration_seconds": None,
}
_ALPHA_GRID_KEYS = {"lo", "hi", "count"}
_OUTLIER_KEYS = {"prob", "scale"}


@dataclass(frozen=True)
class RunManifest:
    """Fully resolved configuration of a finished run plus provenance."""

    config: dict
    seed: int
    version: str
    duration_seconds: float

    def to_json(self) -> str:
        payload = dict(self.config)
        payload["seed"] = self.seed
        payload["version"] = self.version
        payload["duration_seconds"] = self.duration_seconds
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigurationError("config must be a JSON object")
    _reject_unknown_keys(config)
    return config


def _reject_unknown_keys(config: dict) -> None:
    for key, value in config.items():
        if key not in _SCHEMA:
            raise ConfigurationError(f"unknown config key {key!r}")
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise ConfigurationError(f"config section {key!r} must be an object")
        for sub in value:
            if sub not in allowed:
                raise ConfigurationError(f"unknown config key {key + '.' + sub!r}")
        if key == "experiment":
            grid_spec = value.get("alpha_grid", {})
            if not isinstance(grid_spec, dict):
                raise ConfigurationError("experiment.alpha_grid must be an object")
            for sub in grid_spec:
                if sub not in _ALPHA_GRID_KEYS:
                    raise ConfigurationError(f"unknown config key 'experiment.alpha_grid.{sub}'")
            outliers = value.get("outliers", {})
            if not isinstance(outliers, dict):
                raise ConfigurationError("experiment.outliers must be an object")
            for sub in outliers:
                if sub not in _OUTLIER_KEYS:
                    raise ConfigurationError(f"unknown config key 'experiment.outliers.{sub}'")


def _build_solver(section: dict, alpha: float, seed: int) -> SolverConfig:
    beta = section.get("beta", "auto")
    if beta == "auto":
        beta = None
    return SolverConfig(
        alpha=alpha,
        rho_pen=float(section.get("rho_pen", 1.0)),
        beta=None if beta is None else float(beta),
        max_iter=int(section.get("max_iter", 10_000)),
        seed=seed,
        inner_tol=float(section.get("inner_tol", 1e-10)),
        stop_tol=None if section.get("stop_tol") is None else float(section["stop_tol"]),
    )


def _solver_section(cfg: SolverConfig) -> dict:
    return {
        "rho_pen": cfg.rho_pen,
        "beta": "auto" if cfg.beta is None else cfg.beta,
        "max_iter": cfg.max_iter,
        "inner_tol": cfg.inner_tol,
        "stop_tol": cfg.stop_tol,
    }


def _resolve_seed(config: dict, override) -> int:
    if override is not None:
        return int(override)
    return int(config.get("seed", 0))


def _write_manifest(path: Path, config: dict, seed: int, started: float) -> None:
    manifest = RunManifest(
        config=config, seed=seed, version=__version__, duration_seconds=time.time() - started
    )
    path.write_text(manifest.to_json())


def cmd_solve(args) -> int:
    started = time.time()
    config = load_config(args.config)
    problem = config.get("problem")
    if not isinstance(problem, dict):
        raise ConfigurationError("config section 'problem' is required for solve")
    for key in ("n", "sigma", "alpha", "method"):
        if key not in problem:
            raise ConfigurationError(f"config key 'problem.{key}' is required for solve")
    n = int(problem["n"])
    sigma = float(problem["sigma"])
    alpha = float(problem["alpha"])
    method = problem["method"]
    if method not in METHODS:
        raise ConfigurationError(f"problem.method must be one of {METHODS}, got {method!r}")
    if sigma < 0.0:
        raise ConfigurationError(f"problem.sigma must be nonnegative, got {sigma!r}")
    seed = _resolve_seed(config, args.seed)
    solver_cfg = _build_solver(config.get("solver", {}), alpha, seed)

    grid = make_midpoint_grid(n)
    op = assemble_operator(grid, green_kernel)
    g_exact = exact_data(grid)
    xi = sample_noise(NoiseModel(sigma), n, seed) if sigma > 0.0 else np.zeros(n)
    g_obs = g_exact + xi

    if method == "l1_admm":
        result = admm_solve(op, g_obs, solver_cfg)
    elif method == "l1_adlpmm":
        result = adlpmm_solve(op, g_obs, solver_cfg)
    else:
        result = l2_tikhonov_solve(op, g_obs, alpha, solver_cfg.inner_tol)

    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# method = {method}",
        f"# objective = {result.objective:.17g}",
        f"# primal_residual = {result.primal_residual:.17g}",
        f"# iterations_run = {result.iterations_run}",
        "x,u",
    ]
    lines += [f"{x:.17g},{u:.17g}" for x, u in zip(grid.points, result.u)]
    output.write_text("\n".join(lines) + "\n")

    resolved = {
        "problem": {"n": n, "sigma": sigma, "alpha": alpha, "method": method},
        "solver": _solver_section(solver_cfg),
    }
    _write_manifest(output.with_name(output.name + ".manifest.json"), resolved, seed, started)
    return 0


def _build_experiment(config: dict, seed: int) -> ExperimentConfig:
    section = config.get("experiment")
    if not isinstance(section, dict):
        raise ConfigurationError("config section 'experiment' is required for rates")
    grid_spec = section.get("alpha_grid", {})
    outliers = section.get("outliers", {})
    solver = _build_solver(config.get("solver", {}), alpha=1.0, seed=seed)
    defaults = ExperimentConfig()
    return ExperimentConfig(
        n=int(section.get("n", defaults.n)),
        methods=tuple(section.get("methods", defaults.methods)),
        sigmas=tuple(float(s) for s in section.get("sigmas", defaults.sigmas)),
        alpha_lo=float(grid_spec.get("lo", defaults.alpha_lo)),
        alpha_hi=float(grid_spec.get("hi", defaults.alpha_hi)),
        alpha_count=int(grid_spec.get("count", defaults.alpha_count)),
        runs=int(section.get("runs", defaults.runs)),
        solver=solver,
        master_seed=seed,
        outlier_prob=float(outliers.get("prob", 0.0)),
        outlier_scale=float(outliers.get("scale", 1.0)),
    )


def _experiment_section(cfg: ExperimentConfig) -> dict:
    return {
        "n": cfg.n,
        "methods": list(cfg.methods),
        "sigmas": list(cfg.sigmas),
        "alpha_grid": {"lo": cfg.alpha_lo, "hi": cfg.alpha_hi, "count": cfg.alpha_count},
        "runs": cfg.runs,
        "outliers": {"prob": cfg.outlier_prob, "scale": cfg.outlier_scale},
    }


def _write_rate_outputs(report: RateReport, out_dir: Path) -> None:
    for method in {cell.method for cell in report.cells}:
        rows = sorted(
            (cell.sigma, cell.rmse)
            for cell in report.cells
            if cell.method == method and np.isfinite(cell.rmse)
        )
        lines = [f"{sigma:.6e} {rmse:.6e}" for sigma, rmse in rows]
        (out_dir / DAT_FILENAMES[method]).write_text("\n".join(lines) + "\n")

    fit_by_method = {fit.method: fit for fit in report.fits}
    lines = ["method,sigma,alpha_opt,rmse,slope,intercept"]
    for cell in report.cells:
        fit = fit_by_method[cell.method]
        slope = "nan" if fit.slope is None else f"{fit.slope:.10e}"
        intercept = "nan" if fit.intercept is None else f"{fit.intercept:.10e}"
        lines.append(
            f"{cell.method},{cell.sigma:.10e},{cell.alpha_opt:.10e},{cell.rmse:.10e},{slope},{intercept}"
        )
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")


def cmd_rates(args) -> int:
    started = time.time()
    config = load_config(args.config)
    seed = _resolve_seed(config, args.seed)
    cfg = _build_experiment(config, seed)
    report = monte_carlo_rate_study(cfg, jobs=args.jobs)

    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_rate_outputs(report, out_dir)
    resolved = {"experiment": _experiment_section(cfg), "solver": _solver_section(cfg.solver)}
    _write_manifest(out_dir / "manifest.json", resolved, seed, started)

    for fit in report.fits:
        slope = "undefined" if fit.slope is None else f"{fit.slope:.4f}"
        print(f"{fit.method}: fitted slope {slope} (reference {report.reference_exponent})")
    return 0


def cmd_moments(args) -> int:
    if args.sigma <= 0.0:
        raise ConfigurationError(f"--sigma must be positive, got {args.sigma!r}")
    if args.lam < 0.0:
        raise ConfigurationError(f"--lambda must be nonnegative, got {args.lam!r}")
    if args.r < 1.0:
        raise ConfigurationError(f"--r must be at least 1, got {args.r!r}")
    if args.n < 1:
        raise ConfigurationError(f"--n must be positive, got {args.n!r}")
    if args.trials < 1:
        raise ConfigurationError(f"--trials must be positive, got {args.trials!r}")

    eps_bound, eta_bound = gaussian_moment_bounds(args.sigma, args.lam, args.r, measure=1.0)
    eps, eta_r = moment_samples(NoiseModel(args.sigma), args.lam, args.r, args.n, args.trials, args.seed)
    rows = [
        ("mean_eps", float(eps.mean()), eps_bound, 3.0 * float(eps.std(ddof=1)) / np.sqrt(args.trials)),
        ("mean_eta_r", float(eta_r.mean()), eta_bound, 3.0 * float(eta_r.std(ddof=1)) / np.sqrt(args.trials)),
    ]
    print(f"{'quantity':<12} {'empirical':>14} {'bound':>14} {'3*stderr':>14} verdict")
    for name, value, bound, slack in rows:
        verdict = "pass" if value <= bound + slack else "FAIL"
        print(f"{name:<12} {value:>14.6e} {bound:>14.6e} {slack:>14.6e} {verdict}")
    return 0


def cmd_exponents(args) -> int:
    params = SmoothnessParams(a=args.a, s=args.s, d=args.d, k=args.k, p=args.p)
    rates = rate_exponents(params)
    benchmark = optimal_gaussian_rate(args.a, args.s, args.d)
    if args.a > args.d / 2.0:
        consistent = str(consistency_check_a_smoothing(args.a, args.s, args.d)).lower()
    else:
        consistent = "n/a (requires a > d/2)"
    print(f"vartheta = {params.vartheta:.12g}")
    print(f"theta = {rates.theta:.12g}")
    print(f"squared_error_rate = {rates.squared_rate:.12g}")
    print(f"norm_rate = {rates.norm_rate:.12g}")
    print(f"benchmark_norm_rate = {benchmark:.12g}")
    print(f"a_smoothing_consistent = {consistent}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1tik",
        description="Absolute-deviation data fitting for discretized linear inverse problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a single simulated instance and write the iterate as CSV")
    solve.add_argument("--config", required=True, help="JSON configuration file")
    solve.add_argument("--output", required=True, help="output CSV path")
    solve.add_argument("--seed", type=int, default=None, help="override the config seed")
    solve.set_defaults(func=cmd_solve)

    rates = sub.add_parser("rates", help="run the Monte Carlo rate study and write plot data")
    rates.add_argument("--config", required=True, help="JSON configuration file")
    rates.add_argument("--output", required=True, help="output directory")
    rates.add_argument("--seed", type=int, default=None, help="override the config seed")
    rates.add_argument("--jobs", type=int, default=1, help="worker processes for replicates")
    rates.set_defaults(func=cmd_rates)

    moments = sub.add_parser("moments", help="compare empirical decomposition moments with their bounds")
    moments.add_argument("--sigma", type=float, required=True)
    moments.add_argument("--lambda", dest="lam", type=float, required=True)
    moments.add_argument("--r", type=float, required=True)
    moments.add_argument("--n", type=int, required=True)
    moments.add_argument("--trials", type=int, required=True)
    moments.add_argument("--seed", type=int, default=0)
    moments.set_defaults(func=cmd_moments)

    exponents = sub.add_parser("exponents", help="print the rate exponents for given smoothness parameters")
    exponents.add_argument("--a", type=float, required=True)
    exponents.add_argument("--s", type=float, required=True)
    exponents.add_argument("--d", type=int, required=True)
    exponents.add_argument("--k", type=float, required=True)
    exponents.add_argument("--p", type=float, required=True)
    exponents.set_defaults(func=cmd_exponents)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
