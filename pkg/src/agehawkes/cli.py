"""Command-line front end for the closed forms, the simulator, and the PDE.

Commands: steady, sensitivity, alpha-m, simulate, pde, fig1, fig2, check.
Numeric flags accept either a scalar or a sweep grid ``start:stop:count``
(append ``:log`` for logarithmic spacing).  Every run writes a CSV with a
``# key=value`` provenance header plus a ``<name>.meta.json`` sidecar; data
files are byte-identical across reruns with the same flags and seed.

Exit codes: 0 success, 2 usage error, 3 engine error, 4 acceptance check
failure (``check`` command).
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analytics
from .analytics import ModelParams
from .errors import AgeHawkesError, DivergentError, NotConvergedError
from .output import fmt_value, write_meta, write_table
from .pde import PdeGrid, solve_to_stationarity
from .simulation import (
    BernoulliWeights,
    DiracWeights,
    ExponentialKernel,
    NetworkConfig,
    StopRule,
    Window,
    build_network,
    estimate_activity,
    simulate,
)

USAGE_ERROR = 2
ENGINE_ERROR = 3
CHECK_FAILURE = 4

FIG1_ALPHAS = tuple(k / 3.0 for k in range(7))
FIG1_MU_GRID = "0.01:100:13:log"
FIG2_BETAS = (0.0, 0.01, 0.2, 0.5, 0.6)
FIG2_ALPHA_GRID = "0:2:201"


def parse_grid(text: str) -> list[float]:
    """Parse a scalar or a ``start:stop:count[:log]`` sweep."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise argparse.ArgumentTypeError(
            f"expected SCALAR or START:STOP:COUNT[:log], got {text!r}"
        )
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise argparse.ArgumentTypeError(f"grid count must be >= 1 in {text!r}")
    if count == 1:
        return [start]
    if len(parts) == 4:
        if start <= 0 or stop <= 0:
            raise argparse.ArgumentTypeError(f"log grid needs positive bounds: {text!r}")
        return list(np.geomspace(start, stop, count))
    return list(np.linspace(start, stop, count))


def _weight_law(name: str, alpha: float):
    if name == "dirac":
        return DiracWeights(alpha)
    if name == "bernoulli":
        return BernoulliWeights(alpha)
    raise argparse.ArgumentTypeError(f"unknown weight law {name!r}")


def _micro_burn_in(mu: float, alpha: float, delta: float, tau: float) -> float:
    """Equilibration window for stationary-start runs: ~10 microscopic scales."""
    a_inf = analytics.steady_activity(ModelParams(mu=mu, alpha=alpha, delta=delta))
    drive = mu + alpha * a_inf
    return 10.0 * max(tau, delta, 1.0 / drive if drive > 0 else 0.0)


def stationary_rate_run(
    n: int,
    mu: float,
    alpha: float,
    delta: float,
    tau: float,
    seed: int,
    spikes: int,
    weight_law: str = "dirac",
):
    """One stationary-start simulation; returns (rate, stderr, record meta).

    Starts from the stationary ensemble, discards a short equilibration
    window, then collects exactly ``spikes`` spikes for the estimate.
    """
    burn = _micro_burn_in(mu, alpha, delta, tau)
    config = NetworkConfig(
        n=n, mu=mu, delta=delta,
        weight_law=_weight_law(weight_law, alpha),
        kernel=ExponentialKernel(tau), seed=seed,
    )
    record = simulate(
        build_network(config),
        StopRule(max_spikes=spikes),
        burn_in=burn,
        init="stationary",
    )
    est = estimate_activity(record, n, Window(burn, float(record.times[-1])))
    return est.rate, est.stderr, record.meta


def _fig1_point(args: tuple) -> dict:
    mu, alpha, delta, n, spikes, tau, seed = args
    a_analytic = analytics.steady_activity(ModelParams(mu=mu, alpha=alpha, delta=delta))
    rate, stderr, _ = stationary_rate_run(n, mu, alpha, delta, tau, seed, spikes)
    return {
        "mu": mu,
        "alpha": alpha,
        "a_inf_analytic": a_analytic,
        "a_inf_sim": rate,
        "sim_se": stderr,
    }


def _map_jobs(func, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def cmd_steady(args) -> int:
    rows = []
    for mu in args.mu:
        for alpha in args.alpha:
            for delta in args.delta:
                a = analytics.steady_activity(ModelParams(mu=mu, alpha=alpha, delta=delta))
                rows.append((mu, alpha, delta, a))
    cols = {k: [r[i] for r in rows] for i, k in enumerate(("mu", "alpha", "delta", "a_inf"))}
    comments = [f"command=steady", f"points={len(rows)}"]
    write_table(f"{args.out}.csv", cols, comments)
    write_meta(f"{args.out}.meta.json", {
        "command": "steady",
        "mu": args.mu, "alpha": args.alpha, "delta": args.delta,
        "rows": len(rows),
    })
    return 0


def cmd_sensitivity(args) -> int:
    if args.beta is not None:
        betas = args.beta
    else:
        betas = [mu * delta for mu in args.mu for delta in args.delta]
    rows = []
    for beta in betas:
        for alpha in args.alpha:
            rows.append((alpha, beta, analytics.sensitivity_ab(alpha, beta)))
    cols = {k: [r[i] for r in rows] for i, k in enumerate(("alpha", "beta", "sigma"))}
    write_table(f"{args.out}.csv", cols, ["command=sensitivity"])
    write_meta(f"{args.out}.meta.json", {
        "command": "sensitivity", "alpha": args.alpha, "beta": betas, "rows": len(rows),
    })
    return 0


def _alpha_m_row(beta: float) -> tuple[float, float, float]:
    am = analytics.alpha_m(beta)
    residual = analytics.sensitivity_derivative(am, beta)
    return beta, am, residual


def _alpha_m_marker(beta: float) -> tuple[float, float]:
    """Marker for figure annotation; nan at the beta=0 pole."""
    try:
        _, am, residual = _alpha_m_row(beta)
    except DivergentError:
        return math.nan, math.nan
    return am, residual


def cmd_alpha_m(args) -> int:
    rows = [_alpha_m_row(beta) for beta in args.beta]
    cols = {k: [r[i] for r in rows] for i, k in enumerate(("beta", "alpha_m", "g_residual"))}
    comments = [
        "command=alpha-m",
        "note=g_residual is the sensitivity slope at alpha_m; for boundary"
        " optima (alpha_m=0) it is the slope limit at alpha=0, which is <= 0",
    ]
    write_table(f"{args.out}.csv", cols, comments)
    write_meta(f"{args.out}.meta.json", {
        "command": "alpha-m", "beta": args.beta, "rows": len(rows),
    })
    return 0


def cmd_simulate(args) -> int:
    config = NetworkConfig(
        n=args.n, mu=args.mu, delta=args.delta,
        weight_law=_weight_law(args.weight_law, args.alpha),
        kernel=ExponentialKernel(args.kernel_tau), seed=args.seed,
    )
    stop = StopRule(max_spikes=args.spikes, max_time=args.max_time)
    record = simulate(build_network(config), stop, burn_in=args.burn_in, init=args.init)
    record.to_csv(f"{args.out}.csv")
    estimates = None
    if len(record) and record.times[-1] > args.burn_in:
        est = estimate_activity(
            record, args.n, Window(args.burn_in, float(record.times[-1]))
        )
        estimates = {
            "scheme": f"window({fmt_value(est.t0)},{fmt_value(est.t1)}]",
            "rate": est.rate,
            "stderr": est.stderr,
            "n_spikes": est.n_spikes,
        }
    write_meta(f"{args.out}.meta.json", {
        "command": "simulate",
        "record": record.meta,
        "estimates": estimates,
    })
    return 0


def cmd_pde(args) -> int:
    params = ModelParams(mu=args.mu, alpha=args.alpha, delta=args.delta)
    if args.s_max is not None:
        grid = PdeGrid(ds=args.ds, s_max=args.s_max)
    else:
        grid = PdeGrid.for_params(params, args.ds)
    kernel = ExponentialKernel(args.kernel_tau)
    result = solve_to_stationarity(
        params, grid, kernel, tol=args.tol, max_t=args.max_time
    )
    t = (np.arange(len(result.a_history)) + 1) * grid.dt
    common = [
        f"command=pde",
        f"mu={fmt_value(args.mu)}", f"alpha={fmt_value(args.alpha)}",
        f"delta={fmt_value(args.delta)}",
        f"snapped_delta={fmt_value(result.snapped_delta)}",
        f"ds={fmt_value(grid.ds)}", f"s_max={fmt_value(grid.s_max)}",
        f"kernel_tau={fmt_value(kernel.tau)}",
        f"converged={result.converged}",
    ]
    write_table(
        f"{args.out}.trajectory.csv",
        {"t": t, "a": result.a_history, "x": result.x_history, "mass": result.mass_history},
        common,
    )
    write_table(
        f"{args.out}.density.csv",
        {"s": grid.cell_centers(), "u": result.state.u},
        common + [f"tail_mass={fmt_value(result.state.tail)}"],
    )
    write_meta(f"{args.out}.meta.json", {
        "command": "pde",
        "params": {"mu": args.mu, "alpha": args.alpha, "delta": args.delta},
        "grid": {"ds": grid.ds, "s_max": grid.s_max, "n_cells": grid.n_cells},
        "kernel_tau": kernel.tau,
        "tol": args.tol,
        "max_t": args.max_time,
        "converged": result.converged,
        "snapped_delta": result.snapped_delta,
        "a_end": result.state.a,
        "l1_distance_to_stationary": result.l1_distance,
        "solver": result.meta,
    })
    if not result.converged:
        raise NotConvergedError(
            f"activity still varying by more than {args.tol} at t={args.max_time}"
            f" (outputs written to {args.out}.*)"
        )
    return 0


def cmd_fig1(args) -> int:
    """Steady-activity sweep: closed form and simulation side by side."""
    delta, tau = args.delta, args.kernel_tau
    points = [
        (mu, alpha, delta, args.n, args.spikes, tau, args.seed ^ idx)
        for idx, (alpha, mu) in enumerate(
            (alpha, mu) for alpha in args.alpha for mu in args.mu
        )
    ]
    rows = _map_jobs(_fig1_point, points, args.jobs)
    cols = {
        key: [row[key] for row in rows]
        for key in ("mu", "alpha", "a_inf_analytic", "a_inf_sim", "sim_se")
    }
    comments = [
        "command=fig1",
        f"delta={fmt_value(delta)}",
        f"n={args.n}", f"spikes={args.spikes}", f"seed={args.seed}",
        f"kernel_tau={fmt_value(tau)}",
        "estimator=stationary-start window after micro burn-in",
    ]
    write_table(f"{args.out}.csv", cols, comments)
    write_meta(f"{args.out}.meta.json", {
        "command": "fig1",
        "delta": delta, "n": args.n, "spikes": args.spikes,
        "seed": args.seed, "kernel_tau": tau,
        "alpha": args.alpha, "mu": args.mu,
        "jobs": args.jobs,
        "estimator": "stationary init, burn-in 10*max(tau, delta, 1/(mu+alpha*a)),"
                     " rate over the post-burn-in window",
    })
    return 0


def cmd_fig2(args) -> int:
    """Sensitivity curves per load value, with the optimal-connectivity markers."""
    betas = args.beta
    alphas = args.alpha
    rows = []
    for beta in betas:
        for alpha in alphas:
            try:
                sigma = analytics.sensitivity_ab(alpha, beta)
            except DivergentError:
                sigma = math.inf  # documented sentinel at the (alpha=1, beta=0) pole
            rows.append((alpha, beta, sigma))
    comments = ["command=fig2", "note=sigma=inf marks the pole at alpha=1 when beta=0"]
    markers = {}
    for beta in betas:
        am, residual = _alpha_m_marker(beta)
        markers[fmt_value(beta)] = am
        comments.append(f"alpha_m[{fmt_value(beta)}]={fmt_value(am)}")
        comments.append(f"g_residual[{fmt_value(beta)}]={fmt_value(residual)}")
    cols = {k: [r[i] for r in rows] for i, k in enumerate(("alpha", "beta", "sigma"))}
    write_table(f"{args.out}.csv", cols, comments)
    write_meta(f"{args.out}.meta.json", {
        "command": "fig2", "beta": betas, "alpha_points": len(alphas),
        "alpha_m": markers,
    })
    return 0


def cmd_check(args) -> int:
    from .acceptance import run_checks

    results = run_checks(only=args.only)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(r.line())
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return CHECK_FAILURE if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agehawkes",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", help="closed-form steady activity over a parameter sweep")
    p.add_argument("--mu", type=parse_grid, default=[2.0])
    p.add_argument("--alpha", type=parse_grid, default=[0.5])
    p.add_argument("--delta", type=parse_grid, default=[0.005])
    p.add_argument("--out", default="steady")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("sensitivity", help="stimulus sensitivity over (alpha, beta)")
    p.add_argument("--alpha", type=parse_grid, default=[0.5])
    p.add_argument("--beta", type=parse_grid, default=None)
    p.add_argument("--mu", type=parse_grid, default=[2.0])
    p.add_argument("--delta", type=parse_grid, default=[0.005])
    p.add_argument("--out", default="sensitivity")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("alpha-m", help="connectivity maximizing the sensitivity")
    p.add_argument("--beta", type=parse_grid, required=True)
    p.add_argument("--out", default="alpha_m")
    p.set_defaults(func=cmd_alpha_m)

    p = sub.add_parser("simulate", help="event-driven network simulation")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.005)
    p.add_argument("--weight-law", choices=("dirac", "bernoulli"), default="dirac")
    p.add_argument("--kernel-tau", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spikes", type=int, default=None, help="stop after this many spikes")
    p.add_argument("--max-time", type=float, default=None)
    p.add_argument("--burn-in", type=float, default=0.0)
    p.add_argument("--init", choices=("cold", "stationary"), default="cold")
    p.add_argument("--out", default="spikes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pde", help="integrate the age-density system to stationarity")
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.005)
    p.add_argument("--ds", type=float, default=1e-4)
    p.add_argument("--s-max", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-time", type=float, default=50.0)
    p.add_argument("--kernel-tau", type=float, default=0.02)
    p.add_argument("--out", default="pde")
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("fig1", help="activity-vs-input preset: closed form + simulation")
    p.add_argument("--mu", type=parse_grid, default=parse_grid(FIG1_MU_GRID))
    p.add_argument("--alpha", type=parse_grid, default=list(FIG1_ALPHAS))
    p.add_argument("--delta", type=float, default=0.005)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--spikes", type=int, default=5000)
    p.add_argument("--kernel-tau", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="fig1")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("fig2", help="sensitivity-vs-connectivity preset")
    p.add_argument("--beta", type=parse_grid, default=list(FIG2_BETAS))
    p.add_argument("--alpha", type=parse_grid, default=parse_grid(FIG2_ALPHA_GRID))
    p.add_argument("--out", default="fig2")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("check", help="run the acceptance criteria")
    p.add_argument("--only", default=None, help="run only criteria whose name contains this")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AgeHawkesError as exc:
        name = type(exc).__name__.removesuffix("Error")
        print(f"{name}: {exc}", file=sys.stderr)
        return ENGINE_ERROR


if __name__ == "__main__":
    sys.exit(main())
