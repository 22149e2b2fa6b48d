"""Command-line front end.

Subcommands: generate, solve, threshold, simulate, survival.  Every output
file gets a JSON run manifest sidecar with the resolved configuration,
seeds, graph hash and wall-clock time, sufficient to replay the run.

Exit codes: 0 success, 2 input error, 3 non-convergence, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__, graph as graphmod, simulate, solver, temporal, \
    threshold as thresholdmod

EXIT_INPUT = 2
EXIT_NONCONV = 3
EXIT_NUMERICAL = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _write_manifest(out_path, subcommand, config, graph_info, t0):
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "graph": graph_info,
        "artifact_version": __version__,
        "wall_clock_seconds": round(time.time() - t0, 3),
    }
    path = str(out_path) + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _file_hash(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _load_graph(args):
    """Resolve --graph/--regular/--gnp flags into (Graph or None, info)."""
    if getattr(args, "graph", None):
        g = graphmod.load_edge_list(args.graph)
        return g, {"source": args.graph, "sha256": _file_hash(args.graph),
                   "n": g.n, "m": g.m}
    return None, {}


def _parse_range(spec):
    """'LO:HI:STEPS' -> numpy array of beta values."""
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise CliError(f"bad range spec {spec!r}, expected LO:HI:STEPS")
    if steps < 1 or hi < lo:
        raise CliError(f"bad range spec {spec!r}")
    return np.linspace(lo, hi, steps)


def _parse_tgrid(spec):
    """'LO:HI:N:log|lin' -> time grid."""
    try:
        lo, hi, num, kind = spec.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise CliError(f"bad grid spec {spec!r}, expected LO:HI:N:log|lin")
    if kind == "lin":
        return np.linspace(lo, hi, num)
    if kind == "log":
        if lo <= 0:
            raise CliError("log grid needs LO > 0")
        return np.geomspace(lo, hi, num)
    raise CliError(f"grid kind must be log or lin, got {kind!r}")


def _gamma_arg(value):
    if value == "auto":
        return "auto"
    try:
        return float(value)
    except ValueError:
        raise CliError(f"--gamma must be 'auto' or a number, got {value!r}")


def cmd_generate(args):
    t0 = time.time()
    if args.regular:
        n, d = args.regular
        g = graphmod.generate_random_regular(n, d, seed=args.seed)
        config = {"kind": "regular", "n": n, "degree": d, "seed": args.seed}
    else:
        n, p = int(args.gnp[0]), float(args.gnp[1])
        g = graphmod.generate_gnp(n, p, seed=args.seed)
        config = {"kind": "gnp", "n": n, "p": p, "seed": args.seed}
    graphmod.save_edge_list(g, args.out)
    _write_manifest(args.out, "generate", config,
                    {"n": g.n, "m": g.m, "sha256": _file_hash(args.out)}, t0)
    return 0


def _solver_cfg(args):
    return solver.SolverConfig(tol=args.tol)


def cmd_solve(args):
    t0 = time.time()
    g, ginfo = _load_graph(args)
    betas = _parse_range(args.beta_range) if args.beta_range \
        else np.array([args.beta])
    cfg = _solver_cfg(args)
    gamma = _gamma_arg(args.gamma)
    rows = []
    any_failed = False
    for beta in betas:
        try:
            if g is not None:
                res = solver.solve_pair_k(g, float(beta), args.K, gamma, cfg)
                rho = float(np.mean(res.marginals.rho))
                rows.append((beta, rho, res.converged, res.iterations))
                any_failed |= not res.converged
            else:
                res = solver.solve_regular_scalar(args.regular_q, float(beta),
                                                  args.K, gamma, cfg)
                rows.append((beta, res.rho, res.converged, res.iterations))
                any_failed |= not res.converged
        except solver.SolverError as exc:
            raise CliError(str(exc), EXIT_NUMERICAL)
    out = args.out_prefix + ".csv"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("beta,rho_mean,converged,iterations\n")
        for beta, rho, conv, iters in rows:
            fh.write(f"{beta:.10g},{rho:.12g},{str(conv).lower()},{iters}\n")
    config = {"K": args.K, "gamma": args.gamma, "tol": args.tol,
              "damping": cfg.damping, "regular_q": args.regular_q,
              "betas": [float(b) for b in betas]}
    _write_manifest(out, "solve", config, ginfo, t0)
    if any_failed:
        raise CliError("one or more beta points did not converge "
                       f"(partial results in {out})", EXIT_NONCONV)
    return 0


def cmd_threshold(args):
    t0 = time.time()
    g, ginfo = _load_graph(args)
    gamma = _gamma_arg(args.gamma)
    if args.method == "mf":
        if g is None:
            res = thresholdmod.ThresholdResult(
                beta_c=1.0 / (args.regular_q + 1), method="mf")
        else:
            res = thresholdmod.threshold_mf(g)
    elif args.method == "pair":
        if g is None:
            res = thresholdmod.ThresholdResult(
                beta_c=1.0 / args.regular_q, method="pair")
        else:
            res = thresholdmod.threshold_pair(g)
    elif args.method == "k2":
        if g is None:
            res = thresholdmod.threshold_pair_regular_k2(args.regular_q)
        else:
            raise CliError("--method k2 requires --regular-q")
    else:  # bisect
        target = g if g is not None else args.regular_q
        res = thresholdmod.threshold_bisect(
            target, args.K, gamma, solver.SolverConfig(),
            resolution=args.resolution)
    if not res.converged:
        raise CliError("threshold iteration did not converge", EXIT_NONCONV)
    payload = {"beta_c": res.beta_c, "method": res.method,
               "iterations": res.iterations,
               "bracket_width": res.bracket_width, "K": args.K}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        _write_manifest(args.out, "threshold",
                        {"method": args.method, "K": args.K,
                         "resolution": args.resolution,
                         "regular_q": args.regular_q}, ginfo, t0)
    else:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def cmd_simulate(args):
    t0 = time.time()
    g, ginfo = _load_graph(args)
    if g is None:
        raise CliError("simulate requires --graph")
    means = []
    rows = None
    sub_any = False
    for r in range(args.replicas):
        cfg = simulate.SimConfig(beta=args.beta, t_max=args.t_max,
                                 burn_in=args.burn_in,
                                 seed=args.seed + r, K=args.K,
                                 gamma=args.gamma_value)
        traj = simulate.gillespie_sisk_run(g, cfg)
        means.append((traj.qs_mean, traj.qs_stderr))
        sub_any |= traj.subcritical
        if rows is None:
            rows = [traj.times, traj.infected / g.n]
        else:
            rows.append(traj.infected / g.n)
    out = args.out_prefix + ".csv"
    with open(out, "w", encoding="utf-8") as fh:
        header = ",".join(["t"] + [f"rho_rep{r}" for r in
                                   range(args.replicas)])
        fh.write(header + "\n")
        for i in range(len(rows[0])):
            fh.write(",".join(f"{col[i]:.10g}" for col in rows) + "\n")
    qs_mean = float(np.mean([m for m, _ in means]))
    qs_stderr = float(np.sqrt(np.sum([s**2 for _, s in means])) /
                      len(means))
    qs_path = args.out_prefix + ".qs.json"
    with open(qs_path, "w", encoding="utf-8") as fh:
        json.dump({"qs_mean": qs_mean, "qs_stderr": qs_stderr,
                   "subcritical": sub_any,
                   "replicas": args.replicas}, fh, indent=2)
    config = {"beta": args.beta, "t_max": args.t_max,
              "burn_in": args.burn_in, "seed": args.seed,
              "replicas": args.replicas, "K": args.K,
              "gamma": args.gamma_value}
    _write_manifest(out, "simulate", config, ginfo, t0)
    return 0


def cmd_survival(args):
    t0 = time.time()
    g, ginfo = _load_graph(args)
    t_grid = _parse_tgrid(args.t_grid)
    gamma = _gamma_arg(args.gamma)
    cfg = solver.SolverConfig()
    if g is None:
        q = args.regular_q
        res = solver.solve_regular_scalar(q, args.beta, args.K, gamma, cfg)
        gval = solver.resolve_gamma(args.beta, args.K, gamma, float(q))
        rates = temporal.OneNodeRates(lam=(q + 1.0) * res.phi, gamma=gval)
        surv = temporal.survival_function(rates, t_grid)
    else:
        pres = solver.solve_pair_k(g, args.beta, args.K, gamma, cfg)
        per_node = [temporal.one_node_rates(g, pres.messages, i)
                    for i in range(g.n)]
        surv = temporal.population_survival(per_node, t_grid)
    cols = [("t", t_grid), ("survival", surv)]
    if args.simulate:
        if g is None:
            raise CliError("--simulate needs --graph (finite instance)")
        sim_cfg = simulate.SimConfig(beta=args.beta, t_max=args.sim_t_max,
                                     seed=args.seed, K=1)
        samples, rec, cens = simulate.inter_infection_samples(g, sim_cfg)
        cols.append(("empirical", simulate.empirical_survival_window(
            samples, rec, cens, sim_cfg.t_max, t_grid)))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(",".join(name for name, _ in cols) + "\n")
        for i in range(len(t_grid)):
            fh.write(",".join(f"{col[i]:.10g}" for _, col in cols) + "\n")
    config = {"beta": args.beta, "K": args.K, "gamma": args.gamma,
              "t_grid": args.t_grid, "regular_q": args.regular_q,
              "simulate": args.simulate}
    _write_manifest(args.out, "survival", config, ginfo, t0)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sispair",
        description="Pair-approximation solvers and simulation for the "
                    "SIS model on networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random graph edge list")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--regular", nargs=2, type=int, metavar=("N", "D"))
    src.add_argument("--gnp", nargs=2, metavar=("N", "P"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="steady-state infected fraction curve")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--regular-q", type=int, dest="regular_q")
    bsrc = p.add_mutually_exclusive_group(required=True)
    bsrc.add_argument("--beta", type=float)
    bsrc.add_argument("--beta-range", dest="beta_range",
                      metavar="LO:HI:STEPS")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--gamma", default="auto")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out-prefix", dest="out_prefix", default="solve")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("threshold", help="epidemic threshold estimate")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--regular-q", type=int, dest="regular_q")
    p.add_argument("--method", choices=["mf", "pair", "k2", "bisect"],
                   required=True)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--gamma", default="auto")
    p.add_argument("--resolution", type=float, default=1e-4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("simulate", help="Gillespie simulation")
    p.add_argument("--graph", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--t-max", dest="t_max", type=float, default=1000.0)
    p.add_argument("--burn-in", dest="burn_in", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--gamma", dest="gamma_value", type=float, default=0.0)
    p.add_argument("--out-prefix", dest="out_prefix", default="simulate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("survival", help="inter-infection survival curve")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--regular-q", type=int, dest="regular_q")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--gamma", default="auto")
    p.add_argument("--t-grid", dest="t_grid", default="0:20:100:lin")
    p.add_argument("--simulate", action="store_true",
                   help="overlay an empirical survival column")
    p.add_argument("--sim-t-max", dest="sim_t_max", type=float,
                   default=1000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="survival.csv")
    p.set_defaults(func=cmd_survival)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (graphmod.GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
