"""Benchmark the accelerated (numba) backend against the pure-numpy path.

Covers the two hot kernels: the per-edge pair-approximation sweep and the
event-driven simulation loop.  The backend is fixed at import time via the
SISPAIR_BACKEND environment variable, so this script re-executes itself in
a subprocess per backend and prints a comparison table.

Usage:  python3 benchmarks/bench_backends.py
"""

import json
import os
import subprocess
import sys
import time


def run_benchmarks():
    import sispair
    from sispair import graph, simulate, solver

    results = {"backend": sispair.BACKEND}

    g = graph.generate_random_regular(2000, 3, seed=1)

    # warm-up (jit compilation on the accelerated path)
    solver.solve_pair_k(g, 0.7, 4, "auto",
                        solver.SolverConfig(max_iter=3))
    t0 = time.perf_counter()
    res = solver.solve_pair_k(g, 0.7, 4, "auto")
    results["pair_sweep_k4_seconds"] = time.perf_counter() - t0
    results["pair_sweep_iterations"] = res.iterations

    cfg = simulate.SimConfig(beta=0.8, t_max=50.0, seed=3)
    simulate.gillespie_run(g, cfg)  # warm-up
    cfg = simulate.SimConfig(beta=0.8, t_max=500.0, seed=3)
    t0 = time.perf_counter()
    traj = simulate.gillespie_run(g, cfg)
    results["gillespie_seconds"] = time.perf_counter() - t0
    results["gillespie_events"] = traj.infection_events

    print(json.dumps(results))


def main():
    rows = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SISPAIR_BACKEND=backend,
                   SISPAIR_BENCH_CHILD="1")
        out = subprocess.run([sys.executable, __file__], env=env,
                             capture_output=True, text=True, check=True)
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    print(f"{'kernel':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for key, label in (("pair_sweep_k4_seconds",
                        "pair sweep (n=2000, K=4)"),
                       ("gillespie_seconds",
                        "gillespie (n=2000, t=500)")):
        np_t = rows[0][key]
        nb_t = rows[1][key]
        print(f"{label:<28}{np_t:>11.3f}s{nb_t:>11.3f}s"
              f"{np_t / nb_t:>9.1f}x")
    same = (rows[0]["pair_sweep_iterations"]
            == rows[1]["pair_sweep_iterations"]
            and rows[0]["gillespie_events"] == rows[1]["gillespie_events"])
    print(f"outputs identical across backends: {same}")


if __name__ == "__main__":
    if os.environ.get("SISPAIR_BENCH_CHILD"):
        run_benchmarks()
    else:
        main()
