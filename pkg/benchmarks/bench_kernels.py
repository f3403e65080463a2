"""Compare the compiled kernels with the pure-numpy fallbacks.

Run ``python benchmarks/bench_kernels.py``.  The script re-executes itself
once per backend (the backend is fixed at import time by
``HEXAIRSPACE_DISABLE_NUMBA``) and prints a side-by-side table.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit


def measure(repeat: int) -> dict:
    import numpy as np

    from hexairspace._jit import NUMBA_ENABLED
    from hexairspace.conflict import repulsion_deviation
    from hexairspace.entropy_metrics import cell_entropies
    from hexairspace.hexgrid import GridSpec
    from hexairspace.router import build_graph, dijkstra
    from hexairspace.scenario import ScenarioConfig, run_scenario

    rng = np.random.default_rng(7)
    grid = GridSpec()
    counts = rng.integers(0, 4, size=(grid.n_cells, 6, 6))
    g = build_graph(grid)
    g = g.with_costs(np.abs(rng.normal(3.0, 1.0, size=(grid.n_cells, 6, 6))) + 1e-3)
    pairs = rng.integers(0, g.n_nodes, size=(20, 2))

    n = 60
    xs, ys = rng.uniform(0, 30, n), rng.uniform(0, 27, n)
    hs = rng.uniform(-np.pi, np.pi, n)
    vx, vy = 0.07 * np.sin(hs), 0.07 * np.cos(hs)
    active = np.ones(n, dtype=np.bool_)

    def route():
        for s, t in pairs:
            dijkstra(g.indptr, g.indices, g.weights, int(s), int(t))

    def entropy():
        cell_entropies(counts)

    def repulsion():
        for m in range(n):
            repulsion_deviation(m, xs, ys, vx, vy, hs, active, 0.01, 0.01, 10.0, 1.0, 0.2)

    def scenario():
        run_scenario(ScenarioConfig(n_aircraft=20, seed=3))

    cases = {"dijkstra x20": route, "cell_entropies 144": entropy,
             "repulsion 60 ac": repulsion, "scenario N=20": scenario}
    out = {"numba": NUMBA_ENABLED}
    for name, fn in cases.items():
        fn()  # warm-up, includes compilation
        reps = 1 if name.startswith("scenario") else repeat
        out[name] = min(timeit.repeat(fn, number=reps, repeat=3)) / reps
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(measure(args.repeat)))
        return
    results = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, HEXAIRSPACE_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
                              env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    if not results["numba"]["numba"]:
        print("numba is not importable; both columns use the fallback")
    print(f"{'kernel':<22}{'numba ms':>12}{'numpy ms':>12}{'speed-up':>10}")
    for name in results["numba"]:
        if name == "numba":
            continue
        a, b = results["numba"][name] * 1e3, results["numpy"][name] * 1e3
        print(f"{name:<22}{a:>12.3f}{b:>12.3f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
