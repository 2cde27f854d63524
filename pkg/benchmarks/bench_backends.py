"""Benchmark the compiled message kernels against the pure-python fallback.

Times full sweeps (all edge blocks + all cluster blocks) and an end-to-end
square-pursuit solve on spin-glass grids.

Usage:
    python benchmarks/bench_backends.py [--rows 20] [--cols 20] [--states 3]
"""

import argparse
import time

import numpy as np

import mplpx
from mplpx import GeneratorSpec, MessageState, SolveConfig, generate
from mplpx.pursuit import add_cluster, enumerate_squares


def time_sweeps(model, clusters, backend, passes):
    state = MessageState(model, backend=backend)
    for cand in clusters:
        add_cluster(state, cand)
    state.run_pass()  # warm the caches outside the timed region
    t0 = time.perf_counter()
    for _ in range(passes):
        state.run_pass()
    dt = time.perf_counter() - t0
    return dt, state.dual_objective()


def time_solve(model, backend):
    t0 = time.perf_counter()
    res = mplpx.solve(
        model, SolveConfig(candidate_kind="squares", max_rounds=200),
        backend=backend,
    )
    return time.perf_counter() - t0, res


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20)
    parser.add_argument("--cols", type=int, default=20)
    parser.add_argument("--states", type=int, default=3)
    parser.add_argument("--passes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not mplpx.compiled_available():
        print("compiled kernels are not available; nothing to compare")
        return

    model = generate(
        GeneratorSpec(
            kind="spin_glass_grid", rows=args.rows, cols=args.cols,
            states=args.states, coupling=(0.3, 1.0), field=(-0.3, 0.3),
            seed=args.seed,
        )
    )
    clusters = enumerate_squares(model)[: max(4, model.num_edges // 12)]
    print(
        f"instance: {args.rows}x{args.cols} grid, {args.states} states, "
        f"{model.num_edges} edges, {2 * len(clusters)} triplets, "
        f"{args.passes} passes"
    )

    rows = []
    duals = {}
    for backend in ("python", "compiled"):
        dt, dual = time_sweeps(model, clusters, backend, args.passes)
        rows.append((f"sweeps/{backend}", dt, args.passes / dt))
        duals[backend] = dual
    assert duals["python"] == duals["compiled"], "backends diverged"
    sweep_speedup = rows[0][1] / rows[1][1]

    solve_model = generate(
        GeneratorSpec(kind="spin_glass_grid", rows=8, cols=8, states=2,
                      coupling=(0.3, 1.0), field=(-0.3, 0.3), seed=args.seed)
    )
    solve_rows = []
    for backend in ("python", "compiled"):
        dt, res = time_solve(solve_model, backend)
        solve_rows.append((f"solve 8x8/{backend}", dt, res.status,
                           len(res.clusters_added)))
    solve_speedup = solve_rows[0][1] / solve_rows[1][1]

    print()
    print(f"{'benchmark':<22}{'seconds':>10}{'rate':>16}")
    for name, dt, rate in rows:
        print(f"{name:<22}{dt:>10.3f}{rate:>12.1f} p/s")
    for name, dt, status, added in solve_rows:
        print(f"{name:<22}{dt:>10.3f}   {status}, {added} clusters")
    print()
    print(f"sweep speedup:  {sweep_speedup:.1f}x")
    print(f"solve speedup:  {solve_speedup:.1f}x")
    print(f"dual agreement: exact ({duals['compiled']:.12g})")


if __name__ == "__main__":
    main()
