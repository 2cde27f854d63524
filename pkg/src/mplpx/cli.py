"""Command-line frontend: solve, generate, oracle.

Exit codes: 0 solved with certificate, 1 usage or parse error, 2 clean run
without certificate (gap remaining or budget exhausted) and oversized oracle
inputs.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import instanceio, oracle, pursuit
from .model import PairwiseModel

TRACE_HEADER = ["event", "pass", "dual", "decoded", "clusters", "d_c", "ms"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_model(path: str, fmt: str) -> PairwiseModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "uai":
        return instanceio.parse_uai(text)
    return instanceio.parse_native(text)


def _cluster_id(vars_: tuple[int, ...]) -> str:
    return "-".join(str(v) for v in vars_)


def write_trace_csv(trace: pursuit.SolveTrace, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for ev in trace.events:
            writer.writerow(
                [
                    ev.event,
                    ev.pass_index,
                    _fmt(ev.dual),
                    _fmt(ev.decoded) if ev.decoded is not None else "",
                    _cluster_id(ev.cluster) if ev.cluster is not None else "",
                    _fmt(ev.d_c) if ev.d_c is not None else "",
                    f"{ev.ms:.3f}",
                ]
            )


def cmd_solve(args) -> int:
    try:
        model = _load_model(args.input, args.format)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    except instanceio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        # keep the phase-convergence test below the certificate tolerance
        # when a tight --tol is requested
        default = pursuit.SolveConfig()
        threshold = min(default.convergence_threshold, args.tol / 5.0)
        config = pursuit.SolveConfig(
            initial_pass_cap=args.initial_pass_cap,
            inner_iters=args.inner_iters,
            clusters_per_round=args.clusters_per_round,
            gap_tolerance=args.tol,
            convergence_threshold=threshold,
            max_rounds=args.max_rounds,
            candidate_kind=args.candidates,
        )
        config.check()
        if args.schedule == "random":
            if args.seed is None:
                raise ValueError("--schedule random requires --seed")
            result = pursuit.solve_random_schedule(model, config, seed=args.seed)
        else:
            result = pursuit.solve(model, config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    gap = result.dual - result.energy
    print(f"status: {result.status}")
    print(f"dual: {_fmt(result.dual)}")
    print(f"decoded energy: {_fmt(result.energy)}")
    print(f"gap: {_fmt(gap)}")
    print(f"clusters added: {len(result.clusters_added)}")
    if result.clusters_added:
        print(
            "cluster identities: "
            + " ".join(_cluster_id(c) for c in result.clusters_added)
        )
    print(f"passes: {result.passes}")
    print(f"assignment: {' '.join(str(int(x)) for x in result.assignment)}")
    print(
        "config: "
        f"tol={_fmt(config.gap_tolerance)} "
        f"initial_pass_cap={config.initial_pass_cap} "
        f"inner_iters={config.inner_iters} "
        f"clusters_per_round={config.clusters_per_round} "
        f"candidates={config.candidate_kind} "
        f"schedule={args.schedule} "
        f"max_rounds={config.max_rounds}"
    )
    print(f"seed: {args.seed if args.seed is not None else 'none'}")
    print(f"wall time: {result.wall_time:.3f} s")

    if args.trace:
        write_trace_csv(result.trace, args.trace)
    return 0 if result.status == "certified" else 2


def cmd_generate(args) -> int:
    states: int | tuple[int, int]
    if len(args.states) == 1:
        states = args.states[0]
    elif len(args.states) == 2:
        states = (args.states[0], args.states[1])
    else:
        print("error: --states takes one value or a lo hi pair", file=sys.stderr)
        return 1
    try:
        spec = instanceio.GeneratorSpec(
            kind=args.kind,
            n=args.n,
            rows=args.rows,
            cols=args.cols,
            states=states,
            coupling=(args.coupling[0], args.coupling[1]),
            field=(args.field[0], args.field[1]),
            seed=args.seed,
        )
        model = instanceio.generate(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = instanceio.write_native(model)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {args.out}: {model.num_vars} variables, {model.num_edges} edges")
    return 0


def cmd_oracle(args) -> int:
    try:
        model = _load_model(args.input, args.format)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    except instanceio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        result = oracle.brute_force_map(model, limit=args.limit)
    except oracle.StateSpaceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"energy: {_fmt(result.energy)}")
    print(f"assignment: {' '.join(str(x) for x in result.assignment)}")
    print(f"optima: {result.num_optima}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mplpx",
        description="MAP inference via dual message passing with cluster tightening",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance file")
    p_solve.add_argument("--input", required=True)
    p_solve.add_argument("--format", choices=("native", "uai"), default="native")
    p_solve.add_argument("--tol", type=float, default=1e-4)
    p_solve.add_argument("--initial-pass-cap", type=int, default=1000)
    p_solve.add_argument("--inner-iters", type=int, default=20)
    p_solve.add_argument("--clusters-per-round", type=int, default=5)
    p_solve.add_argument(
        "--candidates", choices=("triangles", "squares", "both"), default="both"
    )
    p_solve.add_argument("--schedule", choices=("score", "random"), default="score")
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.add_argument("--trace", default=None, metavar="PATH")
    p_solve.add_argument("--max-rounds", type=int, default=1000)
    p_solve.set_defaults(func=cmd_solve)

    p_gen = sub.add_parser("generate", help="write a synthetic instance")
    p_gen.add_argument("--kind", choices=instanceio.GENERATOR_KINDS, required=True)
    p_gen.add_argument("--n", type=int, default=0)
    p_gen.add_argument("--rows", type=int, default=0)
    p_gen.add_argument("--cols", type=int, default=0)
    p_gen.add_argument("--states", type=int, nargs="+", default=[2])
    p_gen.add_argument("--coupling", type=float, nargs=2, default=[-1.0, 1.0])
    p_gen.add_argument("--field", type=float, nargs=2, default=[-1.0, 1.0])
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, metavar="PATH")
    p_gen.set_defaults(func=cmd_generate)

    p_oracle = sub.add_parser("oracle", help="exact MAP by enumeration")
    p_oracle.add_argument("--input", required=True)
    p_oracle.add_argument("--format", choices=("native", "uai"), default="native")
    p_oracle.add_argument("--limit", type=int, default=oracle.DEFAULT_LIMIT)
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
