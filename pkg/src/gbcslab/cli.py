"""Command-line interface.

Subcommands operate on a graph file (see ``topology``) except ``scan``,
which enumerates graphs itself.  Exit codes: 0 success, 1 usage error,
2 graph/file parse error, 3 numeric failure, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .controllability import analyze, report_json, sep_uncontrollability_check
from .errors import GbcsError, GraphParseError, InvariantError, NumericError
from .lqgame import (default_params, lifted_terminal_weights, nash_deviation_check,
                     riccati_solve, simulate, write_trajectory_csv)
from .scan import conjecture_scan, scan_csv
from .strategy import strategy_matrix
from .topology import load_topology


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tf", type=float, default=1.0, help="horizon length (default 1)")
    parser.add_argument("--steps", type=int, default=200,
                        help="integration steps (default 200)")
    parser.add_argument("--rank-tol", default="auto",
                        help="absolute singular-value threshold or 'auto'")
    parser.add_argument("--t-tol", type=float, default=1e-9,
                        help="terminal-block row equality tolerance (default 1e-9)")
    parser.add_argument("--json", metavar="PATH", help="write a JSON report here")
    parser.add_argument("--csv", metavar="PATH", help="write CSV output here")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbcslab",
        description="Game-based control on graphs: strategy matrices, equilibrium "
                    "machinery, and controllability tests.")
    parser.add_argument("--version", action="version", version=f"gbcslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [
        ("analyze", "full controllability report for a graph"),
        ("smatrix", "print the strategy matrix"),
        ("sep", "print the coarsest strategy-equivalent partition"),
        ("riccati", "solve the per-player Riccati equations backward"),
        ("simulate", "simulate the augmented system under a regulator input"),
        ("nash-check", "certify the equilibrium by random unilateral deviations"),
    ]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("graph", help="graph file (text format, or .json)")
        _add_common(sp)
        if name == "simulate":
            sp.add_argument("--x0", default=None,
                            help="comma-separated initial state (default 1,0,...,0)")
            sp.add_argument("--u", type=float, default=1.0,
                            help="constant regulator input level (default 1)")
        if name == "nash-check":
            sp.add_argument("--x0", default=None,
                            help="comma-separated initial state (default 1,0,...,0)")
            sp.add_argument("--z", type=float, default=1.0,
                            help="constant regulator input level (default 1)")
            sp.add_argument("--trials", type=int, default=20,
                            help="perturbations per player (default 20)")
            sp.add_argument("--eps", type=float, default=1e-2,
                            help="perturbation amplitude (default 1e-2)")
            sp.add_argument("--terminal", choices=["lifted", "identity"], default="lifted",
                            help="terminal weights: 'lifted' charges agents only "
                                 "(certifiable); 'identity' keeps raw defaults")

    sp = sub.add_parser("scan", help="classify every graph on a given agent count")
    sp.add_argument("--agents", type=int, required=True, help="agent count (1..7)")
    sp.add_argument("--dedup-iso", action="store_true",
                    help="keep one representative per isomorphism class")
    sp.add_argument("--max-agents", type=int, default=6,
                    help="enumeration guard (default 6)")
    _add_common(sp)
    return parser


def _rank_tol(raw: str):
    if raw == "auto":
        return "auto"
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"--rank-tol must be a number or 'auto', got {raw!r}") from None


def _parse_x0(raw, n: int) -> np.ndarray:
    if raw is None:
        x0 = np.zeros(n)
        x0[0] = 1.0
        return x0
    try:
        values = [float(tok) for tok in raw.split(",")]
    except ValueError:
        raise ValueError(f"--x0 must be comma-separated numbers, got {raw!r}") from None
    if len(values) != n:
        raise ValueError(f"--x0 needs {n} entries for this graph, got {len(values)}")
    return np.array(values)


def _load(path):
    try:
        return load_topology(path)
    except OSError as exc:
        raise GraphParseError(f"cannot read graph file {path!r}: {exc.strerror}") from exc


def _print_matrix(mat) -> None:
    width = max(len(str(int(x))) for row in mat for x in row)
    for row in mat:
        print(" ".join(f"{int(x):>{width}d}" for x in row))


def _cmd_analyze(args) -> int:
    top = _load(args.graph)
    p = default_params(top, horizon=args.tf)
    report = analyze(top, p, rank_tol=_rank_tol(args.rank_tol), t_tol=args.t_tol)
    print(f"agents: {report.agents}, edges: {list(report.edges)}")
    print(f"sep cells: {[list(c) for c in report.sep_cells]}")
    print(f"structural test applies: {report.thm2_applies}")
    print(f"kalman rank: {report.kalman_rank} / {(report.agents + 1) ** 2}")
    print(f"projected rank: {report.projected_rank} / {report.agents + 1}")
    print(f"controllable: {report.controllable}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report_json(report) + "\n")
    return 0


def _cmd_smatrix(args) -> int:
    top = _load(args.graph)
    _print_matrix(strategy_matrix(top))
    return 0


def _cmd_sep(args) -> int:
    top = _load(args.graph)
    p = default_params(top, horizon=args.tf)
    sep = sep_uncontrollability_check(top, p, t_tol=args.t_tol)
    for cell in sep.partition:
        kind = "regulator" if 0 in cell else ("nontrivial" if len(cell) > 1 else "trivial")
        print(f"cell {list(cell)} ({kind})")
    print(f"t rows equal: {sep.t_rows_equal}; structural uncontrollability: "
          f"{sep.uncontrollable}")
    return 0


def _cmd_riccati(args) -> int:
    top = _load(args.graph)
    p = default_params(top, horizon=args.tf)
    sol = riccati_solve(p, steps=args.steps)
    print(f"grid: {sol.times.size} nodes on [0, {p.horizon:g}]")
    print(f"max asymmetry removed: {sol.max_asymmetry:.3e}")
    for i, k in enumerate(sol.k, start=1):
        print(f"K_{i}(0) diagonal: {np.array2string(np.diag(k[0]), precision=6)}")
    if args.csv:
        _write_riccati_csv(args.csv, p, sol)
    return 0


def _write_riccati_csv(path, p, sol) -> None:
    n = p.n
    header = ["t"]
    for i in range(1, p.h + 1):
        header += [f"k{i}_{a}{b}" for a in range(n) for b in range(n)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for idx, t in enumerate(sol.times):
            row = [t]
            for k in sol.k:
                row.extend(k[idx].ravel())
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _cmd_simulate(args) -> int:
    top = _load(args.graph)
    p = default_params(top, horizon=args.tf)
    x0 = _parse_x0(args.x0, p.n)
    u = np.full(args.steps + 1, args.u)
    traj = simulate(p, x0, u, steps=args.steps)
    print(f"simulated {traj.times.size} nodes on [0, {p.horizon:g}], u = {args.u:g}")
    print(f"X(0) = {np.array2string(traj.states[0, :p.n], precision=6)}")
    print(f"X(T) = {np.array2string(traj.states[-1, :p.n], precision=6)}")
    if args.csv:
        write_trajectory_csv(p, traj, args.csv)
    return 0


def _cmd_nash_check(args) -> int:
    top = _load(args.graph)
    overrides = {"horizon": args.tf}
    if args.terminal == "lifted":
        overrides["q_terminal"] = lifted_terminal_weights(top.agent_count)
    p = default_params(top, **overrides)
    x0 = _parse_x0(args.x0, p.n)
    z = np.full(args.steps + 1, args.z)
    report = nash_deviation_check(p, x0, z, trials=args.trials, eps=args.eps,
                                  seed=args.seed, steps=args.steps)
    for i in range(1, p.h + 1):
        print(f"player {i}: min delta-J = {report.deltas[i - 1].min():.6e} "
              f"over {args.trials} trials")
    print(f"eps = {report.eps:g}, seed = {report.seed}, "
          f"verdict: {'certified' if report.certified else 'NOT certified'}")
    if args.json:
        import json as _json
        payload = {
            "eps": report.eps, "seed": report.seed, "threshold": report.threshold,
            "min_delta": report.min_delta, "certified": report.certified,
            "deltas": report.deltas.tolist(),
        }
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(_json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_scan(args) -> int:
    overrides = {"horizon": args.tf}
    records, summary = conjecture_scan(
        args.agents, overrides=overrides, rank_tol=_rank_tol(args.rank_tol),
        t_tol=args.t_tol, dedup_iso=args.dedup_iso, max_agents=args.max_agents)
    print(f"scanned {len(records)} graphs on {args.agents} agents")
    for key in ("consistent", "THEOREM_VIOLATION", "CONJECTURE_COUNTEREXAMPLE",
                "numeric_failure"):
        if summary.get(key):
            print(f"  {key}: {summary[key]}")
    for rec in records:
        if rec.classification == "CONJECTURE_COUNTEREXAMPLE":
            print(f"  !! counterexample candidate: graph {rec.graph_id} "
                  f"edges {list(rec.edges)}")
    if summary.get("THEOREM_VIOLATION"):
        raise InvariantError("scan produced THEOREM_VIOLATION rows; this is a bug")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(scan_csv(records))
    return 0


_DISPATCH = {
    "analyze": _cmd_analyze,
    "smatrix": _cmd_smatrix,
    "sep": _cmd_sep,
    "riccati": _cmd_riccati,
    "simulate": _cmd_simulate,
    "nash-check": _cmd_nash_check,
    "scan": _cmd_scan,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version and 2 for usage problems
        return 0 if exc.code == 0 else 1
    try:
        return _DISPATCH[args.command](args)
    except GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return 4
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, GbcsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
