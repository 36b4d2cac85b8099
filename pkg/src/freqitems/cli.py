"""Command line harness: stream generation, runs, and benchmark suites.

Subcommands
    gen             write a synthetic weighted stream file
    run             one algorithm over one stream -> one CSV row
    compare         equal-counters or equal-space comparison table
    quantile-sweep  sampled sketch across (k, q) grid
    merge-bench     merge-procedure shootout on synthetic sketch pairs

Rows append to --out (header written when the file is new) or print to
stdout.  --plots DIR additionally renders PNG figures from the same rows.
Exit status: 0 on success, 1 when --verify finds a violated guarantee,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from . import bench
from .bench import (ALGOS, CSV_HEADER, DEFAULT_ELL, DEFAULT_REPEATS,
                    MERGE_METHODS, BenchReport)
from .oracle import ExactCounts
from .sketch import ErrorMode, Sketch
from .streamgen import (Constant, UniformInt, WeightDist, ZipfSpec,
                        read_stream, write_stream, zipf_stream)


def _parse_weight_dist(spec: str) -> WeightDist:
    """const:V or uniform:LO:HI (a bare integer means const)."""
    parts = spec.split(":")
    try:
        if parts[0] == "const" and len(parts) == 2:
            return Constant(int(parts[1]))
        if parts[0] == "uniform" and len(parts) == 3:
            return UniformInt(int(parts[1]), int(parts[2]))
        if len(parts) == 1:
            return Constant(int(parts[0]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    raise argparse.ArgumentTypeError(
        f"expected const:V or uniform:LO:HI, got {spec!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _emit_rows(rows: Sequence[BenchReport], out: Optional[str]) -> None:
    if out is None:
        print(CSV_HEADER)
        for row in rows:
            print(row.to_row())
        return
    path = Path(out)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", encoding="ascii") as fh:
        if fresh:
            fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_row() + "\n")


def _render_plots(kind: str, rows: Sequence[BenchReport], plots_dir: str) -> None:
    from . import plots  # deferred so CSV-only runs never import matplotlib

    outdir = Path(plots_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    renderer = {"compare": plots.render_compare,
                "sweep": plots.render_sweep,
                "merge": plots.render_merge}[kind]
    for path in renderer(rows, outdir):
        print(f"wrote {path}")


def _cmd_gen(args: argparse.Namespace) -> int:
    stream = zipf_stream(ZipfSpec(args.m, args.alpha), args.n,
                         args.weights, args.seed)
    write_stream(stream, args.out)
    print(f"wrote {args.out}: {len(stream)} updates, "
          f"total weight {stream.total_weight}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    if args.phi is not None and args.algo not in ("smed", "smin", "med"):
        # reject before paying for the run
        print(f"error: heavy-hitter listing requires a sketch algorithm "
              f"(smed, smin, med), not {args.algo}", file=sys.stderr)
        return 2
    stream = read_stream(args.input)
    oracle = ExactCounts()
    oracle.ingest_many(stream.items, stream.weights)
    row, summary = bench.single_run(args.algo, args.k, stream, oracle,
                                    kstar=args.kstar, ell=args.ell,
                                    q=args.quantile, seed=args.seed)
    _emit_rows([row], args.out)

    if args.phi is not None:
        threshold = Fraction(repr(args.phi)) * oracle.total_weight
        print(f"# items with weight >= {args.phi} * N "
              f"(no false negatives, threshold {float(threshold):.1f})")
        for row in summary.frequent_items(ErrorMode.NO_FALSE_NEGATIVES, threshold):
            print(f"{row.item} estimate={row.estimate} "
                  f"lower={row.lower} upper={row.upper}")

    if args.verify:
        problems = bench.verify_bounds(oracle, summary)
        if isinstance(summary, Sketch):
            phis = (args.phi,) if args.phi is not None else bench.DEFAULT_PHIS
            problems += bench.verify_containment(oracle, summary, phis)
        if problems:
            for problem in problems:
                print(f"verify: {problem}", file=sys.stderr)
            return 1
        print("verify: all bounds and containment checks passed")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    stream = read_stream(args.input)
    rows = bench.compare_bench(args.algos, stream, k=args.k,
                               space_budget=args.space_budget, ell=args.ell,
                               seed=args.seed, repeats=args.repeats)
    _emit_rows(rows, args.out)
    if args.plots:
        _render_plots("compare", rows, args.plots)
    return 0


def _cmd_quantile_sweep(args: argparse.Namespace) -> int:
    stream = read_stream(args.input)
    rows = bench.quantile_sweep_bench(args.k, args.quantiles, stream,
                                      ell=args.ell, seed=args.seed,
                                      repeats=args.repeats)
    _emit_rows(rows, args.out)
    if args.plots:
        _render_plots("sweep", rows, args.plots)
    return 0


def _cmd_merge_bench(args: argparse.Namespace) -> int:
    methods = list(MERGE_METHODS) if args.method == "all" else [args.method]
    rows = bench.merge_bench(args.k, args.pairs, methods, alpha=args.alpha,
                             m=args.m, n_per=args.n_per,
                             weight_low=args.weight_low,
                             weight_high=args.weight_high, ell=args.ell,
                             seed=args.seed)
    _emit_rows(rows, args.out)
    if args.plots:
        _render_plots("merge", rows, args.plots)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqitems",
        description="Approximate frequent-items summaries over weighted "
                    "streams: generators, benchmarks, and verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic stream file")
    gen.add_argument("--m", type=int, default=10_000,
                     help="universe size (ids 1..m)")
    gen.add_argument("--alpha", type=float, default=1.05,
                     help="skew exponent (0 = uniform)")
    gen.add_argument("--n", type=int, default=100_000, help="update count")
    gen.add_argument("--weights", type=_parse_weight_dist,
                     default=UniformInt(1, 100),
                     help="const:V or uniform:LO:HI (default uniform:1:100)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output stream path")
    gen.set_defaults(func=_cmd_gen)

    run = sub.add_parser("run", help="one algorithm over one stream")
    run.add_argument("--algo", required=True, choices=ALGOS)
    run.add_argument("--k", type=int, required=True, help="counter budget")
    run.add_argument("--kstar", type=int, default=None,
                     help="decrement rank for med (default k//2)")
    run.add_argument("--quantile", type=float, default=None,
                     help="decrement quantile for smed (default 0.5)")
    run.add_argument("--ell", type=int, default=DEFAULT_ELL,
                     help="sample size for the sampled variants")
    run.add_argument("--input", required=True, help="stream file")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--phi", type=float, default=None,
                     help="also list items with weight >= phi * N")
    run.add_argument("--out", default=None, help="CSV file to append to")
    run.add_argument("--verify", action="store_true",
                     help="check bounds (and containment) against exact counts")
    run.set_defaults(func=_cmd_run)

    cmp = sub.add_parser("compare", help="multi-algorithm comparison table")
    group = cmp.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, help="equal-counters mode")
    group.add_argument("--space-budget", type=int,
                       help="equal-space mode (bytes per summary)")
    cmp.add_argument("--algos", type=lambda s: s.split(","), required=True,
                     help="comma-separated algorithm tags")
    cmp.add_argument("--input", required=True, help="stream file")
    cmp.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    cmp.add_argument("--ell", type=int, default=DEFAULT_ELL)
    cmp.add_argument("--seed", type=int, default=0)
    cmp.add_argument("--out", default=None, help="CSV file to append to")
    cmp.add_argument("--plots", default=None, help="directory for PNG figures")
    cmp.set_defaults(func=_cmd_compare)

    sweep = sub.add_parser("quantile-sweep",
                           help="sampled sketch across a (k, q) grid")
    sweep.add_argument("--k", type=_int_list, required=True,
                       help="comma-separated counter budgets")
    sweep.add_argument("--quantiles", type=_float_list, required=True,
                       help="comma-separated quantiles in [0, 1]")
    sweep.add_argument("--input", required=True, help="stream file")
    sweep.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    sweep.add_argument("--ell", type=int, default=DEFAULT_ELL)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", default=None, help="CSV file to append to")
    sweep.add_argument("--plots", default=None, help="directory for PNG figures")
    sweep.set_defaults(func=_cmd_quantile_sweep)

    merge = sub.add_parser("merge-bench", help="merge-procedure benchmark")
    merge.add_argument("--k", type=int, required=True)
    merge.add_argument("--pairs", type=int, required=True,
                       help="number of sketch pairs to merge")
    merge.add_argument("--method", default="all",
                       choices=MERGE_METHODS + ("all",))
    merge.add_argument("--alpha", type=float, default=1.05)
    merge.add_argument("--m", type=int, default=50_000,
                       help="universe size for the fill streams")
    merge.add_argument("--n-per", type=int, default=300_000,
                       help="updates per fill stream")
    merge.add_argument("--weight-low", type=int, default=1)
    merge.add_argument("--weight-high", type=int, default=10_000)
    merge.add_argument("--ell", type=int, default=DEFAULT_ELL)
    merge.add_argument("--seed", type=int, default=0)
    merge.add_argument("--out", default=None, help="CSV file to append to")
    merge.add_argument("--plots", default=None, help="directory for PNG figures")
    merge.set_defaults(func=_cmd_merge_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
