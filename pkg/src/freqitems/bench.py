"""Benchmark and verification engines behind the command line.

Engines run on in-memory streams; file parsing and CSV writing live in
the CLI layer.  Timing wraps only the update (or merge) call, so stream
loading, exact counting, and error evaluation never contaminate the
throughput numbers.  Space figures come from the slot model rather than
process memory, keeping them stable across platforms.

The error column reports max_i (f_i - lower(i)) against the exact
counts: the worst shortfall of the summary's certain-weight view, which
is the quantity the per-algorithm guarantees bound.  Overestimating
summaries are measured through their corrected lower bounds so the
numbers stay comparable.
"""

from __future__ import annotations

import dataclasses
import functools
import time
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np

from . import counter_table as ct
from .baselines import (MGSummary, MHESummary, RBMCSummary, RTUCMGSummary,
                        RTUCSSSummary, SSSummary, ach_merge_quickselect,
                        ach_merge_sort)
from .oracle import ExactCounts
from .sketch import DEFAULT_SKETCH_SEED, ExactRank, ErrorMode, SampledQuantile, Sketch
from .streamgen import Stream, UniformInt, ZipfSpec, zipf_stream

ALGOS = ("smed", "smin", "med", "rbmc", "mhe", "mg", "ss", "rtuc-mg", "rtuc-ss")
MERGE_METHODS = ("ours", "ach-sort", "ach-qs")

_UNIT_ONLY = frozenset({"mg", "ss"})
_HEAP_BACKED = frozenset({"mhe", "ss", "rtuc-ss"})
_SAMPLED = frozenset({"smed", "smin"})

DEFAULT_ELL = 1024
DEFAULT_REPEATS = 10
DEFAULT_PHIS = (0.001, 0.01, 0.1)

CSV_FIELDS = ("algo", "k", "kstar", "ell", "q", "n", "N", "seed", "repeat",
              "time_s", "updates_per_s", "decrements", "max_err",
              "space_bytes")
CSV_HEADER = ",".join(CSV_FIELDS)

# bytes per open-addressing slot: 8 key + 8 count + 2 state
_TABLE_SLOT_BYTES = 18
# bytes per heap slot: 8 count + 8 item (the back-pointing slot index is
# folded into the table-side state in a packed implementation)
_HEAP_SLOT_BYTES = 16


def _fmt_num(value: Union[int, float, None]) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    f = float(value)
    if f.is_integer() and abs(f) < 2**53:
        return str(int(f))
    return repr(f)


@dataclasses.dataclass(frozen=True)
class BenchReport:
    """One CSV row of benchmark output.

    `repeat` is the 0-based repeat index, or the string "mean" for the
    aggregate row a multi-repeat run appends.  Fields that do not apply
    to an algorithm (kstar for the sampled variants, ell/q for the
    deterministic ones) are None and serialize to empty cells.
    """

    algo: str
    k: int
    kstar: Optional[int]
    ell: Optional[int]
    q: Optional[float]
    n: int
    N: int
    seed: int
    repeat: Union[int, str]
    time_s: float
    updates_per_s: float
    decrements: float
    max_err: float
    space_bytes: int

    def __post_init__(self) -> None:
        if not self.algo:
            raise ValueError("algo tag must be non-empty")
        if isinstance(self.repeat, str):
            if self.repeat != "mean":
                raise ValueError(f"repeat must be an index or 'mean', got {self.repeat!r}")
        elif self.repeat < 0:
            raise ValueError(f"repeat index must be >= 0, got {self.repeat}")
        for name in ("k", "kstar", "ell", "q", "n", "N", "seed", "time_s",
                     "updates_per_s", "decrements", "max_err", "space_bytes"):
            value = getattr(self, name)
            if value is None:
                continue
            if not np.isfinite(float(value)) or float(value) < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    def to_row(self) -> str:
        cells = [self.algo, str(self.k), _fmt_num(self.kstar),
                 _fmt_num(self.ell), _fmt_num(self.q), str(self.n),
                 str(self.N), str(self.seed), str(self.repeat),
                 _fmt_num(self.time_s), _fmt_num(self.updates_per_s),
                 _fmt_num(self.decrements), _fmt_num(self.max_err),
                 str(self.space_bytes)]
        return ",".join(cells)

    @classmethod
    def from_row(cls, row: str) -> "BenchReport":
        cells = row.rstrip("\n").split(",")
        if len(cells) != len(CSV_FIELDS):
            raise ValueError(
                f"expected {len(CSV_FIELDS)} cells, got {len(cells)}: {row!r}")
        algo, k, kstar, ell, q, n, N, seed, repeat = cells[:9]
        time_s, updates_per_s, decrements, max_err, space_bytes = cells[9:]
        return cls(
            algo=algo,
            k=int(k),
            kstar=int(kstar) if kstar else None,
            ell=int(ell) if ell else None,
            q=float(q) if q else None,
            n=int(n),
            N=int(N),
            seed=int(seed),
            repeat="mean" if repeat == "mean" else int(repeat),
            time_s=float(time_s),
            updates_per_s=float(updates_per_s),
            decrements=float(decrements),
            max_err=float(max_err),
            space_bytes=int(space_bytes),
        )


# ---------------------------------------------------------------------------
# Summary construction and the space model.

def make_summary(algo: str, k: int, *, kstar: Optional[int] = None,
                 ell: int = DEFAULT_ELL, q: Optional[float] = None,
                 seed: Optional[int] = None):
    """Build a fresh summary for an algorithm tag.

    q applies to the sampled variants only (smed defaults to the median;
    smin pins q = 0); kstar applies to the exact-rank sketch only and
    defaults to k // 2.
    """
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")
    if algo == "smed":
        qq = Fraction(1, 2) if q is None else q
        rng_seed = DEFAULT_SKETCH_SEED if seed is None else seed
        return Sketch(k, SampledQuantile(ell, qq, rng_seed))
    if algo == "smin":
        if q not in (None, 0, 0.0):
            raise ValueError(f"the min variant fixes q = 0, got q={q}")
        rng_seed = DEFAULT_SKETCH_SEED if seed is None else seed
        return Sketch(k, SampledQuantile(ell, 0, rng_seed))
    if q is not None:
        raise ValueError(f"--quantile does not apply to {algo}")
    if algo == "med":
        return Sketch(k, ExactRank(k // 2 if kstar is None else kstar))
    if kstar is not None:
        raise ValueError(f"--kstar does not apply to {algo}")
    if algo == "rbmc":
        return RBMCSummary(k)
    if algo == "mhe":
        return MHESummary(k)
    if algo == "mg":
        return MGSummary(k)
    if algo == "ss":
        return SSSummary(k)
    if algo == "rtuc-mg":
        return RTUCMGSummary(k)
    return RTUCSSSummary(k)


def summary_bytes(algo: str, k: int) -> int:
    """Model-based space: 18 bytes per table slot, plus 16 per heap slot
    for the heap-backed summaries."""
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}")
    total = _TABLE_SLOT_BYTES * ct.table_len_for(k)
    if algo in _HEAP_BACKED:
        total += _HEAP_SLOT_BYTES * k
    return total


def equal_space_k(budget_bytes: int, algo: str) -> int:
    """Largest k whose model size fits the byte budget."""
    if summary_bytes(algo, 1) > budget_bytes:
        raise ValueError(
            f"budget of {budget_bytes} bytes cannot hold one {algo} counter "
            f"({summary_bytes(algo, 1)} bytes)")
    lo, hi = 1, 2
    while summary_bytes(algo, hi) <= budget_bytes:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if summary_bytes(algo, mid) <= budget_bytes:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# Single-run engine.

@functools.lru_cache(maxsize=None)
def _warm(algo: str) -> None:
    """Trip every jit kernel an algorithm uses before anything is timed.

    64 updates over 32 items into an 8-counter summary force insert,
    add, decrement, and compaction paths to compile; compiled code is
    process-wide, so one throwaway run per algorithm suffices.
    """
    items = np.tile(np.arange(1, 33, dtype=np.uint64), 2)
    summary = make_summary(algo, 8)
    if algo in _UNIT_ONLY:
        summary.update_many(items)
    else:
        summary.update_many(items, np.full(items.size, 2, dtype=np.int64))
    summary.lower_bound_many(items[:4])


@functools.lru_cache(maxsize=None)
def _warm_merge(method: str) -> None:
    _warm("smed")
    left = make_summary("smed", 8, seed=1)
    right = make_summary("smed", 8, seed=2)
    items = np.arange(1, 33, dtype=np.uint64)
    weights = np.full(items.size, 2, dtype=np.int64)
    left.update_many(items, weights)
    right.update_many(items, weights)
    if method == "ours":
        left.merge(right)
    elif method == "ach-sort":
        ach_merge_sort(left, right, 8)
    else:
        ach_merge_quickselect(left, right, 8)


def _feed(summary, algo: str, stream: Stream) -> float:
    """Run the whole stream through summary; return elapsed seconds."""
    items, weights = stream.items, stream.weights
    if algo in _UNIT_ONLY:
        if weights.size and int(weights.max()) > 1:
            raise ValueError(
                f"{algo} handles unit-weight streams only; this stream has "
                f"weights up to {int(weights.max())} (use rtuc-{algo} or a "
                f"weighted algorithm)")
        start = time.perf_counter()
        summary.update_many(items)
        return time.perf_counter() - start
    start = time.perf_counter()
    summary.update_many(items, weights)
    return time.perf_counter() - start


def _decrements_of(summary) -> int:
    count = getattr(summary, "decrement_count", None)
    if count is None:
        count = summary.eviction_count
    return int(count)


def max_lower_error(oracle: ExactCounts, summary) -> int:
    return oracle.max_lower_error(summary.lower_bound,
                                  getattr(summary, "lower_bound_many", None))


def _mean_report(rows: Sequence[BenchReport]) -> BenchReport:
    mean_time = float(np.mean([r.time_s for r in rows]))
    first = rows[0]
    return dataclasses.replace(
        first,
        repeat="mean",
        time_s=mean_time,
        updates_per_s=first.n / max(mean_time, 1e-12),
        decrements=float(np.mean([r.decrements for r in rows])),
        max_err=float(np.mean([r.max_err for r in rows])),
    )


def single_run(algo: str, k: int, stream: Stream, oracle: ExactCounts, *,
               kstar: Optional[int] = None, ell: int = DEFAULT_ELL,
               q: Optional[float] = None, seed: int = 0,
               repeat: int = 0):
    """One timed pass of one summary; returns (report, summary)."""
    _warm(algo)
    summary = make_summary(algo, k, kstar=kstar, ell=ell, q=q, seed=seed)
    elapsed = _feed(summary, algo, stream)
    n = len(stream)
    if algo == "smed":
        report_q = 0.5 if q is None else float(q)
    elif algo == "smin":
        report_q = 0.0
    else:
        report_q = None
    report = BenchReport(
        algo=algo, k=k,
        kstar=(k // 2 if kstar is None else kstar) if algo == "med" else None,
        ell=ell if algo in _SAMPLED else None,
        q=report_q,
        n=n, N=oracle.total_weight, seed=seed, repeat=repeat,
        time_s=elapsed,
        updates_per_s=n / max(elapsed, 1e-12),
        decrements=_decrements_of(summary),
        max_err=max_lower_error(oracle, summary),
        space_bytes=summary_bytes(algo, k),
    )
    return report, summary


def bench_run(algo: str, k: int, stream: Stream, *,
              kstar: Optional[int] = None, ell: int = DEFAULT_ELL,
              q: Optional[float] = None, seed: int = 0,
              repeats: int = DEFAULT_REPEATS,
              oracle: Optional[ExactCounts] = None) -> List[BenchReport]:
    """Run one algorithm `repeats` times over the same stream.

    Sampled variants are reseeded per repeat (seed + repeat index), so
    their time and error columns genuinely vary; the deterministic
    algorithms only vary in time.  Returns one row per repeat plus, when
    repeats > 1, a trailing mean row.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if oracle is None:
        oracle = ExactCounts()
        oracle.ingest_many(stream.items, stream.weights)
    rows = []
    for repeat in range(repeats):
        report, _ = single_run(algo, k, stream, oracle, kstar=kstar, ell=ell,
                               q=q, seed=seed + repeat, repeat=repeat)
        rows.append(report)
    if repeats > 1:
        rows.append(_mean_report(rows))
    return rows


def compare_bench(algos: Sequence[str], stream: Stream, *,
                  k: Optional[int] = None,
                  space_budget: Optional[int] = None,
                  ell: int = DEFAULT_ELL, seed: int = 0,
                  repeats: int = DEFAULT_REPEATS) -> List[BenchReport]:
    """Equal-counters (--k) or equal-space (--space-budget) comparison."""
    if not algos:
        raise ValueError("no algorithms selected")
    for algo in algos:
        if algo not in ALGOS:
            raise ValueError(f"unknown algorithm {algo!r}")
    if (k is None) == (space_budget is None):
        raise ValueError("exactly one of k and space_budget must be given")
    oracle = ExactCounts()
    oracle.ingest_many(stream.items, stream.weights)
    rows = []
    for algo in algos:
        algo_k = k if k is not None else equal_space_k(space_budget, algo)
        rows.extend(bench_run(algo, algo_k, stream, ell=ell, seed=seed,
                              repeats=repeats, oracle=oracle))
    return rows


def quantile_sweep_bench(ks: Sequence[int], quantiles: Sequence[float],
                         stream: Stream, *, ell: int = DEFAULT_ELL,
                         seed: int = 0,
                         repeats: int = DEFAULT_REPEATS) -> List[BenchReport]:
    """Sampled sketch at every (k, q) pair, one bench_run each."""
    if not ks:
        raise ValueError("no k values given")
    if not quantiles:
        raise ValueError("no quantiles given")
    for q in quantiles:
        if not 0 <= q <= 1:
            raise ValueError(f"quantile must lie in [0, 1], got {q}")
    oracle = ExactCounts()
    oracle.ingest_many(stream.items, stream.weights)
    rows = []
    for k in ks:
        for q in quantiles:
            rows.extend(bench_run("smed", k, stream, ell=ell, q=q, seed=seed,
                                  repeats=repeats, oracle=oracle))
    return rows


# ---------------------------------------------------------------------------
# Merge benchmark.

def _merge_space(method: str, k: int) -> int:
    """Model bytes resident during one merge of two k-counter sketches.

    Ours works in place on the two inputs; the accumulate-and-select
    methods additionally allocate a 2k scratch table and a k result.
    """
    two_inputs = 2 * summary_bytes("smed", k)
    if method == "ours":
        return two_inputs
    return two_inputs + summary_bytes("mg", 2 * k) + summary_bytes("mg", k)


def merge_bench(k: int, pairs: int, methods: Sequence[str], *,
                alpha: float = 1.05, m: int = 50_000, n_per: int = 300_000,
                weight_low: int = 1, weight_high: int = 10_000,
                ell: int = DEFAULT_ELL, q: Optional[float] = None,
                seed: int = 0) -> List[BenchReport]:
    """Fill 2*pairs sampled sketches from synthetic streams and merge.

    Every method sees identical filled sketches (merges run on copies
    made outside the timer).  Per row: time_s covers only the merge
    call; n counts the counters the merge consumed; max_err is the
    post-merge error against the concatenated pair stream.
    """
    if pairs < 1:
        raise ValueError(f"pairs must be >= 1, got {pairs}")
    if not methods:
        raise ValueError("no merge methods selected")
    for method in methods:
        if method not in MERGE_METHODS:
            raise ValueError(
                f"unknown merge method {method!r}; choose from {', '.join(MERGE_METHODS)}")
    spec = ZipfSpec(m, alpha)
    dist = UniformInt(weight_low, weight_high)
    for method in methods:
        _warm_merge(method)
    per_method: dict = {method: [] for method in methods}
    report_q = 0.5 if q is None else float(q)

    for pair in range(pairs):
        seed_a = seed + 2 * pair
        seed_b = seed + 2 * pair + 1
        stream_a = zipf_stream(spec, n_per, dist, seed_a)
        stream_b = zipf_stream(spec, n_per, dist, seed_b)
        base_a = make_summary("smed", k, ell=ell, q=q, seed=seed_a)
        base_b = make_summary("smed", k, ell=ell, q=q, seed=seed_b)
        base_a.update_many(stream_a.items, stream_a.weights)
        base_b.update_many(stream_b.items, stream_b.weights)
        oracle = ExactCounts()
        oracle.ingest_many(stream_a.items, stream_a.weights)
        oracle.ingest_many(stream_b.items, stream_b.weights)

        for method in methods:
            left = base_a.copy()
            right = base_b.copy()
            if method == "ours":
                consumed = right.size
                start = time.perf_counter()
                merged = left.merge(right)
                elapsed = time.perf_counter() - start
                decrements = merged.decrement_count - base_a.decrement_count
            else:
                consumed = left.size + right.size
                fn = ach_merge_sort if method == "ach-sort" else ach_merge_quickselect
                start = time.perf_counter()
                merged = fn(left, right, k)
                elapsed = time.perf_counter() - start
                decrements = 0
            per_method[method].append(BenchReport(
                algo=f"merge-{method}", k=k, kstar=None, ell=ell, q=report_q,
                n=consumed, N=oracle.total_weight, seed=seed, repeat=pair,
                time_s=elapsed,
                updates_per_s=consumed / max(elapsed, 1e-12),
                decrements=decrements,
                max_err=max_lower_error(oracle, merged),
                space_bytes=_merge_space(method, k),
            ))

    rows = []
    for method in methods:
        method_rows = per_method[method]
        rows.extend(method_rows)
        if len(method_rows) > 1:
            rows.append(_mean_report(method_rows))
    return rows


# ---------------------------------------------------------------------------
# Verification against the exact counts.

def verify_bounds(oracle: ExactCounts, summary) -> List[str]:
    """Check lower <= f (everything) and f <= upper (where available)."""
    problems = []
    items = np.fromiter((it for it, _ in oracle.items()), dtype=np.uint64,
                        count=oracle.distinct)
    truths = np.fromiter((f for _, f in oracle.items()), dtype=np.int64,
                         count=oracle.distinct)
    if items.size:
        lows = summary.lower_bound_many(items)
        bad = np.flatnonzero(lows > truths)
        for idx in bad[:5]:
            problems.append(
                f"lower bound {int(lows[idx])} exceeds true count "
                f"{int(truths[idx])} for item {int(items[idx])}")
        if hasattr(summary, "upper_bound_many"):
            highs = summary.upper_bound_many(items)
            bad = np.flatnonzero(highs < truths)
            for idx in bad[:5]:
                problems.append(
                    f"upper bound {int(highs[idx])} below true count "
                    f"{int(truths[idx])} for item {int(items[idx])}")
    for probe in oracle.probe_items():
        if summary.lower_bound(probe) > 0:
            problems.append(f"lower bound positive for never-seen item {probe}")
            break
    return problems


def verify_containment(oracle: ExactCounts, sketch: Sketch,
                       phis: Sequence[float] = DEFAULT_PHIS) -> List[str]:
    """Frequent-items containment at each threshold fraction.

    The no-false-negatives listing can only enumerate assigned items, so
    its superset guarantee requires the threshold to exceed the offset
    (otherwise a never-assigned item could still qualify).  Thresholds
    at or below the offset skip that direction instead of reporting a
    vacuous failure.  The no-false-positives subset check holds
    unconditionally.
    """
    problems = []
    N = oracle.total_weight
    for phi in phis:
        threshold = Fraction(repr(phi)) * N
        exact = oracle.heavy_hitters_exact(phi)
        if threshold > sketch.offset:
            no_miss = {row.item for row in
                       sketch.frequent_items(ErrorMode.NO_FALSE_NEGATIVES, threshold)}
            missed = exact - no_miss
            if missed:
                problems.append(
                    f"phi={phi}: {len(missed)} true heavy hitters missing from "
                    f"the no-false-negatives listing (e.g. {sorted(missed)[:3]})")
        no_spur = {row.item for row in
                   sketch.frequent_items(ErrorMode.NO_FALSE_POSITIVES, threshold)}
        spurious = no_spur - exact
        if spurious:
            problems.append(
                f"phi={phi}: {len(spurious)} spurious items in the "
                f"no-false-positives listing (e.g. {sorted(spurious)[:3]})")
    return problems
