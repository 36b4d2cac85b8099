"""Tests for the benchmark harness: reports, space model, runners."""

import statistics

import numpy as np
import pytest

import freqitems.bench as bench
from freqitems.bench import (BenchReport, bench_run, compare_bench,
                             equal_space_k, make_summary, merge_bench,
                             quantile_sweep_bench, single_run, summary_bytes,
                             verify_bounds, verify_containment)
from freqitems.counter_table import table_len_for
from freqitems.oracle import ExactCounts
from freqitems.sketch import Row, Sketch, SampledQuantile
from freqitems.streamgen import Constant, UniformInt, ZipfSpec, zipf_stream
from fractions import Fraction


@pytest.fixture(scope="module")
def small():
    stream = zipf_stream(ZipfSpec(100, 1.05), 2000, UniformInt(1, 50), 3)
    oracle = ExactCounts()
    oracle.ingest_many(stream.items, stream.weights)
    return stream, oracle


# -- report rows ---------------------------------------------------------------

def test_report_round_trip():
    r = BenchReport(algo="smed", k=8, kstar=None, ell=1024, q=0.5, n=100,
                    N=500, seed=1, repeat="mean", time_s=0.5,
                    updates_per_s=200.0, decrements=3.0, max_err=17.0,
                    space_bytes=288)
    assert r.to_row() == "smed,8,,1024,0.5,100,500,1,mean,0.5,200,3,17,288"
    assert BenchReport.from_row(r.to_row()) == r


def test_report_round_trip_med():
    r = BenchReport(algo="med", k=8, kstar=4, ell=None, q=None, n=1, N=1,
                    seed=0, repeat=0, time_s=0.0, updates_per_s=0.0,
                    decrements=0.0, max_err=0.0, space_bytes=288)
    assert BenchReport.from_row(r.to_row()) == r


def test_report_rejects_short_row():
    with pytest.raises(ValueError, match="expected 14 cells, got 3"):
        BenchReport.from_row("a,b,c")


def test_csv_header_matches_fields():
    assert bench.CSV_HEADER == ",".join(bench.CSV_FIELDS)
    assert len(bench.CSV_FIELDS) == 14


# -- space model ---------------------------------------------------------------

def test_summary_bytes_table_and_heap():
    # 18 bytes per table slot; heap-backed variants add 16 per counter
    for algo in ("smed", "smin", "med", "rbmc", "mg", "rtuc-mg"):
        assert summary_bytes(algo, 1024) == 18 * table_len_for(1024)
    for algo in ("mhe", "ss", "rtuc-ss"):
        assert summary_bytes(algo, 1024) == 18 * table_len_for(1024) + 16 * 1024
    with pytest.raises(ValueError, match="unknown algorithm"):
        summary_bytes("nope", 8)


def test_equal_space_k():
    assert equal_space_k(73728, "smed") == 3072
    assert equal_space_k(73728, "rbmc") == 3072
    assert equal_space_k(73728, "mhe") == 1536
    # the returned k must actually fit, and k+1 must not
    for algo in ("smed", "mhe"):
        k = equal_space_k(50_000, algo)
        assert summary_bytes(algo, k) <= 50_000
        assert summary_bytes(algo, k + 1) > 50_000
    with pytest.raises(ValueError, match="cannot hold one smed counter"):
        equal_space_k(10, "smed")


# -- summary construction --------------------------------------------------------

def test_make_summary_defaults():
    s = make_summary("smed", 8, seed=1)
    assert isinstance(s, Sketch)
    assert s.strategy.q == Fraction(1, 2)
    assert make_summary("smin", 8, seed=1).strategy.q == 0
    assert make_summary("med", 8).strategy.k_star == 4
    assert make_summary("med", 8, kstar=3).strategy.k_star == 3


def test_make_summary_rejections():
    with pytest.raises(ValueError, match="the min variant fixes q = 0"):
        make_summary("smin", 8, q=0.5, seed=1)
    with pytest.raises(ValueError, match="--quantile does not apply to med"):
        make_summary("med", 8, q=0.5)
    with pytest.raises(ValueError, match="--kstar does not apply to mg"):
        make_summary("mg", 8, kstar=4)
    with pytest.raises(ValueError, match="unknown algorithm 'nope'"):
        make_summary("nope", 8)


# -- runners ---------------------------------------------------------------------

def test_single_run_report_shape(small):
    stream, oracle = small
    report, summary = single_run("smed", 32, stream, oracle, seed=5, repeat=2)
    assert report.algo == "smed"
    assert report.k == 32
    assert report.kstar is None
    assert report.ell == 1024
    assert report.q == 0.5
    assert report.n == len(stream)
    assert report.N == oracle.total_weight
    assert report.seed == 5
    assert report.repeat == 2
    assert report.time_s > 0
    assert report.updates_per_s == pytest.approx(report.n / report.time_s)
    assert report.max_err >= 0
    assert report.space_bytes == summary_bytes("smed", 32)
    assert isinstance(summary, Sketch)
    assert summary.size > 0


def test_single_run_med_reports_kstar(small):
    stream, oracle = small
    report, _ = single_run("med", 32, stream, oracle)
    assert report.kstar == 16
    assert report.ell is None
    assert report.q is None


def test_bench_run_seeds_and_mean(small):
    stream, _ = small
    rows = bench_run("smed", 32, stream, seed=5, repeats=3)
    assert [(r.repeat, r.seed) for r in rows] == \
        [(0, 5), (1, 6), (2, 7), ("mean", 5)]
    mean = rows[-1]
    assert mean.time_s == pytest.approx(
        statistics.mean(r.time_s for r in rows[:-1]))
    assert mean.max_err == pytest.approx(
        statistics.mean(r.max_err for r in rows[:-1]))
    assert mean.updates_per_s == pytest.approx(mean.n / mean.time_s)


def test_bench_run_single_repeat_has_no_mean(small):
    stream, _ = small
    rows = bench_run("smed", 32, stream, seed=5, repeats=1)
    assert [r.repeat for r in rows] == [0]


def test_unit_only_algos_reject_weighted_stream(small):
    stream, _ = small
    with pytest.raises(ValueError, match="unit-weight streams only"):
        bench_run("mg", 32, stream, repeats=1)
    with pytest.raises(ValueError, match="rtuc-ss or a weighted"):
        bench_run("ss", 32, stream, repeats=1)


def test_unit_only_algos_accept_unit_stream():
    stream = zipf_stream(ZipfSpec(50, 1.0), 500, Constant(1), 2)
    rows = bench_run("mg", 16, stream, repeats=1)
    assert rows[0].algo == "mg"
    assert rows[0].N == 500


def test_compare_bench_needs_exactly_one_sizing(small):
    stream, _ = small
    with pytest.raises(ValueError, match="exactly one of k and space_budget"):
        compare_bench(["smed"], stream)
    with pytest.raises(ValueError, match="exactly one of k and space_budget"):
        compare_bench(["smed"], stream, k=8, space_budget=100)
    with pytest.raises(ValueError, match="no algorithms selected"):
        compare_bench([], stream, k=8)


def test_compare_bench_rows(small):
    stream, _ = small
    rows = compare_bench(["smed", "rbmc"], stream, k=16, repeats=2)
    assert [(r.algo, r.repeat) for r in rows] == [
        ("smed", 0), ("smed", 1), ("smed", "mean"),
        ("rbmc", 0), ("rbmc", 1), ("rbmc", "mean")]
    assert all(r.k == 16 for r in rows)


def test_compare_bench_space_budget_sizes_each_algo(small):
    stream, _ = small
    rows = compare_bench(["smed", "mhe"], stream, space_budget=73728,
                         repeats=1)
    ks = {r.algo: r.k for r in rows}
    assert ks == {"smed": 3072, "mhe": 1536}
    assert all(r.space_bytes <= 73728 for r in rows)


# -- quantile sweep ----------------------------------------------------------------

def test_quantile_sweep_validation(small):
    stream, _ = small
    with pytest.raises(ValueError, match=r"quantile must lie in \[0, 1\]"):
        quantile_sweep_bench([8], [1.5], stream)
    with pytest.raises(ValueError, match="quantile"):
        quantile_sweep_bench([8], [-0.1], stream)
    with pytest.raises(ValueError, match="no k values given"):
        quantile_sweep_bench([], [0.5], stream)


def test_quantile_sweep_rows(small):
    stream, _ = small
    rows = quantile_sweep_bench([8, 16], [0.0, 0.5], stream, repeats=2)
    combos = [(r.k, r.q, r.repeat) for r in rows]
    assert combos == [
        (8, 0.0, 0), (8, 0.0, 1), (8, 0.0, "mean"),
        (8, 0.5, 0), (8, 0.5, 1), (8, 0.5, "mean"),
        (16, 0.0, 0), (16, 0.0, 1), (16, 0.0, "mean"),
        (16, 0.5, 0), (16, 0.5, 1), (16, 0.5, "mean")]
    assert all(r.algo == "smed" for r in rows)


def test_quantile_sweep_error_grows_with_q():
    # the sampled rank rises with q, so decrements get more aggressive and
    # the final lower-bound error grows; q=0 pays for it in update time
    stream = zipf_stream(ZipfSpec(20000, 1.05), 200_000, UniformInt(1, 100), 11)
    rows = quantile_sweep_bench([1024], [0.0, 0.1, 0.5, 0.7, 0.98], stream,
                                repeats=3)
    means = {r.q: r for r in rows if r.repeat == "mean"}
    errs = [means[q].max_err for q in (0.0, 0.1, 0.5, 0.7, 0.98)]
    assert errs == sorted(errs)
    slowest = max(means.values(), key=lambda r: r.time_s)
    assert slowest.q == 0.0


# -- merge bench --------------------------------------------------------------------

def test_merge_bench_validation():
    with pytest.raises(ValueError, match="unknown merge method 'bogus'"):
        merge_bench(8, 1, ["bogus"])
    with pytest.raises(ValueError, match="pairs must be >= 1"):
        merge_bench(8, 0, ["ours"])


def test_merge_bench_row_semantics():
    rows = merge_bench(64, 2, ["ours", "ach-sort", "ach-qs"],
                       m=2000, n_per=10_000, weight_high=100, seed=0)
    by_algo = {}
    for r in rows:
        by_algo.setdefault(r.algo, []).append(r)
    assert set(by_algo) == {"merge-ours", "merge-ach-sort", "merge-ach-qs"}
    for algo_rows in by_algo.values():
        assert [r.repeat for r in algo_rows] == [0, 1, "mean"]

    ours = by_algo["merge-ours"][0]
    ach = by_algo["merge-ach-sort"][0]
    # ours replays one donor into the other; ach walks both inputs
    assert ach.n > ours.n
    assert ours.decrements >= 0
    assert ach.decrements == 0
    # both describe the same concatenated pair of streams
    assert ours.N == ach.N
    # scratch accounting makes the accumulate-and-select methods bigger
    assert ach.space_bytes > ours.space_bytes
    assert ours.space_bytes == 2 * summary_bytes("smed", 64)
    # same pair, same exact counts, so errors are comparable magnitudes
    assert ours.max_err > 0 and ach.max_err > 0


# -- invariant checkers ---------------------------------------------------------------

@pytest.fixture(scope="module")
def checked():
    stream = zipf_stream(ZipfSpec(200, 1.05), 5000, UniformInt(1, 20), 4)
    oracle = ExactCounts()
    oracle.ingest_many(stream.items, stream.weights)
    sk = Sketch(64, SampledQuantile(128, Fraction(1, 2), 4))
    sk.update_many(stream.items, stream.weights)
    return oracle, sk


def test_verify_bounds_clean(checked):
    oracle, sk = checked
    assert verify_bounds(oracle, sk) == []


def test_verify_bounds_flags_violations(checked):
    oracle, sk = checked

    class Liar:
        def lower_bound(self, i):
            return sk.lower_bound(i) + 10 ** 9

        def lower_bound_many(self, a):
            return sk.lower_bound_many(a) + 10 ** 9

    msgs = verify_bounds(oracle, Liar())
    assert any("exceeds true count" in m for m in msgs)
    assert any("never-seen" in m for m in msgs)

    class Shy:
        def lower_bound(self, i):
            return sk.lower_bound(i)

        def lower_bound_many(self, a):
            return sk.lower_bound_many(a)

        def upper_bound_many(self, a):
            return np.zeros(len(a), dtype=np.int64)

    msgs = verify_bounds(oracle, Shy())
    assert msgs and all("upper bound" in m and "below true count" in m
                        for m in msgs)


def test_verify_containment_clean(checked):
    oracle, sk = checked
    assert verify_containment(oracle, sk) == []


def test_verify_containment_flags_violations():
    oracle = ExactCounts()
    oracle.ingest(1, 100)
    oracle.ingest(2, 1)

    class Mute:
        offset = 0

        def frequent_items(self, mode, threshold):
            return []

    msgs = verify_containment(oracle, Mute(), phis=(0.5,))
    assert msgs and "missing from" in msgs[0]

    class Chatty:
        offset = 0

        def frequent_items(self, mode, threshold):
            return [Row(item=999, lower=50, estimate=60, upper=70)]

    msgs = verify_containment(oracle, Chatty(), phis=(0.5,))
    assert any("spurious" in m for m in msgs)
