"""Tests for Zipf stream generation and the stream file format."""

import numpy as np
import pytest

from freqitems.streamgen import (Constant, Stream, StreamUpdate, UniformInt,
                                 ZipfSpec, read_stream, write_stream,
                                 zipf_probabilities, zipf_stream)


# -- distributions -----------------------------------------------------------

def test_zipf_probabilities_alpha_one():
    p = zipf_probabilities(ZipfSpec(2, 1.0))
    assert np.allclose(p, [2 / 3, 1 / 3])
    assert p.sum() == pytest.approx(1.0)


def test_zipf_probabilities_alpha_zero_is_uniform():
    p = zipf_probabilities(ZipfSpec(3, 0.0))
    assert np.allclose(p, [1 / 3, 1 / 3, 1 / 3])


def test_zipf_probabilities_monotone():
    p = zipf_probabilities(ZipfSpec(50, 1.3))
    assert (np.diff(p) <= 0).all()
    assert p.sum() == pytest.approx(1.0)


def test_zipf_spec_validation():
    with pytest.raises(ValueError, match="universe size must be >= 1"):
        ZipfSpec(0, 1.0)
    with pytest.raises(ValueError, match="alpha must be >= 0"):
        ZipfSpec(5, -0.1)


# -- generation ----------------------------------------------------------------

def test_zipf_stream_deterministic():
    s = zipf_stream(ZipfSpec(10, 1.0), 5, Constant(2), 42)
    assert s.items.tolist() == [5, 2, 7, 4, 1]
    assert s.weights.tolist() == [2, 2, 2, 2, 2]
    again = zipf_stream(ZipfSpec(10, 1.0), 5, Constant(2), 42)
    assert again.items.tolist() == s.items.tolist()
    other = zipf_stream(ZipfSpec(10, 1.0), 5, Constant(2), 43)
    assert other.items.tolist() != s.items.tolist()


def test_zipf_stream_items_within_universe():
    s = zipf_stream(ZipfSpec(7, 1.2), 500, Constant(1), 9)
    assert s.items.min() >= 1
    assert s.items.max() <= 7


def test_zipf_stream_head_frequency():
    # one-sample z-test on the top item's empirical frequency; |z| ~ 0.68
    # for this seed, far inside any sane acceptance band
    spec = ZipfSpec(1000, 1.05)
    n = 100_000
    s = zipf_stream(spec, n, Constant(1), 123)
    p1 = zipf_probabilities(spec)[0]
    observed = (s.items == 1).sum() / n
    z = (observed - p1) / (p1 * (1 - p1) / n) ** 0.5
    assert abs(z) < 4


def test_zipf_stream_empty():
    s = zipf_stream(ZipfSpec(10, 1.0), 0, Constant(1), 1)
    assert len(s) == 0
    assert s.total_weight == 0
    assert list(s) == []


def test_zipf_stream_rejects_negative_n():
    with pytest.raises(ValueError, match="n must be >= 0"):
        zipf_stream(ZipfSpec(5, 1.0), -1, Constant(1), 0)


def test_weight_dists():
    rng = np.random.default_rng(0)
    assert Constant(3).sample(rng, 4).tolist() == [3, 3, 3, 3]
    w = UniformInt(1, 100).sample(rng, 1000)
    assert w.min() >= 1 and w.max() <= 100
    with pytest.raises(ValueError, match="weight must be >= 1"):
        Constant(0)
    with pytest.raises(ValueError, match="need 1 <= low <= high"):
        UniformInt(5, 4)


# -- Stream container ----------------------------------------------------------

def test_stream_iteration_and_totals():
    s = zipf_stream(ZipfSpec(10, 1.0), 5, Constant(2), 42)
    assert len(s) == 5
    assert s.total_weight == 10
    first = next(iter(s))
    assert first == StreamUpdate(item=5, weight=2)


def test_stream_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        Stream(np.array([1], dtype=np.uint64),
               np.array([1, 2], dtype=np.int64))


# -- file format -----------------------------------------------------------------

def test_write_read_round_trip(tmp_path):
    path = tmp_path / "s.txt"
    s = zipf_stream(ZipfSpec(10, 1.0), 5, Constant(2), 42)
    write_stream(s, path)
    text = path.read_text()
    assert text.startswith("# item weight\n")
    assert text == "# item weight\n5 2\n2 2\n7 2\n4 2\n1 2\n"
    r = read_stream(path)
    assert r.items.tolist() == s.items.tolist()
    assert r.weights.tolist() == s.weights.tolist()


def test_read_skips_comments_and_blanks(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("# hello\n\n3 4\n# more\n5 1\n")
    r = read_stream(path)
    assert r.items.tolist() == [3, 5]
    assert r.weights.tolist() == [4, 1]


@pytest.mark.parametrize("line,msg", [
    ("7 0", "weight must be >= 1, got 0"),
    ("7", "expected 'item weight', got '7'"),
    ("x 1", "non-integer field in 'x 1'"),
    ("7 5 9", "expected 'item weight', got '7 5 9'"),
])
def test_read_rejects_malformed_lines(tmp_path, line, msg):
    path = tmp_path / "bad.txt"
    path.write_text(line + "\n")
    with pytest.raises(ValueError, match=f"bad.txt:1: {msg}"):
        read_stream(path)


def test_read_error_reports_correct_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 4\n7 0\n")
    with pytest.raises(ValueError, match="bad.txt:2:"):
        read_stream(path)
