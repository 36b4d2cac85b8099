"""Synthetic weighted streams and the on-disk stream format.

Streams are item/weight array pairs.  Items follow a Zipf law over a
finite universe {1..m} with exponent alpha (probability of rank r
proportional to r**-alpha); weights come from a small family of integer
distributions.  Files hold one "item weight" pair per line, '#' starts
a comment, and parsing is strict: malformed lines are hard errors with
the offending line number.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Iterator, Tuple, Union

import numpy as np


@dataclasses.dataclass(frozen=True)
class Constant:
    """Every update carries the same weight."""

    value: int = 1

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError(f"weight must be >= 1, got {self.value}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value, dtype=np.int64)


@dataclasses.dataclass(frozen=True)
class UniformInt:
    """Weights drawn uniformly from [low, high] inclusive."""

    low: int
    high: int

    def __post_init__(self) -> None:
        if not 1 <= self.low <= self.high:
            raise ValueError(f"need 1 <= low <= high, got [{self.low}, {self.high}]")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(self.low, self.high + 1, size=n, dtype=np.int64)


WeightDist = Union[Constant, UniformInt]


@dataclasses.dataclass(frozen=True)
class ZipfSpec:
    """Finite Zipf universe: m items, exponent alpha."""

    m: int
    alpha: float

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"universe size must be >= 1, got {self.m}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")


@dataclasses.dataclass(frozen=True)
class StreamUpdate:
    item: int
    weight: int


@dataclasses.dataclass
class Stream:
    """A materialized stream of n weighted updates."""

    items: np.ndarray    # uint64, shape (n,)
    weights: np.ndarray  # int64,  shape (n,)

    def __post_init__(self) -> None:
        if len(self.items) != len(self.weights):
            raise ValueError("items and weights length mismatch")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[StreamUpdate]:
        for it, w in zip(self.items.tolist(), self.weights.tolist()):
            yield StreamUpdate(int(it), int(w))

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())


def zipf_probabilities(spec: ZipfSpec) -> np.ndarray:
    """Normalized rank probabilities for the finite universe.

    m=2, alpha=1 gives [2/3, 1/3].
    """
    ranks = np.arange(1, spec.m + 1, dtype=np.float64)
    raw = ranks ** (-spec.alpha)
    return raw / raw.sum()


def zipf_stream(
    spec: ZipfSpec,
    n: int,
    weight_dist: WeightDist,
    seed: int,
) -> Stream:
    """n i.i.d. draws from the Zipf law, weights from weight_dist.

    Item ids are the ranks 1..m themselves, so rank 1 is both the most
    likely item and the smallest id.  Sampling inverts the CDF with
    searchsorted; identical (spec, n, weight_dist, seed) always yields
    the identical stream.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(zipf_probabilities(spec))
    cdf[-1] = 1.0  # guard against float round-down at the top
    u = rng.random(n)
    items = (np.searchsorted(cdf, u, side="right") + 1).astype(np.uint64)
    weights = weight_dist.sample(rng, n)
    return Stream(items=items, weights=weights)


def write_stream(stream: Stream, path: Union[str, Path]) -> None:
    path = Path(path)
    with path.open("w", encoding="ascii") as fh:
        fh.write("# item weight\n")
        for it, w in zip(stream.items.tolist(), stream.weights.tolist()):
            fh.write(f"{it} {w}\n")


def read_stream(path: Union[str, Path]) -> Stream:
    """Parse a stream file; malformed input raises with the line number."""
    path = Path(path)
    items = []
    weights = []
    with path.open("r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'item weight', got {raw.rstrip()!r}")
            try:
                item = int(parts[0])
                weight = int(parts[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-integer field in {raw.rstrip()!r}") from None
            if item < 0:
                raise ValueError(f"{path}:{lineno}: item must be >= 0, got {item}")
            if weight < 1:
                raise ValueError(f"{path}:{lineno}: weight must be >= 1, got {weight}")
            items.append(item)
            weights.append(weight)
    return Stream(
        items=np.array(items, dtype=np.uint64),
        weights=np.array(weights, dtype=np.int64),
    )
