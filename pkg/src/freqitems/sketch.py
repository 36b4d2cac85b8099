"""Weighted frequent-items sketch with rank-selected bulk decrements.

A Sketch holds at most k (item, counter) pairs in a CounterTable.  While
the table has room, an update is a plain counter add.  Once the table is
full and an unassigned item arrives, the sketch picks a decrement value
c* from the current counters, subtracts it from all of them in one pass
(dropping those that fall to zero or below), and inserts the new item
only if its weight delta exceeds c*, with counter delta - c*.

How c* is picked is the strategy:

* ExactRank(k_star): c* is the k_star-th largest counter, found by a
  seeded quickselect over a scratch copy of the counts.  Every decrement
  removes at least k_star entries, so decrements happen at most once per
  k_star updates, and the estimation error after weight N is at most
  (N - C) / k_star for C the weight still on the table.
* SampledQuantile(ell, q, rng_seed): c* is the floor(q * (s-1))-th
  smallest of s = min(ell, size) counters sampled uniformly with
  replacement.  With ell = 1024 and q = 1/2 the decrement removes about
  a third of the table with overwhelming probability, so the exact
  rank's guarantees survive with k_star ~ 0.33 k at a fraction of the
  selection cost.  q = 0 decrements by (nearly) the minimum counter.

Point queries come in three flavours built from the running `offset`,
the sum of all decrement values so far: a stored counter c(i) is a lower
bound on the item's true weight, c(i) + offset is an upper bound, and
the estimator returns c(i) + offset for assigned items and 0 otherwise.

Sketches merge by replaying the entries of one table into the other as
ordinary weighted updates, so merging needs no machinery beyond update
and works across capacities and strategies.

The byte format (see serialize) is versioned and little-endian; the
decoder rejects anything that could not have been produced by a valid
sketch rather than guessing.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np
from numba import njit

from . import counter_table as ct
from .rng import MASK64, SplitMix64, mix64, next_below, shuffle_inplace

__all__ = [
    "ExactRank", "SampledQuantile", "ErrorMode", "Row", "Sketch",
    "SketchDecodeError", "SERIAL_VERSION",
]

DEFAULT_SKETCH_SEED = 0xD1B54A32D192ED03

# Salts separating the seed streams derived from one master seed.
_SALT_TABLE = 0x8CB92BA72F3D8DD7
_SALT_SELECT = 0xABCC79D1025FD4F5
_SALT_MERGE = 0x6A09E667F3BCC909

_MODE_EXACT = 0
_MODE_SAMPLED = 1

SERIAL_VERSION = 1
_MAGIC = b"FQSK"
_TAG_EXACT = 0
_TAG_SAMPLED = 1

_HEADER = struct.Struct("<4sBBI")
_EXACT_BLOCK = struct.Struct("<I")
_SAMPLED_BLOCK = struct.Struct("<IHH")
_TAIL = struct.Struct("<QqqI")
_ENTRY_DTYPE = np.dtype([("item", "<u8"), ("count", "<i8")])

QuantileLike = Union[Fraction, float, int, str]


def _as_quantile(q: QuantileLike) -> Fraction:
    """Coerce q to an exact rational in [0, 1] with a u16 denominator."""
    if isinstance(q, float):
        frac = Fraction(repr(q))
    else:
        frac = Fraction(q)
    if not 0 <= frac <= 1:
        raise ValueError(f"quantile must be in [0, 1], got {q}")
    if frac.denominator > 0xFFFF:
        raise ValueError(
            f"quantile {q} needs denominator {frac.denominator} > 65535; "
            "pass an exact Fraction or decimal string"
        )
    return frac


@dataclass(frozen=True)
class ExactRank:
    """Decrement by the k_star-th largest counter (counting multiplicity)."""

    k_star: int

    def validate(self, k: int) -> None:
        if not 1 <= self.k_star <= k:
            raise ValueError(f"k_star must be in [1, k={k}], got {self.k_star}")


@dataclass(frozen=True)
class SampledQuantile:
    """Decrement by a quantile of a with-replacement counter sample."""

    ell: int
    q: Fraction
    rng_seed: int

    def __init__(self, ell: int, q: QuantileLike, rng_seed: int) -> None:
        object.__setattr__(self, "ell", ell)
        object.__setattr__(self, "q", _as_quantile(q))
        object.__setattr__(self, "rng_seed", rng_seed)

    def validate(self, k: int) -> None:
        if self.ell < 1:
            raise ValueError(f"sample size ell must be >= 1, got {self.ell}")
        if not 0 <= self.rng_seed <= MASK64:
            raise ValueError(f"rng_seed out of uint64 range: {self.rng_seed}")


Strategy = Union[ExactRank, SampledQuantile]


class ErrorMode(enum.Enum):
    """Which side of the frequency bound a frequent-items query honours."""

    NO_FALSE_NEGATIVES = "no_false_negatives"
    NO_FALSE_POSITIVES = "no_false_positives"


@dataclass(frozen=True)
class Row:
    """One frequent-items result: item with its estimate and both bounds."""

    item: int
    estimate: int
    lower: int
    upper: int


class SketchDecodeError(ValueError):
    """Raised when bytes cannot be decoded into a valid sketch."""


@njit(cache=True)
def _select_rank(values, rank, rng_state):
    """rank-th smallest element of values (0-based); mutates values.

    Quickselect with a random pivot and three-way partition, so heavy
    duplicate counts (common after decrements) stay linear.
    """
    lo = np.int64(0)
    hi = np.int64(values.shape[0] - 1)
    while lo < hi:
        pivot = values[lo + next_below(rng_state, hi - lo + 1)]
        lt = lo
        gt = hi
        i = lo
        while i <= gt:
            v = values[i]
            if v < pivot:
                values[i] = values[lt]
                values[lt] = v
                lt += 1
                i += 1
            elif v > pivot:
                values[i] = values[gt]
                values[gt] = v
                gt -= 1
            else:
                i += 1
        if rank < lt:
            hi = lt - 1
        elif rank > gt:
            lo = gt + 1
        else:
            return pivot
    return values[lo]


@njit(cache=True)
def _select_decrement(counts, states, mask, size, rng_state,
                      mode, k_star, ell, q_num, q_den):
    """Choose c* from a full table according to the strategy fields."""
    if mode == _MODE_EXACT:
        scratch = np.empty(size, dtype=np.int64)
        ct._collect_counts(counts, states, scratch)
        rank = size - k_star
    else:
        s = min(ell, size)
        scratch = np.empty(s, dtype=np.int64)
        ct._sample_counts(counts, states, mask, size, ell, rng_state, scratch)
        rank = (q_num * (s - 1)) // q_den
    return _select_rank(scratch, rank, rng_state)


@njit(cache=True)
def _update_one(keys, counts, states, mask, seed, k, tmeta, smeta, rng_state,
                mode, k_star, ell, q_num, q_den, item, delta):
    """Single weighted update.  smeta = [offset, stream_weight, decrements]."""
    if smeta[1] > ct._INT64_MAX - delta:
        return ct.ERR_WEIGHT_OVERFLOW
    smeta[1] += delta
    slot = ct._find_slot(keys, states, mask, seed, item)
    if slot >= 0:
        if counts[slot] > ct._INT64_MAX - delta:
            return ct.ERR_COUNT_OVERFLOW
        counts[slot] += delta
        return ct.OK
    if tmeta[0] < k:
        if ct._insert_new(keys, counts, states, mask, seed, item, delta) < 0:
            return ct.ERR_DISPLACEMENT
        tmeta[0] += 1
        return ct.OK
    c_star = _select_decrement(counts, states, mask, tmeta[0], rng_state,
                               mode, k_star, ell, q_num, q_den)
    ct._decrement_and_compact(keys, counts, states, mask, seed, tmeta, c_star)
    smeta[0] += c_star
    smeta[2] += 1
    remainder = delta - c_star
    if remainder > 0:
        if ct._insert_new(keys, counts, states, mask, seed, item, remainder) < 0:
            return ct.ERR_DISPLACEMENT
        tmeta[0] += 1
    return ct.OK


@njit(cache=True)
def _update_many(keys, counts, states, mask, seed, k, tmeta, smeta, rng_state,
                 mode, k_star, ell, q_num, q_den, items, deltas):
    """Batch of weighted updates; returns (status, offending index | -1)."""
    for i in range(items.shape[0]):
        status = _update_one(keys, counts, states, mask, seed, k, tmeta, smeta,
                             rng_state, mode, k_star, ell, q_num, q_den,
                             items[i], deltas[i])
        if status != ct.OK:
            return status, np.int64(i)
    return ct.OK, np.int64(-1)


class Sketch:
    """Bounded-memory weighted heavy-hitters summary.  See module docstring."""

    __slots__ = ("k", "strategy", "table", "_smeta", "_rng", "_seed",
                 "_mode", "_k_star", "_ell", "_q_num", "_q_den")

    def __init__(self, k: int, strategy: Strategy, *,
                 seed: Optional[int] = None) -> None:
        if k < 1:
            raise ValueError(f"capacity k must be >= 1, got {k}")
        strategy.validate(k)
        if seed is None:
            seed = strategy.rng_seed if isinstance(strategy, SampledQuantile) \
                else DEFAULT_SKETCH_SEED
        self.k = k
        self.strategy = strategy
        self._seed = seed & MASK64
        self.table = ct.CounterTable(k, hash_seed=mix64(self._seed ^ _SALT_TABLE))
        # offset, stream_weight, decrement_count
        self._smeta = np.zeros(3, dtype=np.int64)
        self._rng = SplitMix64(mix64(self._seed ^ _SALT_SELECT))
        if isinstance(strategy, ExactRank):
            self._mode = _MODE_EXACT
            self._k_star = np.int64(strategy.k_star)
            self._ell = np.int64(0)
            self._q_num = np.int64(0)
            self._q_den = np.int64(1)
        else:
            self._mode = _MODE_SAMPLED
            self._k_star = np.int64(0)
            self._ell = np.int64(strategy.ell)
            self._q_num = np.int64(strategy.q.numerator)
            self._q_den = np.int64(strategy.q.denominator)

    # -- properties ------------------------------------------------------

    @property
    def size(self) -> int:
        return self.table.size

    @property
    def offset(self) -> int:
        return int(self._smeta[0])

    @property
    def stream_weight(self) -> int:
        return int(self._smeta[1])

    @property
    def decrement_count(self) -> int:
        return int(self._smeta[2])

    @property
    def seed(self) -> int:
        return self._seed

    # -- updates ---------------------------------------------------------

    def update(self, item: int, delta: int) -> None:
        """Fold one weighted occurrence of item into the sketch."""
        t = self.table
        status = _update_one(
            t._keys, t._counts, t._states, t._mask, t._seed, np.int64(self.k),
            t._meta, self._smeta, self._rng.state,
            self._mode, self._k_star, self._ell, self._q_num, self._q_den,
            ct._check_item(item), ct._check_delta(delta),
        )
        if status != ct.OK:
            ct.raise_kernel_error(status, "update")

    def update_many(self, items: np.ndarray, deltas: np.ndarray) -> None:
        """Fold a whole stream prefix (arrays of equal length) into the sketch."""
        items = np.ascontiguousarray(items, dtype=np.uint64)
        deltas = np.ascontiguousarray(deltas, dtype=np.int64)
        if items.shape != deltas.shape:
            raise ValueError("items and deltas must have equal length")
        if deltas.size and deltas.min() < 1:
            raise ValueError("weights must be >= 1")
        t = self.table
        status, index = _update_many(
            t._keys, t._counts, t._states, t._mask, t._seed, np.int64(self.k),
            t._meta, self._smeta, self._rng.state,
            self._mode, self._k_star, self._ell, self._q_num, self._q_den,
            items, deltas,
        )
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def select_decrement_value(self) -> int:
        """The c* the strategy would pick right now; table must be full.

        Advances the selection RNG for sampled strategies.
        """
        if self.size < self.k:
            raise ValueError("decrement selection requires a full table")
        t = self.table
        return int(_select_decrement(
            t._counts, t._states, t._mask, np.int64(self.size), self._rng.state,
            self._mode, self._k_star, self._ell, self._q_num, self._q_den,
        ))

    # -- queries ---------------------------------------------------------

    def lower_bound(self, item: int) -> int:
        """Weight certainly seen for item: its counter, or 0 if unassigned."""
        c = self.table.lookup(item)
        return c if c is not None else 0

    def upper_bound(self, item: int) -> int:
        """Largest weight item could have: counter + offset (offset alone
        when unassigned).

        Covers the weight fed through this sketch's own update path.  A
        merge replays the donor's counters, not the weight the donor had
        already decremented away, so after merging the bound can fall
        short of the concatenated-stream frequency by up to the donor's
        offset.  The lower bound needs no such caveat.
        """
        c = self.table.lookup(item)
        return (c if c is not None else 0) + self.offset

    def estimate(self, item: int) -> int:
        """Point estimate: counter + offset for assigned items, else 0."""
        c = self.table.lookup(item)
        return c + self.offset if c is not None else 0

    def lower_bound_many(self, items: np.ndarray) -> np.ndarray:
        raw = self.table.lookup_many(items)
        return np.where(raw >= 0, raw, 0)

    def upper_bound_many(self, items: np.ndarray) -> np.ndarray:
        raw = self.table.lookup_many(items)
        return np.where(raw >= 0, raw + self.offset, self.offset)

    def estimate_many(self, items: np.ndarray) -> np.ndarray:
        raw = self.table.lookup_many(items)
        return np.where(raw >= 0, raw + self.offset, 0)

    def frequent_items(self, mode: ErrorMode,
                       threshold: Union[int, float, Fraction]) -> list[Row]:
        """Assigned items whose bound clears threshold, best estimate first.

        NO_FALSE_NEGATIVES admits an item when its upper bound clears the
        threshold (every true heavy item is assigned once threshold >
        offset, so none is missed); NO_FALSE_POSITIVES requires the lower
        bound to clear it (everything returned truly qualifies).
        """
        mode = ErrorMode(mode)
        if threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {threshold}")
        items, counts = self.table.entries()
        offset = self.offset
        rows = []
        for item, c in zip(items.tolist(), counts.tolist()):
            qualifies = (c + offset >= threshold) \
                if mode is ErrorMode.NO_FALSE_NEGATIVES else (c >= threshold)
            if qualifies:
                rows.append(Row(item=item, estimate=c + offset,
                                lower=c, upper=c + offset))
        rows.sort(key=lambda r: (-r.estimate, r.item))
        return rows

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.table)

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self.table.entries()

    # -- merge -----------------------------------------------------------

    def merge(self, other: "Sketch") -> "Sketch":
        """Fold other into self by replaying its entries as updates.

        When both tables hash with the same seed, replay order is a
        seeded shuffle: slot order would correlate with the shared hash
        function and bias which survivors collide.  The merged stream
        weight is the sum of both inputs' stream weights (the replay
        itself only adds the weight still on other's table).  `other` is
        left untouched but is logically consumed: its content is now
        accounted for in self.
        """
        n1 = self.stream_weight
        n2 = other.stream_weight
        if n1 > ct.INT64_MAX - n2:
            raise OverflowError("merged stream weight would exceed int64")
        items, counts = other.table.entries()
        if items.size and self.table.hash_seed == other.table.hash_seed:
            order = np.arange(items.size, dtype=np.int64)
            shuffle_inplace(order, SplitMix64(
                mix64(self.table.hash_seed ^ _SALT_MERGE)).state)
            items = items[order]
            counts = counts[order]
        if items.size:
            self.update_many(items, counts)
        self._smeta[1] = n1 + n2
        return self

    # -- serialization ---------------------------------------------------

    def serialize(self) -> bytes:
        """Versioned little-endian byte encoding of the sketch state."""
        if isinstance(self.strategy, ExactRank):
            tag = _TAG_EXACT
            block = _EXACT_BLOCK.pack(self.strategy.k_star)
        else:
            tag = _TAG_SAMPLED
            block = _SAMPLED_BLOCK.pack(self.strategy.ell,
                                        self.strategy.q.numerator,
                                        self.strategy.q.denominator)
        items, counts = self.table.entries()
        entries = np.empty(items.size, dtype=_ENTRY_DTYPE)
        entries["item"] = items
        entries["count"] = counts
        return b"".join([
            _HEADER.pack(_MAGIC, SERIAL_VERSION, tag, self.k),
            block,
            _TAIL.pack(self._seed, self.offset, self.stream_weight, items.size),
            entries.tobytes(),
        ])

    @classmethod
    def deserialize(cls, data: bytes) -> "Sketch":
        """Inverse of serialize; rejects malformed or invalid payloads."""
        view = memoryview(data)

        def take(n: int, what: str) -> memoryview:
            nonlocal view
            if len(view) < n:
                raise SketchDecodeError(f"truncated payload reading {what}")
            head, view = view[:n], view[n:]
            return head

        magic, version, tag, k = _HEADER.unpack(take(_HEADER.size, "header"))
        if magic != _MAGIC:
            raise SketchDecodeError(f"bad magic {magic!r}")
        if version != SERIAL_VERSION:
            raise SketchDecodeError(f"unsupported version {version}")
        if k < 1:
            raise SketchDecodeError(f"invalid capacity {k}")
        if tag == _TAG_EXACT:
            (k_star,) = _EXACT_BLOCK.unpack(take(_EXACT_BLOCK.size, "strategy"))
            strategy: Strategy = ExactRank(k_star=k_star)
        elif tag == _TAG_SAMPLED:
            ell, q_num, q_den = _SAMPLED_BLOCK.unpack(take(_SAMPLED_BLOCK.size,
                                                           "strategy"))
            if q_den == 0 or q_num > q_den:
                raise SketchDecodeError(f"invalid quantile {q_num}/{q_den}")
            strategy = SampledQuantile(ell=ell, q=Fraction(q_num, q_den),
                                       rng_seed=0)  # replaced below
        else:
            raise SketchDecodeError(f"unknown strategy tag {tag}")
        seed, offset, stream_weight, n_entries = _TAIL.unpack(
            take(_TAIL.size, "totals"))
        if tag == _TAG_SAMPLED:
            strategy = SampledQuantile(ell=strategy.ell, q=strategy.q,
                                       rng_seed=seed)
        if offset < 0:
            raise SketchDecodeError(f"negative offset {offset}")
        if stream_weight < 0:
            raise SketchDecodeError(f"negative stream weight {stream_weight}")
        if n_entries > k:
            raise SketchDecodeError(f"{n_entries} entries exceed capacity {k}")
        body = take(n_entries * _ENTRY_DTYPE.itemsize, "entries")
        if len(view):
            raise SketchDecodeError(f"{len(view)} trailing bytes")
        try:
            sketch = cls(k, strategy, seed=seed)
        except ValueError as exc:
            raise SketchDecodeError(str(exc)) from None
        if n_entries:
            entries = np.frombuffer(body, dtype=_ENTRY_DTYPE)
            counts = entries["count"]
            if counts.min() <= 0:
                raise SketchDecodeError("non-positive counter in payload")
            items = entries["item"]
            if np.unique(items).size != items.size:
                raise SketchDecodeError("duplicate item in payload")
            sketch.table.bulk_add(items, counts.astype(np.int64))
        sketch._smeta[0] = offset
        sketch._smeta[1] = stream_weight
        return sketch

    def copy(self) -> "Sketch":
        dup = object.__new__(Sketch)
        dup.k = self.k
        dup.strategy = self.strategy
        dup._seed = self._seed
        dup.table = self.table.copy()
        dup._smeta = self._smeta.copy()
        dup._rng = self._rng.copy()
        dup._mode = self._mode
        dup._k_star = self._k_star
        dup._ell = self._ell
        dup._q_num = self._q_num
        dup._q_den = self._q_den
        return dup
