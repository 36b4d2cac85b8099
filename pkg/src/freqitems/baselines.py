"""Comparison algorithms: the classical counter summaries and merges.

Everything here exists so the sketch can be benchmarked against honest
implementations of the prior art:

* MGSummary      unit-weight decrement-all-by-one summary.
* SSSummary      unit-weight overwrite-the-minimum summary.
* MHESummary     weighted extension of SSSummary via a min-heap.
* RBMCSummary    weighted decrement-by-the-minimum-counter summary.
* RTUCMGSummary / RTUCSSSummary   weighted adapters that expand each
  update of weight d into d unit updates (oracle use; d is capped).
* ach_merge_sort / ach_merge_quickselect   two-summary merge through a
  2k scratch table followed by top-k selection.

MGSummary and RBMCSummary reuse the CounterTable kernels.  SSSummary and
MHESummary share one engine: an open-addressing table mapping items to
positions in an array-backed min-heap of counts, with back-references so
heap swaps and table deletions keep each other consistent.  SSSummary is
that engine restricted to unit updates, which pins down min-ties (always
the heap root) identically for both.

Estimates follow each family's convention: MG-style summaries return the
stored counter (0 when absent) and never overestimate; SS-style
summaries return the stored counter or, for unassigned items, the
minimum counter, and never underestimate.  RBMCSummary also exposes
lower/upper/estimate in the sketch's offset style so error comparisons
can use identical estimator semantics.
"""

from __future__ import annotations

from typing import Iterator, Optional

import numpy as np
from numba import njit

from . import counter_table as ct
from .counter_table import CounterTable, UpsertStatus
from .rng import MASK64

__all__ = [
    "MGSummary", "SSSummary", "MHESummary", "RBMCSummary",
    "RTUCMGSummary", "RTUCSSSummary", "rtuc_update", "RTUC_DELTA_CAP",
    "ach_merge_sort", "ach_merge_quickselect",
]

# Unit-expansion beyond this would silently turn one update into more
# than a million; treat it as a misuse instead.
RTUC_DELTA_CAP = 10**6

_INT64_MAX = ct._INT64_MAX


# ---------------------------------------------------------------------------
# MG: decrement every counter by one when a new item finds no room.

@njit(cache=True)
def _mg_update_many(keys, counts, states, mask, seed, k, tmeta, gmeta, items):
    """Unit updates; gmeta[0] counts decrement rounds."""
    one = np.int64(1)
    for i in range(items.shape[0]):
        status, _ = ct._upsert_add(keys, counts, states, mask, seed, k,
                                   tmeta, items[i], one)
        if status == ct.ST_FULL:
            ct._decrement_and_compact(keys, counts, states, mask, seed,
                                      tmeta, one)
            gmeta[0] += 1
        elif status != ct.ST_ADDED and status != ct.ST_INSERTED:
            return status, np.int64(i)
    return ct.OK, np.int64(-1)


class MGSummary:
    """Unit-stream summary that undercounts by at most N/(k+1).

    A full table plus an unassigned arrival decrements every counter by
    one and drops the arrival; zeros are compacted away.  Estimates are
    the stored counter or 0, always a lower bound on the true count.
    """

    __slots__ = ("table", "_gmeta")

    def __init__(self, k: int, hash_seed: int = ct.DEFAULT_HASH_SEED) -> None:
        self.table = CounterTable(k, hash_seed=hash_seed)
        self._gmeta = np.zeros(1, dtype=np.int64)

    @property
    def k(self) -> int:
        return self.table.capacity

    @property
    def size(self) -> int:
        return self.table.size

    @property
    def decrement_count(self) -> int:
        return int(self._gmeta[0])

    def update(self, item: int) -> None:
        status, _ = self.table.upsert_add(item, 1)
        if status is UpsertStatus.FULL:
            self.table.decrement_and_compact(1)
            self._gmeta[0] += 1

    def update_many(self, items: np.ndarray) -> None:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        t = self.table
        status, index = _mg_update_many(
            t._keys, t._counts, t._states, t._mask, t._seed,
            np.int64(t.capacity), t._meta, self._gmeta, items)
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def estimate(self, item: int) -> int:
        c = self.table.lookup(item)
        return c if c is not None else 0

    def estimate_many(self, items: np.ndarray) -> np.ndarray:
        raw = self.table.lookup_many(items)
        return np.where(raw >= 0, raw, 0)

    # Estimates never exceed true frequencies, so they are their own
    # lower bounds; the aliases give every summary a uniform interface.
    lower_bound = estimate
    lower_bound_many = estimate_many

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self.table.entries()

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.table)

    def copy(self) -> "MGSummary":
        dup = object.__new__(MGSummary)
        dup.table = self.table.copy()
        dup._gmeta = self._gmeta.copy()
        return dup


# ---------------------------------------------------------------------------
# Min-heap engine shared by SSSummary (unit) and MHESummary (weighted).

@njit(cache=True, inline="always")
def _heap_swap(hcnt, hitem, hslot, hpos, p1, p2):
    c = hcnt[p1]
    hcnt[p1] = hcnt[p2]
    hcnt[p2] = c
    it = hitem[p1]
    hitem[p1] = hitem[p2]
    hitem[p2] = it
    s = hslot[p1]
    hslot[p1] = hslot[p2]
    hslot[p2] = s
    hpos[hslot[p1]] = p1
    hpos[hslot[p2]] = p2


@njit(cache=True)
def _sift_down(hcnt, hitem, hslot, hpos, size, p):
    while True:
        left = 2 * p + 1
        right = left + 1
        smallest = p
        if left < size and hcnt[left] < hcnt[smallest]:
            smallest = left
        if right < size and hcnt[right] < hcnt[smallest]:
            smallest = right
        if smallest == p:
            return
        _heap_swap(hcnt, hitem, hslot, hpos, p, smallest)
        p = smallest


@njit(cache=True)
def _sift_up(hcnt, hitem, hslot, hpos, p):
    while p > 0:
        parent = (p - 1) // 2
        if hcnt[p] >= hcnt[parent]:
            return
        _heap_swap(hcnt, hitem, hslot, hpos, p, parent)
        p = parent


@njit(cache=True)
def _mhe_table_insert(keys, hpos, states, mask, seed, item, heap_pos):
    h = ct._home_slot(item, seed, mask)
    d = np.int64(0)
    while states[h] != 0:
        h = (h + 1) & mask
        d += 1
    if d + 1 > ct.MAX_DISPLACEMENT:
        return np.int64(ct.ERR_DISPLACEMENT)
    keys[h] = item
    hpos[h] = heap_pos
    states[h] = d + 1
    return h


@njit(cache=True)
def _mhe_table_delete(keys, hpos, states, mask, hslot, slot):
    """Backward-shift removal; moved entries re-point their heap nodes."""
    cur = slot
    while True:
        nxt = (cur + 1) & mask
        if states[nxt] <= 1:
            states[cur] = 0
            return
        keys[cur] = keys[nxt]
        hpos[cur] = hpos[nxt]
        states[cur] = states[nxt] - np.uint16(1)
        hslot[hpos[cur]] = cur
        cur = nxt


@njit(cache=True)
def _mhe_update_one(keys, hpos, states, mask, seed, k,
                    hcnt, hitem, hslot, meta, item, delta):
    """meta = [size, stream_weight, evictions]."""
    if meta[1] > _INT64_MAX - delta:
        return ct.ERR_WEIGHT_OVERFLOW
    meta[1] += delta
    slot = ct._find_slot(keys, states, mask, seed, item)
    if slot >= 0:
        p = hpos[slot]
        if hcnt[p] > _INT64_MAX - delta:
            return ct.ERR_COUNT_OVERFLOW
        hcnt[p] += delta
        _sift_down(hcnt, hitem, hslot, hpos, meta[0], p)
        return ct.OK
    if meta[0] < k:
        p = meta[0]
        slot = _mhe_table_insert(keys, hpos, states, mask, seed, item, p)
        if slot < 0:
            return ct.ERR_DISPLACEMENT
        hcnt[p] = delta
        hitem[p] = item
        hslot[p] = slot
        meta[0] += 1
        _sift_up(hcnt, hitem, hslot, hpos, p)
        return ct.OK
    # Full: the root holds the minimum counter; its item is replaced and
    # the newcomer inherits min + delta.
    if hcnt[0] > _INT64_MAX - delta:
        return ct.ERR_COUNT_OVERFLOW
    new_count = hcnt[0] + delta
    _mhe_table_delete(keys, hpos, states, mask, hslot, hslot[0])
    slot = _mhe_table_insert(keys, hpos, states, mask, seed, item, 0)
    if slot < 0:
        return ct.ERR_DISPLACEMENT
    hcnt[0] = new_count
    hitem[0] = item
    hslot[0] = slot
    meta[2] += 1
    _sift_down(hcnt, hitem, hslot, hpos, meta[0], 0)
    return ct.OK


@njit(cache=True)
def _mhe_update_many(keys, hpos, states, mask, seed, k,
                     hcnt, hitem, hslot, meta, items, deltas):
    for i in range(items.shape[0]):
        status = _mhe_update_one(keys, hpos, states, mask, seed, k,
                                 hcnt, hitem, hslot, meta, items[i], deltas[i])
        if status != ct.OK:
            return status, np.int64(i)
    return ct.OK, np.int64(-1)


@njit(cache=True)
def _mhe_unit_update_many(keys, hpos, states, mask, seed, k,
                          hcnt, hitem, hslot, meta, items):
    one = np.int64(1)
    for i in range(items.shape[0]):
        status = _mhe_update_one(keys, hpos, states, mask, seed, k,
                                 hcnt, hitem, hslot, meta, items[i], one)
        if status != ct.OK:
            return status, np.int64(i)
    return ct.OK, np.int64(-1)


@njit(cache=True)
def _mhe_estimate_many(keys, hpos, states, mask, seed, hcnt, size, items, out):
    for i in range(items.shape[0]):
        slot = ct._find_slot(keys, states, mask, seed, items[i])
        if slot >= 0:
            out[i] = hcnt[hpos[slot]]
        elif size > 0:
            out[i] = hcnt[0]
        else:
            out[i] = 0


@njit(cache=True)
def _mhe_lower_many(keys, hpos, states, mask, seed, hcnt, size, items, out):
    # c(i) - root undoes the worst-case inherited overcount; the root
    # never decreases, so the inherited overcount is at most its value.
    root = hcnt[0] if size > 0 else np.int64(0)
    for i in range(items.shape[0]):
        slot = ct._find_slot(keys, states, mask, seed, items[i])
        if slot >= 0:
            c = hcnt[hpos[slot]] - root
            out[i] = c if c > 0 else 0
        else:
            out[i] = 0


class MHESummary:
    """Weighted overwrite-the-minimum summary over a back-referenced heap.

    Assigned items accumulate weight in place; an unassigned arrival on a
    full summary replaces the minimum counter's item and inherits
    min + delta.  Estimates never underestimate: unassigned items report
    the minimum counter.
    """

    __slots__ = ("k", "table_len", "hash_seed", "_mask", "_seed",
                 "_keys", "_hpos", "_states", "_hcnt", "_hitem", "_hslot",
                 "_meta")

    def __init__(self, k: int, hash_seed: int = ct.DEFAULT_HASH_SEED) -> None:
        self.table_len = ct.table_len_for(k)
        self.k = k
        self.hash_seed = hash_seed & MASK64
        self._mask = np.int64(self.table_len - 1)
        self._seed = np.uint64(self.hash_seed)
        self._keys = np.zeros(self.table_len, dtype=np.uint64)
        self._hpos = np.zeros(self.table_len, dtype=np.int32)
        self._states = np.zeros(self.table_len, dtype=np.uint16)
        self._hcnt = np.zeros(k, dtype=np.int64)
        self._hitem = np.zeros(k, dtype=np.uint64)
        self._hslot = np.zeros(k, dtype=np.int32)
        # size, stream_weight, evictions
        self._meta = np.zeros(3, dtype=np.int64)

    @property
    def size(self) -> int:
        return int(self._meta[0])

    @property
    def stream_weight(self) -> int:
        return int(self._meta[1])

    @property
    def eviction_count(self) -> int:
        return int(self._meta[2])

    def min_count(self) -> int:
        return int(self._hcnt[0]) if self.size else 0

    def update(self, item: int, delta: int) -> None:
        status = _mhe_update_one(
            self._keys, self._hpos, self._states, self._mask, self._seed,
            np.int64(self.k), self._hcnt, self._hitem, self._hslot, self._meta,
            ct._check_item(item), ct._check_delta(delta))
        if status != ct.OK:
            ct.raise_kernel_error(status, "update")

    def update_many(self, items: np.ndarray, deltas: np.ndarray) -> None:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        deltas = np.ascontiguousarray(deltas, dtype=np.int64)
        if items.shape != deltas.shape:
            raise ValueError("items and deltas must have equal length")
        if deltas.size and deltas.min() < 1:
            raise ValueError("weights must be >= 1")
        status, index = _mhe_update_many(
            self._keys, self._hpos, self._states, self._mask, self._seed,
            np.int64(self.k), self._hcnt, self._hitem, self._hslot, self._meta,
            items, deltas)
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def estimate(self, item: int) -> int:
        out = self.estimate_many(np.array([item], dtype=np.uint64))
        return int(out[0])

    def estimate_many(self, items: np.ndarray) -> np.ndarray:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        out = np.empty(items.shape[0], dtype=np.int64)
        _mhe_estimate_many(self._keys, self._hpos, self._states, self._mask,
                           self._seed, self._hcnt, np.int64(self.size),
                           items, out)
        return out

    def lower_bound(self, item: int) -> int:
        out = self.lower_bound_many(np.array([item], dtype=np.uint64))
        return int(out[0])

    def lower_bound_many(self, items: np.ndarray) -> np.ndarray:
        """max(0, c(i) - root count): counts inherit at most the root's
        value from the counter they overwrote, and the root only grows."""
        items = np.ascontiguousarray(items, dtype=np.uint64)
        out = np.empty(items.shape[0], dtype=np.int64)
        _mhe_lower_many(self._keys, self._hpos, self._states, self._mask,
                        self._seed, self._hcnt, np.int64(self.size),
                        items, out)
        return out

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        """(items, counts) in heap-array order."""
        n = self.size
        return self._hitem[:n].copy(), self._hcnt[:n].copy()

    def __iter__(self) -> Iterator[tuple[int, int]]:
        items, counts = self.entries()
        return iter([(int(i), int(c)) for i, c in zip(items, counts)])

    def check_consistency(self) -> None:
        """Assert heap order and table/heap back-reference agreement."""
        n = self.size
        for p in range(1, n):
            parent = (p - 1) // 2
            if self._hcnt[parent] > self._hcnt[p]:
                raise AssertionError(f"heap order violated at {p}")
        occupied = np.flatnonzero(self._states != 0)
        if occupied.size != n:
            raise AssertionError("table occupancy disagrees with heap size")
        for p in range(n):
            slot = self._hslot[p]
            if self._states[slot] == 0 or self._hpos[slot] != p \
                    or self._keys[slot] != self._hitem[p]:
                raise AssertionError(f"back-reference broken at heap pos {p}")

    def copy(self) -> "MHESummary":
        dup = object.__new__(MHESummary)
        dup.k = self.k
        dup.table_len = self.table_len
        dup.hash_seed = self.hash_seed
        dup._mask = self._mask
        dup._seed = self._seed
        dup._keys = self._keys.copy()
        dup._hpos = self._hpos.copy()
        dup._states = self._states.copy()
        dup._hcnt = self._hcnt.copy()
        dup._hitem = self._hitem.copy()
        dup._hslot = self._hslot.copy()
        dup._meta = self._meta.copy()
        return dup


class SSSummary:
    """Unit-stream overwrite-the-minimum summary (the heap engine at d=1).

    On a full summary the arriving item takes over the minimum counter
    and adds one, so counters never decrease and their sum equals the
    stream length.  Estimates never underestimate.
    """

    __slots__ = ("_heap",)

    def __init__(self, k: int, hash_seed: int = ct.DEFAULT_HASH_SEED) -> None:
        self._heap = MHESummary(k, hash_seed=hash_seed)

    @property
    def k(self) -> int:
        return self._heap.k

    @property
    def size(self) -> int:
        return self._heap.size

    @property
    def stream_length(self) -> int:
        return self._heap.stream_weight

    @property
    def eviction_count(self) -> int:
        return self._heap.eviction_count

    def update(self, item: int) -> None:
        self._heap.update(item, 1)

    def update_many(self, items: np.ndarray) -> None:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        h = self._heap
        status, index = _mhe_unit_update_many(
            h._keys, h._hpos, h._states, h._mask, h._seed, np.int64(h.k),
            h._hcnt, h._hitem, h._hslot, h._meta, items)
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def estimate(self, item: int) -> int:
        return self._heap.estimate(item)

    def estimate_many(self, items: np.ndarray) -> np.ndarray:
        return self._heap.estimate_many(items)

    def lower_bound(self, item: int) -> int:
        return self._heap.lower_bound(item)

    def lower_bound_many(self, items: np.ndarray) -> np.ndarray:
        return self._heap.lower_bound_many(items)

    def min_count(self) -> int:
        return self._heap.min_count()

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self._heap.entries()

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._heap)

    def copy(self) -> "SSSummary":
        dup = object.__new__(SSSummary)
        dup._heap = self._heap.copy()
        return dup


# ---------------------------------------------------------------------------
# RBMC: decrement everything by the minimum counter (or by delta if smaller).

@njit(cache=True)
def _rbmc_update_one(keys, counts, states, mask, seed, k, tmeta, rmeta,
                     item, delta):
    """rmeta = [offset, stream_weight, decrements]."""
    if rmeta[1] > _INT64_MAX - delta:
        return ct.ERR_WEIGHT_OVERFLOW
    rmeta[1] += delta
    slot = ct._find_slot(keys, states, mask, seed, item)
    if slot >= 0:
        if counts[slot] > _INT64_MAX - delta:
            return ct.ERR_COUNT_OVERFLOW
        counts[slot] += delta
        return ct.OK
    if tmeta[0] < k:
        if ct._insert_new(keys, counts, states, mask, seed, item, delta) < 0:
            return ct.ERR_DISPLACEMENT
        tmeta[0] += 1
        return ct.OK
    c_min = _INT64_MAX
    for j in range(states.shape[0]):
        if states[j] != 0 and counts[j] < c_min:
            c_min = counts[j]
    if delta <= c_min:
        # The arrival is absorbed entirely by the decrement; not inserted.
        ct._decrement_and_compact(keys, counts, states, mask, seed, tmeta,
                                  delta)
        rmeta[0] += delta
        rmeta[2] += 1
        return ct.OK
    ct._decrement_and_compact(keys, counts, states, mask, seed, tmeta, c_min)
    rmeta[0] += c_min
    rmeta[2] += 1
    if ct._insert_new(keys, counts, states, mask, seed, item,
                      delta - c_min) < 0:
        return ct.ERR_DISPLACEMENT
    tmeta[0] += 1
    return ct.OK


@njit(cache=True)
def _rbmc_update_many(keys, counts, states, mask, seed, k, tmeta, rmeta,
                      items, deltas):
    for i in range(items.shape[0]):
        status = _rbmc_update_one(keys, counts, states, mask, seed, k,
                                  tmeta, rmeta, items[i], deltas[i])
        if status != ct.OK:
            return status, np.int64(i)
    return ct.OK, np.int64(-1)


class RBMCSummary:
    """Weighted decrement-by-the-minimum summary.

    A full table plus an unassigned arrival of weight d subtracts
    min(d, c_min) from every counter; the arrival is inserted only when
    d exceeds c_min, with counter d - c_min.  Every such round costs a
    pass over the whole table.  Estimates are the stored counters (so
    they match unit expansion into the decrement-by-one summary and
    never overestimate); the running offset widens them to upper bounds.
    """

    __slots__ = ("table", "_rmeta")

    def __init__(self, k: int, hash_seed: int = ct.DEFAULT_HASH_SEED) -> None:
        self.table = CounterTable(k, hash_seed=hash_seed)
        # offset, stream_weight, decrements
        self._rmeta = np.zeros(3, dtype=np.int64)

    @property
    def k(self) -> int:
        return self.table.capacity

    @property
    def size(self) -> int:
        return self.table.size

    @property
    def offset(self) -> int:
        return int(self._rmeta[0])

    @property
    def stream_weight(self) -> int:
        return int(self._rmeta[1])

    @property
    def decrement_count(self) -> int:
        return int(self._rmeta[2])

    def update(self, item: int, delta: int) -> None:
        t = self.table
        status = _rbmc_update_one(
            t._keys, t._counts, t._states, t._mask, t._seed,
            np.int64(t.capacity), t._meta, self._rmeta,
            ct._check_item(item), ct._check_delta(delta))
        if status != ct.OK:
            ct.raise_kernel_error(status, "update")

    def update_many(self, items: np.ndarray, deltas: np.ndarray) -> None:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        deltas = np.ascontiguousarray(deltas, dtype=np.int64)
        if items.shape != deltas.shape:
            raise ValueError("items and deltas must have equal length")
        if deltas.size and deltas.min() < 1:
            raise ValueError("weights must be >= 1")
        t = self.table
        status, index = _rbmc_update_many(
            t._keys, t._counts, t._states, t._mask, t._seed,
            np.int64(t.capacity), t._meta, self._rmeta, items, deltas)
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def lower_bound(self, item: int) -> int:
        c = self.table.lookup(item)
        return c if c is not None else 0

    def upper_bound(self, item: int) -> int:
        c = self.table.lookup(item)
        return (c if c is not None else 0) + self.offset

    # Estimates are the counter values themselves (0 when unassigned),
    # exactly what unit expansion into the decrement-by-one summary
    # would report.  The offset only widens the upper bound.
    estimate = lower_bound

    def lower_bound_many(self, items: np.ndarray) -> np.ndarray:
        raw = self.table.lookup_many(items)
        return np.where(raw >= 0, raw, 0)

    estimate_many = lower_bound_many

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self.table.entries()

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.table)

    def copy(self) -> "RBMCSummary":
        dup = object.__new__(RBMCSummary)
        dup.table = self.table.copy()
        dup._rmeta = self._rmeta.copy()
        return dup


# ---------------------------------------------------------------------------
# Reduce-to-unit-case adapters.

@njit(cache=True)
def _rtuc_mg_many(keys, counts, states, mask, seed, k, tmeta, gmeta,
                  items, deltas):
    one = np.int64(1)
    for i in range(items.shape[0]):
        item = items[i]
        for _ in range(deltas[i]):
            status, _ = ct._upsert_add(keys, counts, states, mask, seed, k,
                                       tmeta, item, one)
            if status == ct.ST_FULL:
                ct._decrement_and_compact(keys, counts, states, mask, seed,
                                          tmeta, one)
                gmeta[0] += 1
            elif status != ct.ST_ADDED and status != ct.ST_INSERTED:
                return status, np.int64(i)
    return ct.OK, np.int64(-1)


@njit(cache=True)
def _rtuc_ss_many(keys, hpos, states, mask, seed, k, hcnt, hitem, hslot,
                  meta, items, deltas):
    one = np.int64(1)
    for i in range(items.shape[0]):
        item = items[i]
        for _ in range(deltas[i]):
            status = _mhe_update_one(keys, hpos, states, mask, seed, k,
                                     hcnt, hitem, hslot, meta, item, one)
            if status != ct.OK:
                return status, np.int64(i)
    return ct.OK, np.int64(-1)


def _check_rtuc_deltas(deltas: np.ndarray) -> None:
    if deltas.size and int(deltas.max()) > RTUC_DELTA_CAP:
        raise ValueError(
            f"unit expansion of weight {int(deltas.max())} exceeds the "
            f"cap of {RTUC_DELTA_CAP}")


def rtuc_update(summary, item: int, delta: int) -> None:
    """Apply a weighted update to a unit summary as delta unit updates."""
    if not 1 <= delta <= RTUC_DELTA_CAP:
        raise ValueError(
            f"weight must be in [1, {RTUC_DELTA_CAP}] for unit expansion, "
            f"got {delta}")
    for _ in range(delta):
        summary.update(item)


class RTUCMGSummary:
    """MGSummary fed through unit expansion of weighted updates."""

    __slots__ = ("base",)

    def __init__(self, k: int, hash_seed: int = ct.DEFAULT_HASH_SEED) -> None:
        self.base = MGSummary(k, hash_seed=hash_seed)

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def decrement_count(self) -> int:
        return self.base.decrement_count

    def update(self, item: int, delta: int) -> None:
        rtuc_update(self.base, item, delta)

    def update_many(self, items: np.ndarray, deltas: np.ndarray) -> None:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        deltas = np.ascontiguousarray(deltas, dtype=np.int64)
        if deltas.size and deltas.min() < 1:
            raise ValueError("weights must be >= 1")
        _check_rtuc_deltas(deltas)
        t = self.base.table
        status, index = _rtuc_mg_many(
            t._keys, t._counts, t._states, t._mask, t._seed,
            np.int64(t.capacity), t._meta, self.base._gmeta, items, deltas)
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def estimate(self, item: int) -> int:
        return self.base.estimate(item)

    def estimate_many(self, items: np.ndarray) -> np.ndarray:
        return self.base.estimate_many(items)

    lower_bound = estimate
    lower_bound_many = estimate_many

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self.base.entries()

    def copy(self) -> "RTUCMGSummary":
        dup = object.__new__(RTUCMGSummary)
        dup.base = self.base.copy()
        return dup


class RTUCSSSummary:
    """SSSummary fed through unit expansion of weighted updates."""

    __slots__ = ("base",)

    def __init__(self, k: int, hash_seed: int = ct.DEFAULT_HASH_SEED) -> None:
        self.base = SSSummary(k, hash_seed=hash_seed)

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def eviction_count(self) -> int:
        return self.base.eviction_count

    def update(self, item: int, delta: int) -> None:
        rtuc_update(self.base, item, delta)

    def update_many(self, items: np.ndarray, deltas: np.ndarray) -> None:
        items = np.ascontiguousarray(items, dtype=np.uint64)
        deltas = np.ascontiguousarray(deltas, dtype=np.int64)
        if deltas.size and deltas.min() < 1:
            raise ValueError("weights must be >= 1")
        _check_rtuc_deltas(deltas)
        h = self.base._heap
        status, index = _rtuc_ss_many(
            h._keys, h._hpos, h._states, h._mask, h._seed, np.int64(h.k),
            h._hcnt, h._hitem, h._hslot, h._meta, items, deltas)
        if status != ct.OK:
            ct.raise_kernel_error(status, f"update_many at index {index}")

    def estimate(self, item: int) -> int:
        return self.base.estimate(item)

    def estimate_many(self, items: np.ndarray) -> np.ndarray:
        return self.base.estimate_many(items)

    def lower_bound(self, item: int) -> int:
        return self.base.lower_bound(item)

    def lower_bound_many(self, items: np.ndarray) -> np.ndarray:
        return self.base.lower_bound_many(items)

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        return self.base.entries()

    def copy(self) -> "RTUCSSSummary":
        dup = object.__new__(RTUCSSSummary)
        dup.base = self.base.copy()
        return dup


# ---------------------------------------------------------------------------
# Two-summary merge through a 2k scratch table plus top-k selection.

def _accumulate_pair(s1, s2, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Sum both summaries' counters item-wise in a 2k scratch table."""
    scratch = CounterTable(2 * k)
    for s in (s1, s2):
        items, counts = s.entries()
        if items.size:
            scratch.bulk_add(items, counts)
    return scratch.entries()


def _build_result(k: int, items: np.ndarray, counts: np.ndarray) -> MGSummary:
    out = MGSummary(k)
    if items.size:
        out.table.bulk_add(items, counts)
    return out


def ach_merge_sort(s1, s2, k: int) -> MGSummary:
    """Merge two counter summaries: sort the summed pairs, keep the top k.

    Ties at the capacity boundary are broken by item identifier
    ascending.  Inputs are read, not consumed.
    """
    if k < 1:
        raise ValueError(f"capacity must be >= 1, got {k}")
    items, counts = _accumulate_pair(s1, s2, k)
    if items.size > k:
        order = np.lexsort((items, -counts))[:k]
        items, counts = items[order], counts[order]
    return _build_result(k, items, counts)


def ach_merge_quickselect(s1, s2, k: int) -> MGSummary:
    """Merge like ach_merge_sort but find the k-th largest count by
    selection, then collect the survivors in one more pass."""
    if k < 1:
        raise ValueError(f"capacity must be >= 1, got {k}")
    items, counts = _accumulate_pair(s1, s2, k)
    if items.size > k:
        boundary = np.partition(counts, counts.size - k)[counts.size - k]
        above = counts > boundary
        need = k - int(above.sum())
        tie_items = np.sort(items[counts == boundary])[:need]
        items = np.concatenate([items[above], tie_items])
        counts = np.concatenate([counts[above],
                                 np.full(need, boundary, dtype=np.int64)])
    return _build_result(k, items, counts)
