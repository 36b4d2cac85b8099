"""Open-addressing counter table: the storage layer under every summary.

The table keeps three parallel arrays:

* ``keys``    uint64 item identifiers,
* ``counts``  int64 counter values,
* ``states``  uint16 slot markers: 0 for empty, otherwise the key's probe
  distance from its home slot plus one.

Linear probing with the probe distance recorded per slot allows deletion
by backward shifting instead of tombstones, so lookups never scan dead
entries.  The slot count L is the smallest power of two holding k
counters at load factor at most 3/4 (L = next_pow2(ceil(4k/3))), which
keeps probe sequences short: at this load the displacement of any key
is, with overwhelming probability, tiny compared to the 2**14 ceiling we
assert on insert.

The bulk-decrement operation subtracts a value from every counter and
compacts survivors in a single pass, which is what the decrement-based
summaries lean on; its cost is O(L) regardless of how many counters die.

All hot paths are compiled kernels over the parallel arrays; the
CounterTable class owns the arrays, validates arguments, and translates
kernel status codes into exceptions.
"""

from __future__ import annotations

import enum
from typing import Iterator, Optional

import numpy as np
from numba import njit

from .rng import MASK64, SplitMix64, mix64_jit, next_below

INT64_MAX = (1 << 63) - 1

# Hard ceiling on probe distance; reaching it means the table is corrupt
# or adversarially loaded, so it is an abort rather than a recoverable error.
MAX_DISPLACEMENT = 1 << 14

# states is uint16 and stores displacement + 1.
assert MAX_DISPLACEMENT + 1 <= np.iinfo(np.uint16).max

_MAX_TABLE_LEN = 1 << 32

DEFAULT_HASH_SEED = 0x7F4A7C15F39CC060

# Kernel status codes shared by every mutating kernel in this package.
OK = 0
ST_ADDED = 0
ST_INSERTED = 1
ST_FULL = 2
ERR_COUNT_OVERFLOW = -1
ERR_DISPLACEMENT = -2
ERR_WEIGHT_OVERFLOW = -3

_INT64_MAX = np.int64(INT64_MAX)


class UpsertStatus(enum.Enum):
    ADDED = "added"
    INSERTED = "inserted"
    FULL = "full"


def next_power_of_two(n: int) -> int:
    if n < 1:
        raise ValueError(f"need a positive value, got {n}")
    return 1 << (n - 1).bit_length()


def table_len_for(k: int) -> int:
    """Slot count for a k-counter table: next power of two >= ceil(4k/3)."""
    if k < 1:
        raise ValueError(f"capacity must be >= 1, got {k}")
    length = next_power_of_two((4 * k + 2) // 3)
    if length > _MAX_TABLE_LEN:
        raise ValueError(f"capacity {k} exceeds the addressable slot range")
    return length


@njit(cache=True, inline="always")
def _home_slot(item: np.uint64, seed: np.uint64, mask: np.int64) -> np.int64:
    return np.int64(mix64_jit(item ^ seed) & np.uint64(mask))


@njit(cache=True)
def _find_slot(keys, states, mask, seed, item):
    """Slot holding `item`, or -1.  Probing stops at the first empty slot."""
    h = _home_slot(item, seed, mask)
    while True:
        if states[h] == 0:
            return np.int64(-1)
        if keys[h] == item:
            return h
        h = (h + 1) & mask


@njit(cache=True)
def _insert_new(keys, counts, states, mask, seed, item, value):
    """Place an absent key at the first empty slot from its home.

    Returns the slot, or ERR_DISPLACEMENT if the probe distance would
    reach the hard ceiling.  The caller guarantees the key is absent and
    the table has an empty slot.
    """
    h = _home_slot(item, seed, mask)
    d = np.int64(0)
    while states[h] != 0:
        h = (h + 1) & mask
        d += 1
    if d + 1 > MAX_DISPLACEMENT:
        return np.int64(ERR_DISPLACEMENT)
    keys[h] = item
    counts[h] = value
    states[h] = d + 1
    return h


@njit(cache=True)
def _upsert_add(keys, counts, states, mask, seed, k, meta, item, delta):
    """Add delta to item's counter, inserting if there is room.

    meta[0] is the live entry count.  Returns (status, new_count) where
    status is ST_ADDED / ST_INSERTED / ST_FULL or a negative error code.
    """
    h = _home_slot(item, seed, mask)
    d = np.int64(0)
    while True:
        if states[h] == 0:
            if meta[0] >= k:
                return ST_FULL, np.int64(0)
            if d + 1 > MAX_DISPLACEMENT:
                return ERR_DISPLACEMENT, np.int64(0)
            keys[h] = item
            counts[h] = delta
            states[h] = d + 1
            meta[0] += 1
            return ST_INSERTED, delta
        if keys[h] == item:
            if counts[h] > _INT64_MAX - delta:
                return ERR_COUNT_OVERFLOW, np.int64(0)
            counts[h] += delta
            return ST_ADDED, counts[h]
        h = (h + 1) & mask
        d += 1


@njit(cache=True)
def _bulk_add(keys, counts, states, mask, seed, k, meta, items, deltas):
    """upsert_add over arrays; stops at the first non-OK status.

    Returns (status, index of the offending update) — index is -1 when
    every update landed.
    """
    for i in range(items.shape[0]):
        status, _ = _upsert_add(
            keys, counts, states, mask, seed, k, meta, items[i], deltas[i]
        )
        if status != ST_ADDED and status != ST_INSERTED:
            return status, np.int64(i)
    return OK, np.int64(-1)


@njit(cache=True)
def _decrement_and_compact(keys, counts, states, mask, seed, meta, c_star):
    """Subtract c_star from every counter; drop non-positive survivors.

    One pass over all slots, run by run.  The sweep starts just past an
    empty anchor slot so every run is visited front to back; each entry
    is lifted out and survivors are re-inserted by probing from their
    home slot.  A survivor always lands at or before the slot it was
    lifted from, so the pass never disturbs slots it has yet to visit
    and probe reachability is preserved throughout.

    Returns the number of entries removed.
    """
    length = mask + 1
    if meta[0] == 0:
        return np.int64(0)
    anchor = np.int64(-1)
    for j in range(length):
        if states[j] == 0:
            anchor = np.int64(j)
            break
    # Load factor <= 3/4 guarantees an empty slot exists.
    removed = np.int64(0)
    for step in range(length):
        j = (anchor + 1 + step) & mask
        if states[j] == 0:
            continue
        key = keys[j]
        c = counts[j] - c_star
        states[j] = 0
        if c > 0:
            h = _home_slot(key, seed, mask)
            d = np.int64(0)
            while states[h] != 0:
                h = (h + 1) & mask
                d += 1
            keys[h] = key
            counts[h] = c
            states[h] = d + 1
        else:
            removed += 1
    meta[0] -= removed
    return removed


@njit(cache=True)
def _collect_counts(counts, states, out):
    n = np.int64(0)
    for j in range(states.shape[0]):
        if states[j] != 0:
            out[n] = counts[j]
            n += 1
    return n


@njit(cache=True)
def _collect_entries(keys, counts, states, items_out, counts_out):
    n = np.int64(0)
    for j in range(states.shape[0]):
        if states[j] != 0:
            items_out[n] = keys[j]
            counts_out[n] = counts[j]
            n += 1
    return n


@njit(cache=True)
def _sample_counts(counts, states, mask, size, ell, rng_state, out):
    """min(ell, size) counts drawn uniformly with replacement.

    When ell >= size the whole table is read out instead of sampled; the
    selection a caller runs on the result is then exact.
    """
    if ell >= size:
        return _collect_counts(counts, states, out)
    length = mask + 1
    for t in range(ell):
        while True:
            j = next_below(rng_state, length)
            if states[j] != 0:
                out[t] = counts[j]
                break
    return ell


@njit(cache=True)
def _lookup_many(keys, counts, states, mask, seed, items, out):
    """out[i] = counter for items[i], or -1 when the item is absent."""
    for i in range(items.shape[0]):
        slot = _find_slot(keys, states, mask, seed, items[i])
        out[i] = counts[slot] if slot >= 0 else -1


def raise_kernel_error(status: int, context: str) -> None:
    if status == ERR_COUNT_OVERFLOW:
        raise OverflowError(f"{context}: counter would exceed int64")
    if status == ERR_WEIGHT_OVERFLOW:
        raise OverflowError(f"{context}: total stream weight would exceed int64")
    if status == ERR_DISPLACEMENT:
        raise RuntimeError(
            f"{context}: probe displacement reached {MAX_DISPLACEMENT}; "
            "table state is no longer trustworthy"
        )
    raise RuntimeError(f"{context}: unexpected kernel status {status}")


def _check_item(item: int) -> np.uint64:
    if not 0 <= item <= MASK64:
        raise ValueError(f"item identifier out of uint64 range: {item}")
    return np.uint64(item)


def _check_delta(delta: int) -> np.int64:
    if not 1 <= delta <= INT64_MAX:
        raise ValueError(f"weight must be in [1, 2**63): {delta}")
    return np.int64(delta)


class CounterTable:
    """Fixed-capacity counter store over open addressing.

    Holds at most `capacity` strictly positive counters keyed by uint64
    identifiers.  upsert_add never evicts: on a full table an absent key
    is reported as FULL and the caller decides what to decrement.
    """

    __slots__ = ("capacity", "table_len", "hash_seed", "_mask", "_seed",
                 "_keys", "_counts", "_states", "_meta")

    def __init__(self, capacity: int, hash_seed: int = DEFAULT_HASH_SEED) -> None:
        self.table_len = table_len_for(capacity)
        self.capacity = capacity
        self.hash_seed = hash_seed & MASK64
        self._mask = np.int64(self.table_len - 1)
        self._seed = np.uint64(self.hash_seed)
        self._keys = np.zeros(self.table_len, dtype=np.uint64)
        self._counts = np.zeros(self.table_len, dtype=np.int64)
        self._states = np.zeros(self.table_len, dtype=np.uint16)
        self._meta = np.zeros(1, dtype=np.int64)

    def __len__(self) -> int:
        return int(self._meta[0])

    @property
    def size(self) -> int:
        return int(self._meta[0])

    def upsert_add(self, item: int, delta: int) -> tuple[UpsertStatus, Optional[int]]:
        """Add delta to item's counter; insert when absent and there is room.

        Returns (ADDED, new_count), (INSERTED, delta), or (FULL, None) with
        the table untouched.
        """
        status, value = _upsert_add(
            self._keys, self._counts, self._states, self._mask, self._seed,
            np.int64(self.capacity), self._meta,
            _check_item(item), _check_delta(delta),
        )
        if status == ST_ADDED:
            return UpsertStatus.ADDED, int(value)
        if status == ST_INSERTED:
            return UpsertStatus.INSERTED, int(value)
        if status == ST_FULL:
            return UpsertStatus.FULL, None
        raise_kernel_error(status, "upsert_add")

    def lookup(self, item: int) -> Optional[int]:
        slot = _find_slot(self._keys, self._states, self._mask, self._seed,
                          _check_item(item))
        return int(self._counts[slot]) if slot >= 0 else None

    def decrement_and_compact(self, c_star: int) -> int:
        """Subtract c_star from every counter, drop any that fall to <= 0.

        Returns the number of entries removed.
        """
        if not 1 <= c_star <= INT64_MAX:
            raise ValueError(f"decrement value must be in [1, 2**63): {c_star}")
        return int(_decrement_and_compact(
            self._keys, self._counts, self._states, self._mask, self._seed,
            self._meta, np.int64(c_star),
        ))

    def sample_counts(self, ell: int, rng: SplitMix64) -> np.ndarray:
        """min(ell, size) counter values drawn uniformly with replacement."""
        if ell < 1:
            raise ValueError(f"sample size must be >= 1, got {ell}")
        if self.size == 0:
            raise ValueError("cannot sample from an empty table")
        out = np.empty(min(ell, self.size), dtype=np.int64)
        _sample_counts(self._counts, self._states, self._mask,
                       np.int64(self.size), np.int64(ell), rng.state, out)
        return out

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        """(items, counts) arrays of live entries in slot order."""
        items = np.empty(self.size, dtype=np.uint64)
        counts = np.empty(self.size, dtype=np.int64)
        _collect_entries(self._keys, self._counts, self._states, items, counts)
        return items, counts

    def __iter__(self) -> Iterator[tuple[int, int]]:
        items, counts = self.entries()
        return iter([(int(i), int(c)) for i, c in zip(items, counts)])

    def lookup_many(self, items: np.ndarray) -> np.ndarray:
        """Vector lookup: counter per item, -1 where absent."""
        items = np.ascontiguousarray(items, dtype=np.uint64)
        out = np.empty(items.shape[0], dtype=np.int64)
        _lookup_many(self._keys, self._counts, self._states, self._mask,
                     self._seed, items, out)
        return out

    def bulk_add(self, items: np.ndarray, deltas: np.ndarray) -> None:
        """upsert_add over arrays; raises if any update cannot be applied."""
        items = np.ascontiguousarray(items, dtype=np.uint64)
        deltas = np.ascontiguousarray(deltas, dtype=np.int64)
        if items.shape != deltas.shape:
            raise ValueError("items and deltas must have equal length")
        if deltas.size and (deltas.min() < 1):
            raise ValueError("weights must be >= 1")
        status, index = _bulk_add(
            self._keys, self._counts, self._states, self._mask, self._seed,
            np.int64(self.capacity), self._meta, items, deltas,
        )
        if status == ST_FULL:
            raise ValueError(f"table full while adding item at index {index}")
        if status != OK:
            raise_kernel_error(status, f"bulk_add at index {index}")

    def state_array(self) -> np.ndarray:
        """The raw slot-state array (read-only use; diagnostics and tests)."""
        return self._states

    def key_array(self) -> np.ndarray:
        """The raw key array; meaningful only where state_array() is nonzero."""
        return self._keys

    def count_array(self) -> np.ndarray:
        """The raw counter array; meaningful only where state_array() is nonzero."""
        return self._counts

    def max_probe_distance(self) -> int:
        """Largest displacement currently in the table (diagnostics)."""
        top = int(self._states.max())
        return max(0, top - 1)

    def total_count(self) -> int:
        """Sum of all stored counters."""
        return int(self._counts[self._states != 0].sum())

    def copy(self) -> "CounterTable":
        dup = object.__new__(CounterTable)
        dup.capacity = self.capacity
        dup.table_len = self.table_len
        dup.hash_seed = self.hash_seed
        dup._mask = self._mask
        dup._seed = self._seed
        dup._keys = self._keys.copy()
        dup._counts = self._counts.copy()
        dup._states = self._states.copy()
        dup._meta = self._meta.copy()
        return dup
