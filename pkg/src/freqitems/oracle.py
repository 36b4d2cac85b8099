"""Exact ground truth for evaluating approximate summaries.

ExactCounts ingests the same stream a summary sees and keeps the full
frequency vector in a dict, so it is only suitable for streams whose
support fits in memory (benchmarks here keep the universe well below
10**7 distinct items).  On top of the exact counts it provides the
quantities the quality gates are phrased in: residual weight after
removing the heaviest j items, worst-case underestimation error of a
summary's lower bounds, and the exact heavy-hitter set for a threshold
fraction.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, List, Tuple

import numpy as np

# Exact float64 integer range; bincount accumulates into float-safe
# int64 but batch ingest converts through numpy and we refuse streams
# whose single-item totals could not survive a float64 round trip in
# downstream consumers (plot axes, CSV readers).
_SAFE_TOTAL = 1 << 53

# Never-seen probe items used by max_lower_error: ids strictly above
# everything the oracle has ingested, so membership is guaranteed fresh.
PROBE_COUNT = 100


class ExactCounts:
    """Exact frequency vector of a weighted stream."""

    def __init__(self) -> None:
        self._counts: Dict[int, int] = {}
        self._total = 0

    def ingest(self, item: int, weight: int = 1) -> None:
        if not 0 <= item < 1 << 64:
            raise ValueError(f"item identifier out of uint64 range: {item}")
        if weight < 1:
            raise ValueError(f"weight must be >= 1, got {weight}")
        self._counts[item] = self._counts.get(item, 0) + weight
        self._total += weight

    def ingest_many(self, items: np.ndarray, weights: np.ndarray) -> None:
        """Batch ingest via bincount on the compacted item ids."""
        if len(items) != len(weights):
            raise ValueError("items and weights length mismatch")
        if len(items) == 0:
            return
        if weights.min() < 1:
            raise ValueError("weights must be >= 1")
        uniq, inverse = np.unique(items, return_inverse=True)
        sums = np.bincount(inverse, weights=weights.astype(np.float64))
        if sums.max() >= _SAFE_TOTAL:
            # fall back to the exact per-item loop
            for it, w in zip(items.tolist(), weights.tolist()):
                self.ingest(int(it), int(w))
            return
        for it, s in zip(uniq.tolist(), sums):
            self._counts[int(it)] = self._counts.get(int(it), 0) + int(s)
        self._total += int(weights.sum())

    @property
    def total_weight(self) -> int:
        return self._total

    @property
    def distinct(self) -> int:
        return len(self._counts)

    def count(self, item: int) -> int:
        return self._counts.get(item, 0)

    def items(self) -> Iterable[Tuple[int, int]]:
        return self._counts.items()

    def sorted_counts(self) -> List[int]:
        """All counts, descending."""
        return sorted(self._counts.values(), reverse=True)

    def residual_weight(self, j: int) -> int:
        """Total weight after deleting the j heaviest items.

        Ties are broken arbitrarily; only the multiset of counts
        matters.  j >= distinct gives 0.
        """
        if j < 0:
            raise ValueError(f"j must be >= 0, got {j}")
        if j == 0:
            return self._total
        ranked = self.sorted_counts()
        return self._total - sum(ranked[:j])

    def probe_items(self) -> List[int]:
        """PROBE_COUNT never-seen item ids for testing absent-item behavior.

        Starts just above the largest seen item, wrapping inside uint64
        and skipping seen ids so the panel stays genuinely fresh.
        """
        top = max(self._counts) if self._counts else 0
        probes: List[int] = []
        cand = top
        while len(probes) < PROBE_COUNT:
            cand = (cand + 1) % (1 << 64)
            if cand not in self._counts:
                probes.append(cand)
        return probes

    def max_lower_error(
        self,
        lower: Callable[[int], int],
        lower_many: Callable[[np.ndarray], np.ndarray] | None = None,
    ) -> int:
        """max over items of f(i) - lower(i).

        Evaluated on every seen item plus PROBE_COUNT never-seen ids, so
        a summary that hallucinated mass onto absent items would show a
        negative contribution there (clamped into the max like any other
        item).  When lower_many is given the seen items are evaluated in
        one vectorized call.
        """
        worst = 0
        if self._counts:
            if lower_many is not None:
                items = np.fromiter(self._counts.keys(), dtype=np.uint64,
                                    count=len(self._counts))
                truths = np.fromiter(self._counts.values(), dtype=np.int64,
                                     count=len(self._counts))
                errs = truths - lower_many(items)
                worst = int(errs.max())
            else:
                for it, f in self._counts.items():
                    err = f - lower(it)
                    if err > worst:
                        worst = err
        for it in self.probe_items():
            err = 0 - lower(it)
            if err > worst:
                worst = err
        return worst

    def max_abs_error(
        self,
        estimate: Callable[[int], int],
        estimate_many: Callable[[np.ndarray], np.ndarray] | None = None,
    ) -> int:
        """max over items of |estimate(i) - f(i)|, same probe panel."""
        worst = 0
        if self._counts:
            if estimate_many is not None:
                items = np.fromiter(self._counts.keys(), dtype=np.uint64,
                                    count=len(self._counts))
                truths = np.fromiter(self._counts.values(), dtype=np.int64,
                                     count=len(self._counts))
                errs = np.abs(estimate_many(items) - truths)
                worst = int(errs.max())
            else:
                for it, f in self._counts.items():
                    err = abs(estimate(it) - f)
                    if err > worst:
                        worst = err
        for it in self.probe_items():
            err = abs(estimate(it))
            if err > worst:
                worst = err
        return worst

    def heavy_hitters_exact(self, phi: float) -> set:
        """Items with f(i) >= phi * N, compared exactly (>= is inclusive).

        phi is converted through its repr Fraction so e.g. 0.1 means the
        decimal 0.1, and the comparison f * den >= num * N stays in
        integers.  phi = 0 returns every seen item.
        """
        from fractions import Fraction

        if not 0 <= phi <= 1:
            raise ValueError(f"phi must be in [0, 1], got {phi}")
        frac = Fraction(repr(phi))
        num, den = frac.numerator, frac.denominator
        return {it for it, f in self._counts.items()
                if f * den >= num * self._total}
