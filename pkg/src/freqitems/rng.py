"""Seedable random primitives shared by the table and summary kernels.

Everything downstream needs reproducible randomness that is callable from
compiled kernels: pivot choices, slot sampling, and merge-order shuffles.
numpy's Generator cannot be advanced from inside a kernel, so we carry a
one-word splitmix64 state in a uint64 array and mutate it in place.  The
same stream is visible from Python through the SplitMix64 wrapper, which
keeps tests and kernels on identical sequences.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

_GAMMA = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def mix64_jit(z: np.uint64) -> np.uint64:
    """64-bit avalanche finalizer (multiply / xor-shift)."""
    z = (z ^ (z >> np.uint64(33))) * np.uint64(0xFF51AFD7ED558CCD)
    z = (z ^ (z >> np.uint64(33))) * np.uint64(0xC4CEB9FE1A85EC53)
    return z ^ (z >> np.uint64(33))


@njit(cache=True, inline="always")
def next_u64(state: np.ndarray) -> np.uint64:
    """Advance the splitmix64 state (shape-(1,) uint64 array) one step."""
    state[0] += _GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def next_below(state: np.ndarray, n: np.int64) -> np.int64:
    """Uniform draw in [0, n) for n <= 2**32, via the high 32 bits.

    Bias is below n / 2**32, which is irrelevant for slot sampling and
    pivot selection; in exchange the draw needs no 128-bit arithmetic.
    """
    r = next_u64(state) >> np.uint64(32)
    return np.int64((r * np.uint64(n)) >> np.uint64(32))


@njit(cache=True)
def shuffle_inplace(values: np.ndarray, state: np.ndarray) -> None:
    """Fisher-Yates shuffle driven by the splitmix64 state."""
    for i in range(values.shape[0] - 1, 0, -1):
        j = next_below(state, i + 1)
        tmp = values[i]
        values[i] = values[j]
        values[j] = tmp


def mix64(x: int) -> int:
    """Python-facing view of the kernel mixer (used to derive seeds)."""
    return int(mix64_jit(np.uint64(x & MASK64)))


class SplitMix64:
    """Tiny seedable generator whose state kernels can share and advance."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = np.array([seed & MASK64], dtype=np.uint64)

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def next_below(self, n: int) -> int:
        if not 1 <= n <= 1 << 32:
            raise ValueError(f"bound out of range: {n}")
        return int(next_below(self.state, np.int64(n)))

    def copy(self) -> "SplitMix64":
        dup = SplitMix64(0)
        dup.state = self.state.copy()
        return dup
