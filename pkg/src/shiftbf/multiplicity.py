"""Multiplicity filter: the offset itself carries the count.

An element with multiplicity ``j`` (``1 <= j <= c``) sets its ``k`` hash
bits shifted by ``j - 1``. A query reads one ``c``-bit window per hash,
ANDs the ``k`` windows and reports the highest surviving offset plus
one, so the answer is never below the true count. Exact per-element
counts are kept in a side table to drive loss-free updates; a cheaper
lossy update mode trusts the filter's own (possibly inflated) answer.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Mapping

import numpy as np

from .hashing import HashFamily, encode_records
from .store import BitStore, CounterStore


class CapacityError(ValueError):
    """An insert would push a multiplicity past the encodable maximum."""


class ShbfX:
    """Counted-membership filter for multiplicities up to ``c``."""

    def __init__(self, m, k, c=57, width=8, word_bits=64, seed=0):
        if k < 1:
            raise ValueError("k must be positive")
        if c < 1:
            raise ValueError("c must be positive")
        self.m = m
        self.k = k
        self.c = c
        self.word_bits = word_bits
        self.store = BitStore(m, pad=c - 1, word_bits=word_bits)
        self.counters = CounterStore(m, pad=c - 1, width=width)
        self.family = HashFamily(k, seed)
        self.counts: dict = {}

    @classmethod
    def build(cls, occurrences, m, k, c=57, width=8, word_bits=64, seed=0):
        """Build from raw occurrences (an iterable with repeats) or a
        ready element -> count mapping."""
        if isinstance(occurrences, Mapping):
            counted = dict(occurrences)
        else:
            counted = dict(Counter(occurrences))
        filt = cls(m, k, c, width, word_bits, seed)
        for e, cnt in counted.items():
            if not 1 <= cnt <= c:
                raise CapacityError(f"count {cnt} outside [1, {c}]")
        filt._ingest(counted)
        return filt

    def _ingest(self, counted: dict) -> None:
        self.counts = counted
        elements = list(counted)
        if not elements:
            return
        shifts = np.fromiter(
            (counted[e] - 1 for e in elements), dtype=np.int64, count=len(elements)
        )
        try:
            cols, length = encode_records(elements)
        except ValueError:
            for e, cnt in counted.items():
                idx = [self.family.value(i, e) % self.m + cnt - 1 for i in range(self.k)]
                self.counters.increment(idx)
                self.store.set_bits(idx)
            return
        for i in range(self.k):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64) + shifts
            self.counters.increment(pos)
            self.store.set_bits(pos)

    def _base_positions(self, element):
        return [self.family.value(i, element) % self.m for i in range(self.k)]

    def candidates(self, element: bytes) -> list[int]:
        """All multiplicities the filter cannot rule out, ascending."""
        acc = self._window_and(element)
        return [j + 1 for j in range(self.c) if (acc >> j) & 1]

    def query(self, element: bytes) -> int:
        """Largest candidate multiplicity, 0 if none; never undershoots."""
        return self._window_and(element).bit_length()

    def _window_and(self, element) -> int:
        acc = (1 << self.c) - 1
        for pos in self._base_positions(element):
            acc &= self.store.read_window(pos, self.c)
            if not acc:
                break
        return acc

    def query_many(self, records) -> np.ndarray:
        """Vectorised ``query``; needs ``c <= word_bits - 7``."""
        if self.c > self.word_bits - 7:
            return np.fromiter(
                (self.query(bytes(r)) for r in records), dtype=np.int64
            )
        cols, length = encode_records(records)
        n = cols.shape[0]
        acc = np.full(n, (1 << self.c) - 1, dtype=np.uint64)
        raw = self.store._bytes
        for i in range(self.k):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            chunk = np.zeros(n, dtype=np.uint64)
            base = pos >> 3
            for b in range(8):
                chunk |= raw[base + b].astype(np.uint64) << np.uint64(8 * b)
            acc &= chunk >> (pos & 7).astype(np.uint64)
        acc &= np.uint64((1 << self.c) - 1)
        out = np.zeros(n, dtype=np.int64)
        for j in range(1, self.c + 1):
            hit = (acc >> np.uint64(j - 1)) & np.uint64(1)
            np.maximum(out, j * hit.astype(np.int64), out=out)
        return out

    # --- updates -------------------------------------------------------

    def _shift_in(self, element, shift):
        idx = [p + shift for p in self._base_positions(element)]
        self.counters.increment(idx)
        self.store.set_bits(idx)

    def _shift_out(self, element, shift):
        idx = [p + shift for p in self._base_positions(element)]
        self.counters.decrement(idx)
        for i in idx:
            if self.counters.value(i) == 0:
                self.store.clear_bit(i)

    def update_lossy(self, element: bytes, op: str) -> int:
        """Update trusting the filter's own answer for the old count.

        Cheap (no table lookup) but hazardous: if the reported count is
        inflated by collisions, the wrong bit column is vacated and an
        innocent element can lose a bit it depended on. Returns the new
        assumed count.
        """
        z = self.query(element)
        if op == "insert":
            if z >= self.c:
                raise CapacityError(f"cannot encode multiplicity above {self.c}")
            if z > 0:
                self._shift_out(element, z - 1)
            self._shift_in(element, z)
            return z + 1
        if op == "delete":
            if z == 0:
                raise ValueError("cannot delete an element reporting zero")
            self._shift_out(element, z - 1)
            if z >= 2:
                self._shift_in(element, z - 2)
            return z - 1
        raise ValueError("op must be 'insert' or 'delete'")

    def update_exact(self, element: bytes, op: str) -> int:
        """Update driven by the exact count table; never creates a false
        negative. Returns the new true count."""
        z = self.counts.get(element, 0)
        if op == "insert":
            if z >= self.c:
                raise CapacityError(f"cannot encode multiplicity above {self.c}")
            if z > 0:
                self._shift_out(element, z - 1)
            self._shift_in(element, z)
            self.counts[element] = z + 1
            return z + 1
        if op == "delete":
            if z == 0:
                raise KeyError("element not present")
            self._shift_out(element, z - 1)
            if z >= 2:
                self._shift_in(element, z - 2)
                self.counts[element] = z - 1
            else:
                del self.counts[element]
            return z - 1
        raise ValueError("op must be 'insert' or 'delete'")


def correctness_rate(m, k, c, n, j) -> float:
    """Model probability that a query reports exactly ``j``.

    ``f0 = (1 - e^(-kn/m))^k`` is the chance a wrong offset column
    passes all ``k`` window bits; ``j = 0`` asks for no survivor among
    all ``c`` columns. For members the model charges one ``1 - f0``
    factor per column on one side of the true count; summed over a
    uniform multiplicity workload the mean is the same whichever side
    the failures are charged to, and that mean is what the aggregate
    benchmark validates.
    """
    if j < 0 or j > c:
        raise ValueError(f"j must be in [0, {c}]")
    f0 = (1.0 - math.exp(-k * n / m)) ** k
    if j == 0:
        return (1.0 - f0) ** c
    return (1.0 - f0) ** (j - 1)


def mean_member_correctness_rate(m, k, c, n) -> float:
    """Workload mean of ``correctness_rate`` over multiplicities uniform
    in [1, c]; this is what an aggregate benchmark measures."""
    return sum(correctness_rate(m, k, c, n, j) for j in range(1, c + 1)) / c
