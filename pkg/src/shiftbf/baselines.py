"""Reference filters the shifting variants are benchmarked against."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .association import Region
from .hashing import HashFamily, encode_records, mix64
from .store import BitStore, CounterStore

LN2 = math.log(2.0)


def bf_fpr(m, k, n) -> float:
    """Standard Bloom filter false-positive model (1 - e^(-kn/m))^k."""
    if n == 0:
        return 0.0
    return (1.0 - math.exp(-k * n / m)) ** k


def bf_optimal_k(m, n) -> float:
    return LN2 * m / n


def bf_min_fpr(m, n) -> float:
    return 0.5 ** (LN2 * m / n)


class BloomFilter:
    """Plain k-probe Bloom filter; one window read per probed bit."""

    def __init__(self, m, k, word_bits=64, seed=0):
        if k < 1:
            raise ValueError("k must be positive")
        self.m = m
        self.k = k
        self.store = BitStore(m, pad=0, word_bits=word_bits)
        self.family = HashFamily(k, seed)
        self.n = 0

    def insert(self, element: bytes) -> None:
        for i in range(self.k):
            self.store.set_bit(self.family.value(i, element) % self.m)
        self.n += 1

    def query(self, element: bytes) -> bool:
        for i in range(self.k):
            pos = self.family.value(i, element) % self.m
            if not self.store.read_window(pos, 1):
                return False
        return True

    def __contains__(self, element: bytes) -> bool:
        return self.query(element)

    def insert_many(self, records) -> None:
        cols, length = encode_records(records)
        for i in range(self.k):
            self.store.set_bits(
                (self.family.value_batch(i, cols, length) % np.uint64(self.m)).astype(
                    np.int64
                )
            )
        self.n += cols.shape[0]

    def contains_many(self, records) -> np.ndarray:
        cols, length = encode_records(records)
        alive = np.ones(cols.shape[0], dtype=bool)
        for i in range(self.k):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            alive &= self.store.get_bits(pos).astype(bool)
        return alive

    def fpr(self, n=None) -> float:
        return bf_fpr(self.m, self.k, self.n if n is None else n)


class CountingBloomFilter:
    """Bloom filter over counters instead of bits, so deletes work."""

    def __init__(self, m, k, width=4, seed=0):
        if k < 1:
            raise ValueError("k must be positive")
        self.m = m
        self.k = k
        self.counters = CounterStore(m, width=width)
        self.family = HashFamily(k, seed)
        self.n = 0

    def _positions(self, element):
        return [self.family.value(i, element) % self.m for i in range(self.k)]

    def insert(self, element: bytes) -> None:
        self.counters.increment(self._positions(element))
        self.n += 1

    def delete(self, element: bytes) -> None:
        self.counters.decrement(self._positions(element))
        self.n -= 1

    def query(self, element: bytes) -> bool:
        return bool(self.counters.nonzero_mask(self._positions(element)).all())

    def __contains__(self, element: bytes) -> bool:
        return self.query(element)


class SpectralBloomFilter:
    """Multiplicity estimator using minimum-increment updates.

    An insert increments only the probed counters currently holding the
    minimum (all of them on a tie); the estimate is the probed minimum
    and never falls below the true count while counters are unsaturated.
    Updates beyond inserts are not supported by this scheme.
    """

    def __init__(self, m, k, width=6, seed=0):
        if k < 1:
            raise ValueError("k must be positive")
        self.m = m
        self.k = k
        self.counters = CounterStore(m, width=width)
        self.family = HashFamily(k, seed)

    def _positions(self, element):
        return [self.family.value(i, element) % self.m for i in range(self.k)]

    def insert(self, element: bytes, count: int = 1) -> None:
        idx = np.asarray(self._positions(element), dtype=np.int64)
        vals = self.counters.values(idx).copy()
        poured, clamped = _pour(vals, count, self.counters.max_value)
        if clamped:
            self.counters.overflowed = True
        self.counters.assign(idx, poured)

    def query(self, element: bytes) -> int:
        return int(self.counters.values(self._positions(element)).min())

    def insert_counted(self, occurrences) -> None:
        """Bulk insert; per element its occurrences are applied back to
        back, which is one valid arrival order."""
        counted = (
            occurrences if isinstance(occurrences, Mapping) else Counter(occurrences)
        )
        for e, cnt in counted.items():
            self.insert(e, cnt)

    def insert_many(self, records) -> None:
        """One occurrence per record, arrivals treated as simultaneous:
        every record's tied minima are judged against the state before
        the batch, then all increments land at once. Calling this once
        per arrival round models an interleaved stream, where elements
        no longer enjoy the empty-array head start of back-to-back
        insertion."""
        cols, length = encode_records(records)
        pos = np.stack(
            [
                (self.family.value_batch(i, cols, length) % np.uint64(self.m)).astype(
                    np.int64
                )
                for i in range(self.k)
            ],
            axis=1,
        )
        vals = self.counters.values(pos)
        ties = vals == vals.min(axis=1, keepdims=True)
        self.counters.increment(pos[ties])

    def query_many(self, records) -> np.ndarray:
        cols, length = encode_records(records)
        best = np.full(cols.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
        for i in range(self.k):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            np.minimum(best, self.counters.values(pos), out=best)
        return best


def _pour(values: np.ndarray, count: int, cap: int):
    """Fast-forward ``count`` minimum-increment inserts over one probe set.

    Equivalent to repeating: raise every counter tied at the minimum by
    one, clamped at ``cap``. Levels merge as the minimum climbs, so the
    walk is O(k log k) instead of O(k * count). Returns the new values
    and whether the clamp cut anything off.
    """
    order = np.argsort(values, kind="stable")
    vals = values[order].tolist()
    k = len(vals)
    level = vals[0]
    group = 1
    while group < k and vals[group] == level:
        group += 1
    remaining = count
    clamped = False
    while remaining > 0:
        if level >= cap:
            clamped = True
            break
        nxt = vals[group] if group < k else None
        if nxt is None or nxt - level >= remaining:
            step = min(remaining, cap - level)
            clamped = clamped or step < remaining
            level += step
            remaining = 0
        else:
            remaining -= nxt - level
            level = nxt
            while group < k and vals[group] == level:
                group += 1
    out = values.copy()
    out[order[:group]] = level
    return out, clamped


@dataclass
class IbfAnswer:
    """Raw two-filter verdict plus the regions it cannot rule out."""

    in_s1: bool
    in_s2: bool

    @property
    def claims(self) -> frozenset:
        if self.in_s1 and self.in_s2:
            return frozenset({Region.S1_ONLY, Region.BOTH, Region.S2_ONLY})
        if self.in_s1:
            return frozenset({Region.S1_ONLY})
        if self.in_s2:
            return frozenset({Region.S2_ONLY})
        return frozenset()

    @property
    def is_clear(self) -> bool:
        return len(self.claims) == 1


class Ibf:
    """Association baseline: one independent Bloom filter per set.

    For an element of the union, a one-sided hit pins its region; a
    double hit cannot distinguish true co-membership from a false
    positive, which is both its false-positive mode and why only
    ``(2/3) * (1 - 0.5^k)`` of balanced queries come back clear.
    """

    def __init__(self, m1, m2, k, word_bits=64, seed=0):
        self.bf1 = BloomFilter(m1, k, word_bits, seed)
        self.bf2 = BloomFilter(m2, k, word_bits, mix64(seed ^ 0x1BF))
        self.k = k

    @classmethod
    def build(cls, s1, s2, k=8, m1=None, m2=None, word_bits=64, seed=0):
        s1, s2 = set(s1), set(s2)
        if m1 is None:
            m1 = max(64, round(len(s1) * k / LN2))
        if m2 is None:
            m2 = max(64, round(len(s2) * k / LN2))
        filt = cls(m1, m2, k, word_bits, seed)
        if s1:
            filt.bf1.insert_many(list(s1))
        if s2:
            filt.bf2.insert_many(list(s2))
        return filt

    def query(self, element: bytes) -> IbfAnswer:
        return IbfAnswer(self.bf1.query(element), self.bf2.query(element))

    def query_many(self, records) -> tuple[np.ndarray, np.ndarray]:
        return self.bf1.contains_many(records), self.bf2.contains_many(records)

    @property
    def access_counter(self) -> int:
        return self.bf1.store.access_counter + self.bf2.store.access_counter


def ibf_clear_rate(k) -> float:
    """Chance of a guaranteed-correct answer on a balanced region mix."""
    return (2.0 / 3.0) * (1.0 - 0.5**k)
