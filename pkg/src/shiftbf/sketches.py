"""Count-min sketches, plain and with offset-shared counter rows.

The shifting variant halves both hash work and memory traffic: instead
of ``d`` rows probed once each, it keeps ``d/2`` double-width rows and
probes each at a base counter and at a per-element offset, fetched
together in one window because the offset span times the counter width
stays within a word. Estimates never undershoot the true count (up to
counter saturation, which is clamped and flagged).

``hash_ops`` and ``window_reads`` count the real per-element work so
the two variants can be compared by instrumentation rather than by
claim.
"""

from __future__ import annotations

import numpy as np

from .hashing import HashFamily, encode_records


class _SketchBase:
    def __init__(self):
        self.hash_ops = 0
        self.window_reads = 0
        self.overflowed = False

    def _clamp(self, row, idx):
        grid = self.grid
        high = grid[row, idx] > self.max_value
        if np.any(high):
            self.overflowed = True
            if np.isscalar(idx):
                grid[row, idx] = self.max_value
            else:
                sel = np.asarray(idx)[np.asarray(high)]
                grid[row, sel] = self.max_value


class CountMinSketch(_SketchBase):
    """Plain d-row sketch: insert bumps one counter per row, query takes
    the row minimum."""

    def __init__(self, d, r, counter_bits=6, seed=0):
        if d < 1 or r < 1:
            raise ValueError("d and r must be positive")
        if not 1 <= counter_bits <= 16:
            raise ValueError("counter_bits must be in [1, 16]")
        super().__init__()
        self.d = d
        self.r = r
        self.counter_bits = counter_bits
        self.max_value = (1 << counter_bits) - 1
        self.grid = np.zeros((d, r), dtype=np.int64)
        self.family = HashFamily(d, seed)

    def insert(self, element: bytes, count: int = 1) -> None:
        self.hash_ops += self.d
        for i in range(self.d):
            j = self.family.value(i, element) % self.r
            self.grid[i, j] += count
            self._clamp(i, j)

    def query(self, element: bytes) -> int:
        self.hash_ops += self.d
        self.window_reads += self.d
        return int(
            min(
                self.grid[i, self.family.value(i, element) % self.r]
                for i in range(self.d)
            )
        )

    def insert_many(self, records, counts=None) -> None:
        cols, length = encode_records(records)
        n = cols.shape[0]
        if counts is None:
            counts = np.ones(n, dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
        self.hash_ops += self.d * n
        for i in range(self.d):
            j = (self.family.value_batch(i, cols, length) % np.uint64(self.r)).astype(
                np.int64
            )
            np.add.at(self.grid[i], j, counts)
            high = self.grid[i] > self.max_value
            if high.any():
                self.overflowed = True
                self.grid[i, high] = self.max_value

    def query_many(self, records) -> np.ndarray:
        cols, length = encode_records(records)
        n = cols.shape[0]
        self.hash_ops += self.d * n
        self.window_reads += self.d * n
        best = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        for i in range(self.d):
            j = (self.family.value_batch(i, cols, length) % np.uint64(self.r)).astype(
                np.int64
            )
            np.minimum(best, self.grid[i, j], out=best)
        return best


class ShiftingCountMinSketch(_SketchBase):
    """Sketch with ``d/2`` rows of ``2r`` counters; each insert bumps a
    base counter and its offset partner, each query reads both in one
    window fetch. ``d/2 + 1`` hashes and ``d/2`` reads per operation."""

    def __init__(self, d, r, counter_bits=6, word_bits=64, seed=0):
        if d < 2 or d % 2:
            raise ValueError("d must be a positive even integer")
        if r < 1:
            raise ValueError("r must be positive")
        if not 1 <= counter_bits <= 16:
            raise ValueError("counter_bits must be in [1, 16]")
        super().__init__()
        self.d = d
        self.r = r
        self.counter_bits = counter_bits
        self.word_bits = word_bits
        self.wbar = (word_bits - 7) // counter_bits
        if self.wbar < 2:
            raise ValueError("counters too wide to pair inside one word")
        self.max_value = (1 << counter_bits) - 1
        self.rows = d // 2
        self.row_len = 2 * r + self.wbar - 1
        self.grid = np.zeros((self.rows, self.row_len), dtype=np.int64)
        self.family = HashFamily(self.rows + 1, seed)

    def offset(self, element: bytes) -> int:
        return self.family.value(self.rows, element) % (self.wbar - 1) + 1

    def insert(self, element: bytes, count: int = 1) -> None:
        self.hash_ops += self.rows + 1
        o = self.offset(element)
        for i in range(self.rows):
            j = self.family.value(i, element) % (2 * self.r)
            self.grid[i, j] += count
            self.grid[i, j + o] += count
            self._clamp(i, j)
            self._clamp(i, j + o)

    def query(self, element: bytes) -> int:
        self.hash_ops += self.rows + 1
        self.window_reads += self.rows
        o = self.offset(element)
        best = None
        for i in range(self.rows):
            j = self.family.value(i, element) % (2 * self.r)
            pair = min(int(self.grid[i, j]), int(self.grid[i, j + o]))
            best = pair if best is None else min(best, pair)
        return best

    def insert_many(self, records, counts=None) -> None:
        cols, length = encode_records(records)
        n = cols.shape[0]
        if counts is None:
            counts = np.ones(n, dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
        self.hash_ops += (self.rows + 1) * n
        o = (
            self.family.value_batch(self.rows, cols, length)
            % np.uint64(self.wbar - 1)
        ).astype(np.int64) + 1
        for i in range(self.rows):
            j = (
                self.family.value_batch(i, cols, length) % np.uint64(2 * self.r)
            ).astype(np.int64)
            np.add.at(self.grid[i], j, counts)
            np.add.at(self.grid[i], j + o, counts)
            high = self.grid[i] > self.max_value
            if high.any():
                self.overflowed = True
                self.grid[i, high] = self.max_value

    def query_many(self, records) -> np.ndarray:
        cols, length = encode_records(records)
        n = cols.shape[0]
        self.hash_ops += (self.rows + 1) * n
        self.window_reads += self.rows * n
        o = (
            self.family.value_batch(self.rows, cols, length)
            % np.uint64(self.wbar - 1)
        ).astype(np.int64) + 1
        best = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        for i in range(self.rows):
            j = (
                self.family.value_batch(i, cols, length) % np.uint64(2 * self.r)
            ).astype(np.int64)
            np.minimum(best, self.grid[i, j], out=best)
            np.minimum(best, self.grid[i, j + o], out=best)
        return best
