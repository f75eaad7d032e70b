"""Flat bit and counter arrays used by every filter in the package.

Both stores carry a logical region of ``m`` slots plus a small ``pad``
region so that offset-shifted writes never wrap around the end of the
array. ``BitStore`` additionally models memory traffic: every window
read costs ``max(1, ceil(length / word_bits))`` accesses, matching the
cost of unaligned word fetches on common hardware, and the running
total is kept in ``access_counter``.
"""

from __future__ import annotations

import numpy as np

_WORD_DTYPES = {32: np.dtype("<u4"), 64: np.dtype("<u8")}


class CounterUnderflowError(ValueError):
    """A counter would drop below zero, i.e. a delete was inconsistent."""


class BitStore:
    """Bit array of ``m + pad`` bits packed into little-endian words.

    Bit ``i`` lives in word ``i // word_bits`` at in-word position
    ``i % word_bits``. The array is over-allocated by 8 guard bytes so
    vectorised byte gathers near the tail stay in bounds; the guard is
    never observable through ``words``, ``to_bytes`` or equality.
    """

    def __init__(self, m: int, pad: int = 0, word_bits: int = 64):
        if m <= 0:
            raise ValueError("bit array needs a positive logical size")
        if pad < 0:
            raise ValueError("pad must be non-negative")
        if word_bits not in _WORD_DTYPES:
            raise ValueError("word_bits must be 32 or 64")
        self.m = m
        self.pad = pad
        self.word_bits = word_bits
        self.size = m + pad
        self._nwords = -(-self.size // word_bits)
        guard = 8 // (word_bits // 8)
        self._words = np.zeros(self._nwords + guard, dtype=_WORD_DTYPES[word_bits])
        self._bytes = self._words.view(np.uint8)
        self.access_counter = 0

    @property
    def words(self) -> np.ndarray:
        """The live word array without the guard region. Treat as read-only."""
        return self._words[: self._nwords]

    def _check(self, i: int) -> None:
        if not 0 <= i < self.size:
            raise IndexError(f"bit {i} outside [0, {self.size})")

    def set_bit(self, i: int) -> None:
        self._check(i)
        self._words[i // self.word_bits] |= self._words.dtype.type(1) << (
            i % self.word_bits
        )

    def clear_bit(self, i: int) -> None:
        self._check(i)
        self._words[i // self.word_bits] &= ~(
            self._words.dtype.type(1) << (i % self.word_bits)
        )

    def get_bit(self, i: int) -> int:
        self._check(i)
        return int(self._bytes[i >> 3] >> (i & 7)) & 1

    def read_window(self, start: int, length: int) -> int:
        """Read ``length`` consecutive bits starting at ``start``.

        Returns an int whose bit ``j`` is the stored bit ``start + j``.
        Costs ``max(1, ceil(length / word_bits))`` accesses.
        """
        if length <= 0:
            raise ValueError("window length must be positive")
        if start < 0 or start + length > self.size:
            raise IndexError(
                f"window [{start}, {start + length}) outside [0, {self.size})"
            )
        self.access_counter += max(1, -(-length // self.word_bits))
        lo = start >> 3
        hi = (start + length + 7) >> 3
        chunk = int.from_bytes(self._bytes[lo:hi].tobytes(), "little")
        return (chunk >> (start & 7)) & ((1 << length) - 1)

    # Batch paths skip access accounting; they back the bench's bulk
    # builds and sweeps while the scalar paths stay instrumented.

    def set_bits(self, indices) -> None:
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            return
        if idx.min() < 0 or idx.max() >= self.size:
            raise IndexError("bit index outside the store")
        one = self._words.dtype.type(1)
        np.bitwise_or.at(
            self._words,
            idx // self.word_bits,
            one << (idx % self.word_bits).astype(self._words.dtype),
        )

    def get_bits(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        return (self._bytes[idx >> 3] >> (idx & 7).astype(np.uint8)) & np.uint8(1)

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def to_bytes(self) -> bytes:
        return self.words.tobytes()

    def load_bytes(self, payload: bytes) -> None:
        expected = self._nwords * (self.word_bits // 8)
        if len(payload) != expected:
            raise ValueError(f"expected {expected} payload bytes, got {len(payload)}")
        self._words[: self._nwords] = np.frombuffer(
            payload, dtype=self._words.dtype
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitStore):
            return NotImplemented
        return (
            self.m == other.m
            and self.pad == other.pad
            and self.word_bits == other.word_bits
            and bool(np.array_equal(self.words, other.words))
        )

    def __repr__(self) -> str:
        return f"BitStore(m={self.m}, pad={self.pad}, word_bits={self.word_bits})"


class CounterStore:
    """Array of saturating ``width``-bit counters.

    Increments clamp at ``2**width - 1`` and set the sticky ``overflowed``
    flag; once that happened, deletes of colliding elements are no longer
    reliable (the usual counting-filter caveat). Decrements below zero
    raise ``CounterUnderflowError`` and leave the store unchanged.
    """

    def __init__(self, m: int, pad: int = 0, width: int = 4):
        if m <= 0:
            raise ValueError("counter array needs a positive logical size")
        if pad < 0:
            raise ValueError("pad must be non-negative")
        if not 1 <= width <= 16:
            raise ValueError("counter width must be in [1, 16]")
        self.m = m
        self.pad = pad
        self.width = width
        self.size = m + pad
        self.max_value = (1 << width) - 1
        self.overflowed = False
        self._counts = np.zeros(self.size, dtype=np.int64)

    def _index_array(self, indices) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        if idx.size and (idx.min() < 0 or idx.max() >= self.size):
            raise IndexError("counter index outside the store")
        return idx

    def increment(self, indices, amount: int = 1) -> None:
        idx = self._index_array(indices)
        np.add.at(self._counts, idx, amount)
        high = self._counts[idx] > self.max_value
        if high.any():
            self.overflowed = True
            self._counts[idx[high]] = self.max_value

    def decrement(self, indices, amount: int = 1) -> None:
        idx = self._index_array(indices)
        np.subtract.at(self._counts, idx, amount)
        if (self._counts[idx] < 0).any():
            np.add.at(self._counts, idx, amount)
            raise CounterUnderflowError("decrement below zero")

    def assign(self, indices, values) -> None:
        idx = self._index_array(indices)
        vals = np.asarray(values, dtype=np.int64)
        if vals.size and (vals.min() < 0 or vals.max() > self.max_value):
            raise ValueError("assigned values outside counter range")
        self._counts[idx] = vals

    def value(self, i: int) -> int:
        if not 0 <= i < self.size:
            raise IndexError(f"counter {i} outside [0, {self.size})")
        return int(self._counts[i])

    def values(self, indices) -> np.ndarray:
        return self._counts[self._index_array(indices)]

    def nonzero_mask(self, indices) -> np.ndarray:
        return self._counts[np.asarray(indices, dtype=np.int64)] > 0

    def to_bytes(self) -> bytes:
        dtype = np.uint8 if self.width <= 8 else np.dtype("<u2")
        return self._counts.astype(dtype).tobytes()

    def load_bytes(self, payload: bytes) -> None:
        dtype = np.uint8 if self.width <= 8 else np.dtype("<u2")
        expected = self.size * dtype.itemsize if self.width > 8 else self.size
        if len(payload) != expected:
            raise ValueError(f"expected {expected} payload bytes, got {len(payload)}")
        self._counts[:] = np.frombuffer(payload, dtype=dtype).astype(np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CounterStore):
            return NotImplemented
        return (
            self.m == other.m
            and self.pad == other.pad
            and self.width == other.width
            and bool(np.array_equal(self._counts, other._counts))
        )

    def __repr__(self) -> str:
        return f"CounterStore(m={self.m}, pad={self.pad}, width={self.width})"
