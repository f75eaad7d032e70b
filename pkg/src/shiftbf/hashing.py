"""Seeded 64-bit hash family with matching scalar and vectorised paths.

One keyed mixing function stands in for a family of independent hash
functions: function ``i`` is the mixer keyed with the ``i``-th seed
derived from a single master seed. The scalar path (``value``) is the
reference; the numpy path (``value_batch``) must agree with it bit for
bit, which the test suite checks. Range reduction everywhere is plain
modulo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """Avalanche a 64-bit value (SplitMix64 finaliser)."""
    x &= M64
    x = ((x ^ (x >> 30)) * _MULT1) & M64
    x = ((x ^ (x >> 27)) * _MULT2) & M64
    return x ^ (x >> 31)


def mix64_batch(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MULT1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MULT2)
        return x ^ (x >> np.uint64(31))


def derive_seeds(master: int, count: int) -> list[int]:
    return [mix64(master + (i + 1) * _GOLDEN) for i in range(count)]


def hash_bytes(seed: int, data: bytes) -> int:
    """Hash an arbitrary byte string under one seed."""
    h = seed
    for off in range(0, len(data), 8):
        chunk = data[off : off + 8]
        h = mix64(h ^ int.from_bytes(chunk, "little"))
    return mix64(h ^ len(data))


def as_record_array(records) -> np.ndarray:
    """Coerce a batch of equal-length byte strings to an (n, L) uint8 array."""
    if isinstance(records, np.ndarray):
        if records.dtype != np.uint8 or records.ndim != 2:
            raise ValueError("record array must be 2-d uint8")
        return records
    records = list(records)
    if not records:
        return np.zeros((0, 1), dtype=np.uint8)
    length = len(records[0])
    if length == 0 or any(len(r) != length for r in records):
        raise ValueError("batch records must share one non-zero length")
    flat = np.frombuffer(b"".join(records), dtype=np.uint8)
    return flat.reshape(len(records), length)


def encode_records(records) -> tuple[np.ndarray, int]:
    """Pack records into little-endian uint64 columns for the batch path.

    Returns ``(cols, length)`` where ``cols[j]`` holds the j-th 8-byte
    chunk of every record, zero padded exactly like the scalar path.
    """
    arr = as_record_array(records)
    n, length = arr.shape
    ncols = max(1, -(-length // 8))
    if length != ncols * 8:
        padded = np.zeros((n, ncols * 8), dtype=np.uint8)
        padded[:, :length] = arr
        arr = padded
    arr = np.ascontiguousarray(arr)
    return arr.view("<u8"), length


class HashFamily:
    """``count`` hash functions derived from one master seed."""

    def __init__(self, count: int, seed: int = 0):
        if count < 1:
            raise ValueError("a hash family needs at least one function")
        self.count = count
        self.seed = seed & M64
        self.seeds = derive_seeds(self.seed, count)
        self._seeds_np = np.array(self.seeds, dtype=np.uint64)

    def value(self, index: int, element: bytes) -> int:
        return hash_bytes(self.seeds[index], element)

    def values(self, element: bytes) -> list[int]:
        return [hash_bytes(s, element) for s in self.seeds]

    def value_batch(self, index: int, cols: np.ndarray, length: int) -> np.ndarray:
        """Vectorised ``value`` over records pre-packed by ``encode_records``."""
        h = np.full(cols.shape[0], self._seeds_np[index], dtype=np.uint64)
        for j in range(cols.shape[1]):
            h = mix64_batch(h ^ cols[:, j])
        return mix64_batch(h ^ np.uint64(length))

    def __repr__(self) -> str:
        return f"HashFamily(count={self.count}, seed={self.seed:#x})"


@dataclass
class RandomnessReport:
    frequencies: np.ndarray
    band: float
    max_deviation: float
    passed: bool


def randomness_test(source, corpus=None, band: float = 0.01, bits: int = 64):
    """Per-bit balance check: every output bit must be 1 with frequency
    0.5 +- ``band`` over the corpus.

    ``source`` is either a callable applied to each corpus element or a
    precomputed array of hash values.
    """
    if callable(source):
        if corpus is None:
            raise ValueError("a callable source needs a corpus")
        values = np.fromiter(
            (source(e) & M64 for e in corpus), dtype=np.uint64, count=len(corpus)
        )
    else:
        values = np.asarray(source, dtype=np.uint64)
    if values.size == 0:
        raise ValueError("empty corpus")
    unpacked = np.unpackbits(
        values.view(np.uint8).reshape(values.size, 8), axis=1, bitorder="little"
    )[:, :bits]
    freq = unpacked.mean(axis=0)
    max_dev = float(np.abs(freq - 0.5).max())
    return RandomnessReport(freq, band, max_dev, bool(max_dev <= band))
