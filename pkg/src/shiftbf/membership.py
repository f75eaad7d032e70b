"""Membership filters that fold two bits of evidence into one word fetch.

A classic Bloom filter spends one memory access per hash probe. The
filters here halve that: element ``e`` stores, for each of ``k/2`` base
positions, both the base bit and a partner bit shifted by a per-element
offset ``o(e) in [1, wbar-1]``. Because ``wbar <= word_bits - 7``, the
base bit and its partner always fit inside one aligned word fetch, so a
query resolves two bits per access. The array carries ``wbar - 1`` pad
bits so shifted writes never wrap.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .hashing import HashFamily, encode_records
from .store import BitStore, CounterStore


def _check_window(wbar, word_bits) -> None:
    if not 2 <= wbar <= word_bits - 7:
        raise ValueError(
            f"wbar must be in [2, {word_bits - 7}] for {word_bits}-bit words"
        )


class ShbfM:
    """Membership filter reading one bit pair per memory access.

    Uses ``k/2 + 1`` hash functions: ``k/2`` base positions plus one
    offset hash. A query therefore needs at most ``k/2`` window reads
    against the standard filter's ``k``.
    """

    def __init__(self, m, k, wbar=57, word_bits=64, seed=0):
        if k < 2 or k % 2:
            raise ValueError("k must be a positive even integer")
        _check_window(wbar, word_bits)
        self.m = m
        self.k = k
        self.wbar = wbar
        self.max_offset = wbar - 1
        self.store = BitStore(m, pad=self.max_offset, word_bits=word_bits)
        self.family = HashFamily(k // 2 + 1, seed)
        self.n = 0

    def offset(self, element: bytes) -> int:
        return self.family.value(self.k // 2, element) % self.max_offset + 1

    def insert(self, element: bytes) -> None:
        o = self.offset(element)
        for i in range(self.k // 2):
            pos = self.family.value(i, element) % self.m
            self.store.set_bit(pos)
            self.store.set_bit(pos + o)
        self.n += 1

    def query(self, element: bytes) -> bool:
        """Short-circuiting membership test, one window read per bit pair."""
        o = self.offset(element)
        for i in range(self.k // 2):
            pos = self.family.value(i, element) % self.m
            window, rel = self._pair_window(pos)
            if not (window >> rel) & 1 or not (window >> (rel + o)) & 1:
                return False
        return True

    def _pair_window(self, pos):
        # Byte-aligned fetch of (pos % 8) + wbar <= word_bits bits: one access.
        rel = pos & 7
        return self.store.read_window(pos - rel, rel + self.max_offset + 1), rel

    def __contains__(self, element: bytes) -> bool:
        return self.query(element)

    # --- batch paths -------------------------------------------------

    def _batch_positions(self, records):
        cols, length = encode_records(records)
        offs = self.family.value_batch(self.k // 2, cols, length) % np.uint64(
            self.max_offset
        ) + np.uint64(1)
        bases = [
            (self.family.value_batch(i, cols, length) % np.uint64(self.m)).astype(
                np.int64
            )
            for i in range(self.k // 2)
        ]
        return bases, offs.astype(np.int64)

    def insert_many(self, records) -> None:
        bases, offs = self._batch_positions(records)
        for pos in bases:
            self.store.set_bits(pos)
            self.store.set_bits(pos + offs)
        self.n += len(bases[0]) if bases else 0

    def contains_many(self, records) -> np.ndarray:
        """Vectorised queries; agrees with ``query`` but skips access accounting."""
        bases, offs = self._batch_positions(records)
        alive = np.ones(offs.shape[0], dtype=bool)
        for pos in bases:
            alive &= self.store.get_bits(pos).astype(bool)
            alive &= self.store.get_bits(pos + offs).astype(bool)
        return alive

    def fpr(self, n=None) -> float:
        return fpr_theoretical(self.m, self.k, self.wbar, self.n if n is None else n)


class CShbfM(ShbfM):
    """Counting variant: each bit is shadowed by a saturating counter,
    enabling deletes. The bit array stays synchronised as counter >= 1."""

    def __init__(self, m, k, wbar=57, width=4, word_bits=64, seed=0):
        super().__init__(m, k, wbar, word_bits, seed)
        self.counters = CounterStore(m, pad=self.max_offset, width=width)

    def _positions(self, element):
        o = self.offset(element)
        idx = []
        for i in range(self.k // 2):
            pos = self.family.value(i, element) % self.m
            idx.append(pos)
            idx.append(pos + o)
        return idx

    def insert(self, element: bytes) -> None:
        idx = self._positions(element)
        self.counters.increment(idx)
        self.store.set_bits(idx)
        self.n += 1

    def delete(self, element: bytes) -> None:
        """Remove one prior insert; underflow raises and changes nothing."""
        idx = self._positions(element)
        self.counters.decrement(idx)
        for i in idx:
            if self.counters.value(i) == 0:
                self.store.clear_bit(i)
        self.n -= 1

    def insert_many(self, records) -> None:
        bases, offs = self._batch_positions(records)
        for pos in bases:
            for idx in (pos, pos + offs):
                self.counters.increment(idx)
                self.store.set_bits(idx)
        self.n += len(offs)


class GenShbfM:
    """Generalised filter: each base position carries ``t`` shifted bits.

    The ``k`` probes split into ``k / (t+1)`` groups of one base bit and
    ``t`` partner bits. Offset ``o_j`` is drawn from the j-th of ``t``
    equal sub-ranges of the ``wbar - 1`` offset window, so the partners
    stay ordered and a group still resolves in a single window read.
    """

    def __init__(self, m, k, t, wbar=57, word_bits=64, seed=0):
        if k < 2:
            raise ValueError("k must be at least 2")
        if not 1 <= t <= k - 1:
            raise ValueError("t must be in [1, k-1]")
        if k % (t + 1):
            raise ValueError("t + 1 must divide k")
        _check_window(wbar, word_bits)
        self.span = (wbar - 1) // t
        if self.span < 1:
            raise ValueError("offset window too small for this many shifts")
        self.m = m
        self.k = k
        self.t = t
        self.wbar = wbar
        self.groups = k // (t + 1)
        self.max_offset = t * self.span
        self.store = BitStore(m, pad=self.max_offset, word_bits=word_bits)
        self.family = HashFamily(self.groups + t, seed)
        self.n = 0

    def offsets(self, element: bytes) -> list[int]:
        return [
            j * self.span
            + self.family.value(self.groups + j, element) % self.span
            + 1
            for j in range(self.t)
        ]

    def insert(self, element: bytes) -> None:
        offs = self.offsets(element)
        for i in range(self.groups):
            pos = self.family.value(i, element) % self.m
            self.store.set_bit(pos)
            for o in offs:
                self.store.set_bit(pos + o)
        self.n += 1

    def query(self, element: bytes) -> bool:
        offs = self.offsets(element)
        for i in range(self.groups):
            pos = self.family.value(i, element) % self.m
            rel = pos & 7
            window = self.store.read_window(pos - rel, rel + self.max_offset + 1)
            if not (window >> rel) & 1:
                return False
            if any(not (window >> (rel + o)) & 1 for o in offs):
                return False
        return True

    def __contains__(self, element: bytes) -> bool:
        return self.query(element)

    def insert_many(self, records) -> None:
        cols, length = encode_records(records)
        offs = [
            (
                self.family.value_batch(self.groups + j, cols, length)
                % np.uint64(self.span)
            ).astype(np.int64)
            + j * self.span
            + 1
            for j in range(self.t)
        ]
        for i in range(self.groups):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            self.store.set_bits(pos)
            for o in offs:
                self.store.set_bits(pos + o)
        self.n += cols.shape[0]

    def contains_many(self, records) -> np.ndarray:
        cols, length = encode_records(records)
        offs = [
            (
                self.family.value_batch(self.groups + j, cols, length)
                % np.uint64(self.span)
            ).astype(np.int64)
            + j * self.span
            + 1
            for j in range(self.t)
        ]
        alive = np.ones(cols.shape[0], dtype=bool)
        for i in range(self.groups):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            alive &= self.store.get_bits(pos).astype(bool)
            for o in offs:
                alive &= self.store.get_bits(pos + o).astype(bool)
        return alive


def fpr_theoretical(m, k, wbar, n) -> float:
    """False-positive rate model for the paired-offset filter.

    ``p`` is the probability a fixed bit is still zero after ``n``
    inserts; a false positive needs all ``k/2`` base bits set and all
    partner bits set, where a partner can also be hit by the base write
    of another pair, hence the ``p^2 / (wbar - 1)`` correction.
    """
    if n == 0:
        return 0.0
    p = math.exp(-k * n / m)
    return (1 - p) ** (k / 2) * (1 - p + p * p / (wbar - 1)) ** (k / 2)


def gen_fpr(m, k, t, n, wbar) -> float:
    """False-positive rate of the ``t``-shift generalisation.

    Evaluates the grouped model: ``(1-p)^(k/(t+1)) * f_group^(k/(t+1))``
    where ``f_group`` accounts for a base bit plus ``t`` ordered partner
    bits inside one window. ``wbar`` may be ``math.inf``, giving the
    ordinary Bloom limit ``(1-p)^k`` exactly. The resummed ratio in
    ``f_group`` is computed as an explicit geometric sum so the
    removable singularity at ``lam == 1 - p`` costs nothing.
    """
    if k % (t + 1):
        raise ValueError("t + 1 must divide k")
    if not 1 <= t <= k - 1:
        raise ValueError("t must be in [1, k-1]")
    if wbar != math.inf and wbar <= t:
        raise ValueError("wbar must exceed t")
    if n == 0:
        return 0.0
    p = math.exp(-k * n / m)
    x = 1.0 - p
    if wbar == math.inf:
        lam = x
    else:
        lam = 1.0 - p * (wbar - 1 - t) / (wbar - 1)
    geo = sum(x**i * lam ** (t - 1 - i) for i in range(t))
    f_group = x * x * geo / t + p * lam**t
    g = k // (t + 1)
    return x**g * f_group**g


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo, hi, tol=1e-4):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a + b) / 2


class OptimalK(NamedTuple):
    k: float
    k_even: int
    fpr: float


def optimal_k(m, n, wbar=57) -> OptimalK:
    """Golden-section minimum of ``log fpr`` over real k in [1, 4m/n].

    Returns the real optimum, the nearest even usable integer, and the
    model FPR at the real optimum. At ``wbar = 57`` the optimum sits
    near ``0.7009 * m / n``.
    """
    hi = max(2.0, 4.0 * m / n)
    k = _golden_min(lambda kk: math.log(fpr_theoretical(m, kk, wbar, n)), 1.0, hi)
    k_even = max(2, 2 * round(k / 2))
    return OptimalK(k, k_even, fpr_theoretical(m, k, wbar, n))
