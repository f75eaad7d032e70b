"""Association queries: which of two sets does an element belong to?

Every element of ``S1 | S2`` is stored exactly once, at a per-element
offset that encodes its region: offset 0 for ``S1 - S2``, ``o1(e)`` for
``S1 & S2`` and ``o2(e)`` for ``S2 - S1``, with ``0 < o1 < o2 <= wbar-1``.
A query reads, per hash position, all three candidate bits from a single
window fetch and combines the ``k`` reads into three conjunctions. The
true region's conjunction is always satisfied, so answers may be vague
but are never wrong.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .hashing import HashFamily, encode_records
from .store import BitStore, CounterStore

LN2 = math.log(2.0)


class Region(enum.Enum):
    S1_ONLY = 1
    BOTH = 2
    S2_ONLY = 3


class AssociationAnswer(enum.Enum):
    """The seven possible query outcomes, from razor sharp to vacuous."""

    S1_ONLY = 1
    BOTH = 2
    S2_ONLY = 3
    S1_UNSURE_S2 = 4
    S2_UNSURE_S1 = 5
    S1_OR_S2_ONLY = 6
    UNKNOWN = 7

    @property
    def claims(self) -> frozenset:
        return _CLAIMS[self]

    @property
    def is_clear(self) -> bool:
        return len(_CLAIMS[self]) == 1


_CLAIMS = {
    AssociationAnswer.S1_ONLY: frozenset({Region.S1_ONLY}),
    AssociationAnswer.BOTH: frozenset({Region.BOTH}),
    AssociationAnswer.S2_ONLY: frozenset({Region.S2_ONLY}),
    AssociationAnswer.S1_UNSURE_S2: frozenset({Region.S1_ONLY, Region.BOTH}),
    AssociationAnswer.S2_UNSURE_S1: frozenset({Region.BOTH, Region.S2_ONLY}),
    AssociationAnswer.S1_OR_S2_ONLY: frozenset({Region.S1_ONLY, Region.S2_ONLY}),
    AssociationAnswer.UNKNOWN: frozenset(
        {Region.S1_ONLY, Region.BOTH, Region.S2_ONLY}
    ),
}

# outcome code = base | mid << 1 | far << 2 over the three conjunctions
ANSWER_BY_CODE = {
    0b001: AssociationAnswer.S1_ONLY,
    0b010: AssociationAnswer.BOTH,
    0b100: AssociationAnswer.S2_ONLY,
    0b011: AssociationAnswer.S1_UNSURE_S2,
    0b110: AssociationAnswer.S2_UNSURE_S1,
    0b101: AssociationAnswer.S1_OR_S2_ONLY,
    0b111: AssociationAnswer.UNKNOWN,
}


def optimal_m(n1: int, n2: int, n_common: int, k: int) -> float:
    """Bit count that puts the array at half load for these set sizes."""
    return (n1 + n2 - n_common) * k / LN2


def outcome_probabilities(k: int) -> dict:
    """Outcome probabilities at half load, conditioned on the true region.

    With ``q = 0.5**k`` the chance a wrong conjunction passes, the clear
    outcome has probability ``(1-q)**2``, each compatible two-way outcome
    ``q*(1-q)``, and the vacuous outcome ``q**2``; per region they sum to
    clear + 2*partial + unknown = 1.
    """
    q = 0.5**k
    clear = (1 - q) ** 2
    partial = q * (1 - q)
    return {
        AssociationAnswer.S1_ONLY: clear,
        AssociationAnswer.BOTH: clear,
        AssociationAnswer.S2_ONLY: clear,
        AssociationAnswer.S1_UNSURE_S2: partial,
        AssociationAnswer.S2_UNSURE_S1: partial,
        AssociationAnswer.S1_OR_S2_ONLY: partial,
        AssociationAnswer.UNKNOWN: q * q,
    }


class ShbfA:
    """Two-set association filter; build once, query with k window reads."""

    def __init__(self, m, k, wbar=57, word_bits=64, seed=0):
        if k < 1:
            raise ValueError("k must be positive")
        if wbar < 5:
            raise ValueError("wbar must be at least 5 to split the offset window")
        if wbar > word_bits - 7:
            raise ValueError(f"wbar must not exceed {word_bits - 7}")
        self.m = m
        self.k = k
        self.wbar = wbar
        self.half = (wbar - 1) // 2
        self.max_offset = 2 * self.half
        self.store = BitStore(m, pad=self.max_offset, word_bits=word_bits)
        self.family = HashFamily(k + 2, seed)
        self.t1: set = set()
        self.t2: set = set()

    @classmethod
    def build(cls, s1, s2, m=None, k=8, wbar=57, word_bits=64, seed=0):
        s1, s2 = set(s1), set(s2)
        if m is None:
            m = max(64, round(optimal_m(len(s1), len(s2), len(s1 & s2), k)))
        filt = cls(m, k, wbar, word_bits, seed)
        filt.t1 = s1
        filt.t2 = s2
        union = list(s1 | s2)
        if union:
            filt._store_batch(union)
        return filt

    def offsets(self, element: bytes) -> tuple[int, int]:
        o1 = self.family.value(self.k, element) % self.half + 1
        o2 = o1 + self.family.value(self.k + 1, element) % self.half + 1
        return o1, o2

    def _region_offset(self, element, o1, o2):
        in1 = element in self.t1
        in2 = element in self.t2
        if in1 and in2:
            return o1
        if in1:
            return 0
        if in2:
            return o2
        raise KeyError("element is in neither set")

    def _store_batch(self, elements) -> None:
        try:
            cols, length = encode_records(elements)
        except ValueError:
            for e in elements:
                o1, o2 = self.offsets(e)
                delta = self._region_offset(e, o1, o2)
                for i in range(self.k):
                    self.store.set_bit(self.family.value(i, e) % self.m + delta)
            return
        o1 = (
            self.family.value_batch(self.k, cols, length) % np.uint64(self.half)
        ).astype(np.int64) + 1
        o2 = o1 + (
            self.family.value_batch(self.k + 1, cols, length) % np.uint64(self.half)
        ).astype(np.int64) + 1
        delta = np.empty(len(elements), dtype=np.int64)
        for row, e in enumerate(elements):
            in1 = e in self.t1
            in2 = e in self.t2
            delta[row] = o1[row] if (in1 and in2) else (0 if in1 else o2[row])
        for i in range(self.k):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            self.store.set_bits(pos + delta)

    def ingest_regions(self, only1, both, only2) -> None:
        """Bulk-load pre-split region record arrays.

        Skips the exact side tables (the caller owns ground truth), so
        the filter answers queries but add()/save() see empty tables.
        """
        for which, records in enumerate((only1, both, only2)):
            records = np.asarray(records)
            if records.shape[0] == 0:
                continue
            cols, length = encode_records(records)
            if which == 0:
                delta = np.zeros(cols.shape[0], dtype=np.int64)
            else:
                delta = (
                    self.family.value_batch(self.k, cols, length)
                    % np.uint64(self.half)
                ).astype(np.int64) + 1
                if which == 2:
                    delta += (
                        self.family.value_batch(self.k + 1, cols, length)
                        % np.uint64(self.half)
                    ).astype(np.int64) + 1
            for i in range(self.k):
                pos = (
                    self.family.value_batch(i, cols, length) % np.uint64(self.m)
                ).astype(np.int64)
                self.store.set_bits(pos + delta)

    def query(self, element: bytes):
        """Classify an element of the union; ``None`` means it provably
        belongs to neither set (possible only for out-of-union probes)."""
        o1, o2 = self.offsets(element)
        base = mid = far = True
        for i in range(self.k):
            pos = self.family.value(i, element) % self.m
            rel = pos & 7
            window = self.store.read_window(pos - rel, rel + self.max_offset + 1)
            base = base and bool((window >> rel) & 1)
            mid = mid and bool((window >> (rel + o1)) & 1)
            far = far and bool((window >> (rel + o2)) & 1)
        code = base | mid << 1 | far << 2
        return ANSWER_BY_CODE.get(code)

    def query_codes(self, records) -> np.ndarray:
        """Vectorised outcome codes (0 for the all-failed case)."""
        cols, length = encode_records(records)
        o1 = (
            self.family.value_batch(self.k, cols, length) % np.uint64(self.half)
        ).astype(np.int64) + 1
        o2 = o1 + (
            self.family.value_batch(self.k + 1, cols, length) % np.uint64(self.half)
        ).astype(np.int64) + 1
        n = cols.shape[0]
        base = np.ones(n, dtype=bool)
        mid = np.ones(n, dtype=bool)
        far = np.ones(n, dtype=bool)
        for i in range(self.k):
            pos = (
                self.family.value_batch(i, cols, length) % np.uint64(self.m)
            ).astype(np.int64)
            base &= self.store.get_bits(pos).astype(bool)
            mid &= self.store.get_bits(pos + o1).astype(bool)
            far &= self.store.get_bits(pos + o2).astype(bool)
        return (
            base.astype(np.uint8)
            | mid.astype(np.uint8) << 1
            | far.astype(np.uint8) << 2
        )


class CShbfA(ShbfA):
    """Counting association filter supporting region changes and removal."""

    def __init__(self, m, k, wbar=57, width=4, word_bits=64, seed=0):
        super().__init__(m, k, wbar, word_bits, seed)
        self.counters = CounterStore(m, pad=self.max_offset, width=width)

    @classmethod
    def build(cls, s1, s2, m=None, k=8, wbar=57, width=4, word_bits=64, seed=0):
        s1, s2 = set(s1), set(s2)
        if m is None:
            m = max(64, round(optimal_m(len(s1), len(s2), len(s1 & s2), k)))
        filt = cls(m, k, wbar, width, word_bits, seed)
        for e in s1:
            filt.add(e, 1)
        for e in s2:
            filt.add(e, 2)
        return filt

    def _table(self, set_index):
        if set_index not in (1, 2):
            raise ValueError("set_index must be 1 or 2")
        return self.t1 if set_index == 1 else self.t2

    def _indices(self, element, delta):
        return [
            self.family.value(i, element) % self.m + delta for i in range(self.k)
        ]

    def _current_offset(self, element, o1, o2):
        in1 = element in self.t1
        in2 = element in self.t2
        if not (in1 or in2):
            return None
        return o1 if (in1 and in2) else (0 if in1 else o2)

    def _inc(self, element, delta):
        idx = self._indices(element, delta)
        self.counters.increment(idx)
        self.store.set_bits(idx)

    def _dec(self, element, delta):
        idx = self._indices(element, delta)
        self.counters.decrement(idx)
        for i in idx:
            if self.counters.value(i) == 0:
                self.store.clear_bit(i)

    def add(self, element: bytes, set_index: int) -> None:
        """Add ``element`` to set 1 or 2, re-encoding its region if it moved."""
        table = self._table(set_index)
        if element in table:
            return
        o1, o2 = self.offsets(element)
        old = self._current_offset(element, o1, o2)
        table.add(element)
        new = self._current_offset(element, o1, o2)
        if old is not None:
            self._dec(element, old)
        self._inc(element, new)

    def remove(self, element: bytes, set_index: int) -> None:
        table = self._table(set_index)
        if element not in table:
            raise KeyError(f"element not recorded in set {set_index}")
        o1, o2 = self.offsets(element)
        old = self._current_offset(element, o1, o2)
        table.discard(element)
        new = self._current_offset(element, o1, o2)
        self._dec(element, old)
        if new is not None:
            self._inc(element, new)
