"""Bit and counter stores: windows, accounting, saturation, underflow."""

import numpy as np
import pytest

from shiftbf.store import BitStore, CounterStore, CounterUnderflowError


def _reference_window(bits, start, length):
    value = 0
    for j in range(length):
        value |= bits[start + j] << j
    return value


class TestBitStoreBasics:
    def test_set_get_clear_roundtrip(self):
        store = BitStore(100, pad=10)
        for i in (0, 1, 63, 64, 99, 109):
            assert store.get_bit(i) == 0
            store.set_bit(i)
            assert store.get_bit(i) == 1
            store.clear_bit(i)
            assert store.get_bit(i) == 0

    def test_bounds_checked(self):
        store = BitStore(64, pad=4)
        with pytest.raises(IndexError):
            store.get_bit(-1)
        with pytest.raises(IndexError):
            store.set_bit(68)
        with pytest.raises(IndexError):
            store.read_window(60, 9)
        with pytest.raises(ValueError):
            store.read_window(0, 0)

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            BitStore(0)
        with pytest.raises(ValueError):
            BitStore(8, pad=-1)
        with pytest.raises(ValueError):
            BitStore(8, word_bits=16)

    def test_to_bytes_excludes_guard(self):
        store = BitStore(100, pad=28, word_bits=64)
        # 128 bits -> exactly two words; guard words never leak
        assert len(store.to_bytes()) == 16
        store.set_bit(127)
        assert store.to_bytes()[-1] == 0x80

    def test_words_view_is_logical_region_only(self):
        store = BitStore(30, word_bits=32)
        assert store.words.shape == (1,)


class TestWindows:
    @pytest.mark.parametrize("word_bits", [32, 64])
    def test_read_window_matches_bit_list(self, word_bits):
        rng = np.random.default_rng(21)
        store = BitStore(300, pad=56, word_bits=word_bits)
        bits = [0] * store.size
        for i in rng.integers(0, store.size, size=120):
            store.set_bit(int(i))
            bits[int(i)] = 1
        for _ in range(400):
            start = int(rng.integers(0, store.size - 1))
            length = int(rng.integers(1, min(80, store.size - start) + 1))
            assert store.read_window(start, length) == _reference_window(
                bits, start, length
            )

    def test_tail_window_reachable(self):
        store = BitStore(64, pad=8)
        store.set_bit(71)
        assert store.read_window(64, 8) == 0x80

    def test_access_cost_is_words_touched(self):
        store = BitStore(512)
        store.read_window(3, 1)
        assert store.access_counter == 1
        store.read_window(0, 64)
        assert store.access_counter == 2
        store.read_window(0, 65)
        assert store.access_counter == 4
        store.read_window(10, 150)
        assert store.access_counter == 7

    def test_access_cost_32_bit_words(self):
        store = BitStore(256, word_bits=32)
        store.read_window(0, 33)
        assert store.access_counter == 2


class TestBatchBitOps:
    def test_set_bits_equals_scalar(self):
        rng = np.random.default_rng(22)
        idx = rng.integers(0, 500, size=200)
        batch = BitStore(450, pad=50)
        scalar = BitStore(450, pad=50)
        batch.set_bits(idx)
        for i in idx:
            scalar.set_bit(int(i))
        assert batch == scalar

    def test_get_bits_equals_scalar(self):
        rng = np.random.default_rng(23)
        store = BitStore(450, pad=50)
        store.set_bits(rng.integers(0, 500, size=200))
        probe = rng.integers(0, 500, size=300)
        got = store.get_bits(probe)
        for i, b in zip(probe, got):
            assert store.get_bit(int(i)) == int(b)

    def test_set_bits_bounds(self):
        store = BitStore(64)
        with pytest.raises(IndexError):
            store.set_bits([0, 64])
        store.set_bits([])
        assert store.popcount() == 0

    def test_batch_paths_skip_accounting(self):
        store = BitStore(64)
        store.set_bits([1, 2, 3])
        store.get_bits([1, 2, 3])
        assert store.access_counter == 0

    def test_popcount(self):
        store = BitStore(200, pad=8)
        idx = [0, 5, 5, 63, 64, 199, 207]
        store.set_bits(idx)
        assert store.popcount() == len(set(idx))


class TestBitStoreSerde:
    def test_round_trip(self):
        rng = np.random.default_rng(24)
        a = BitStore(300, pad=56)
        a.set_bits(rng.integers(0, 356, size=150))
        b = BitStore(300, pad=56)
        b.load_bytes(a.to_bytes())
        assert a == b

    def test_load_rejects_wrong_length(self):
        store = BitStore(64)
        with pytest.raises(ValueError):
            store.load_bytes(b"\x00" * 7)

    def test_equality_semantics(self):
        a = BitStore(64)
        b = BitStore(64)
        assert a == b
        b.set_bit(3)
        assert a != b
        assert BitStore(64) != BitStore(64, pad=8)
        assert BitStore(64) != BitStore(64, word_bits=32)
        assert a.__eq__(object()) is NotImplemented


class TestCounterStore:
    def test_increment_and_values(self):
        store = CounterStore(10, width=4)
        store.increment([1, 1, 2])
        assert store.value(1) == 2
        assert store.value(2) == 1
        np.testing.assert_array_equal(store.values([0, 1, 2]), [0, 2, 1])

    def test_values_preserves_fancy_shape(self):
        store = CounterStore(10)
        store.increment([3])
        got = store.values(np.array([[0, 3], [3, 0]]))
        np.testing.assert_array_equal(got, [[0, 1], [1, 0]])

    def test_saturation_is_sticky(self):
        store = CounterStore(4, width=2)
        store.increment([0], amount=3)
        assert not store.overflowed
        store.increment([0])
        assert store.overflowed
        assert store.value(0) == 3
        store.decrement([0])
        assert store.overflowed

    def test_underflow_raises_and_restores(self):
        store = CounterStore(4, width=4)
        store.increment([0], amount=2)
        before = store.values([0, 1, 2, 3]).copy()
        with pytest.raises(CounterUnderflowError):
            store.decrement([0, 1])
        np.testing.assert_array_equal(store.values([0, 1, 2, 3]), before)

    def test_underflow_with_duplicate_indices(self):
        store = CounterStore(4, width=4)
        store.increment([0])
        with pytest.raises(CounterUnderflowError):
            store.decrement([0, 0])
        assert store.value(0) == 1

    def test_assign_bounds(self):
        store = CounterStore(4, width=3)
        store.assign([1], [7])
        assert store.value(1) == 7
        with pytest.raises(ValueError):
            store.assign([1], [8])
        with pytest.raises(ValueError):
            store.assign([1], [-1])

    def test_index_bounds(self):
        store = CounterStore(4, pad=2)
        store.increment([5])
        with pytest.raises(IndexError):
            store.increment([6])
        with pytest.raises(IndexError):
            store.value(6)

    def test_nonzero_mask(self):
        store = CounterStore(6)
        store.increment([0, 5])
        np.testing.assert_array_equal(
            store.nonzero_mask([0, 1, 5]), [True, False, True]
        )

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            CounterStore(0)
        with pytest.raises(ValueError):
            CounterStore(4, width=0)
        with pytest.raises(ValueError):
            CounterStore(4, width=17)
        with pytest.raises(ValueError):
            CounterStore(4, pad=-1)

    @pytest.mark.parametrize("width", [4, 8, 12])
    def test_serde_round_trip(self, width):
        rng = np.random.default_rng(25)
        a = CounterStore(40, pad=8, width=width)
        a.increment(rng.integers(0, 48, size=100))
        b = CounterStore(40, pad=8, width=width)
        b.load_bytes(a.to_bytes())
        assert a == b

    def test_load_rejects_wrong_length(self):
        store = CounterStore(8, width=4)
        with pytest.raises(ValueError):
            store.load_bytes(b"\x00" * 7)

    def test_equality_semantics(self):
        a = CounterStore(8)
        b = CounterStore(8)
        assert a == b
        b.increment([0])
        assert a != b
        assert CounterStore(8) != CounterStore(8, width=8)
