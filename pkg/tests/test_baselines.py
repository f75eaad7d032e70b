"""Baseline filters: Bloom, counting, spectral, independent-pair."""

import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from oracles import NaiveBloom, NaiveSpectral
from shiftbf.association import Region
from shiftbf.baselines import (
    BloomFilter,
    CountingBloomFilter,
    Ibf,
    IbfAnswer,
    SpectralBloomFilter,
    _pour,
    bf_fpr,
    bf_min_fpr,
    bf_optimal_k,
    ibf_clear_rate,
)
from shiftbf.bench.corpus import synthetic
from shiftbf.hashing import HashFamily
from shiftbf.store import CounterUnderflowError

getcontext().prec = 50


def _all_two_byte_probes():
    a = np.arange(65536, dtype=np.uint32)
    return np.stack([(a >> 8) & 0xFF, a & 0xFF], axis=1).astype(np.uint8)


class TestBloomFilter:
    def test_every_two_byte_probe_agrees_with_the_naive_model(self):
        rng = np.random.default_rng(71)
        members = [
            int(v).to_bytes(2, "big")
            for v in rng.choice(65536, size=10, replace=False)
        ]
        filt = BloomFilter(96, 4, seed=5)
        naive = NaiveBloom(96, 4, seed=5)
        for e in members:
            filt.insert(e)
            naive.insert(e)
        probes = _all_two_byte_probes()
        got = filt.contains_many(probes)
        want = np.fromiter(
            (naive.query(bytes(row)) for row in probes), dtype=bool, count=65536
        )
        np.testing.assert_array_equal(got, want)
        for row in probes[rng.integers(0, 65536, size=300)]:
            assert filt.query(bytes(row)) == naive.query(bytes(row))

    def test_no_false_negatives(self):
        corpus = synthetic(400, seed=47, tag=0)
        filt = BloomFilter(4096, 6, seed=6)
        filt.insert_many(corpus.records)
        assert filt.contains_many(corpus.records).all()
        for i in range(0, 400, 13):
            assert corpus[i] in filt

    def test_scalar_build_equals_bulk_build(self):
        corpus = synthetic(300, seed=48, tag=0)
        scalar = BloomFilter(4096, 6, seed=7)
        for rec in corpus:
            scalar.insert(rec)
        bulk = BloomFilter(4096, 6, seed=7)
        bulk.insert_many(corpus.records)
        assert scalar.store == bulk.store
        assert scalar.n == bulk.n == 300

    def test_member_query_reads_one_bit_per_hash(self):
        corpus = synthetic(200, seed=49, tag=0)
        filt = BloomFilter(4096, 8, seed=8)
        filt.insert_many(corpus.records)
        filt.store.access_counter = 0
        for i in range(100):
            filt.query(corpus[i])
        assert filt.store.access_counter == 100 * 8
        # misses short-circuit
        filt.store.access_counter = 0
        for rec in synthetic(100, 49, tag=1):
            filt.query(rec)
        assert 100 <= filt.store.access_counter <= 100 * 8

    def test_rejects_zero_hashes(self):
        with pytest.raises(ValueError):
            BloomFilter(64, 0)


class TestBloomModel:
    def test_matches_high_precision_reference(self):
        for m, k, n in [(22008, 8, 1000), (100000, 10, 10000), (5000, 4, 800)]:
            f0 = float(
                (1 - (-Decimal(k) * n / m).exp()) ** k
            )
            assert math.isclose(bf_fpr(m, k, n), f0, rel_tol=1e-12)

    def test_empty_filter_never_errs(self):
        assert bf_fpr(1000, 8, 0) == 0.0

    def test_instance_passthrough(self):
        filt = BloomFilter(4096, 6, seed=9)
        filt.insert_many(synthetic(100, 50, tag=0).records)
        assert filt.fpr() == bf_fpr(4096, 6, 100)
        assert filt.fpr(250) == bf_fpr(4096, 6, 250)

    def test_optimal_k_is_ln2_times_the_bit_budget(self):
        assert math.isclose(bf_optimal_k(1000, 100), math.log(2) * 10, rel_tol=1e-15)

    def test_min_fpr_is_the_model_at_the_optimal_k(self):
        for m, n in [(1000, 100), (6000, 400), (22008, 1000)]:
            at_opt = bf_fpr(m, bf_optimal_k(m, n), n)
            assert math.isclose(bf_min_fpr(m, n), at_opt, rel_tol=1e-12)
            assert math.isclose(bf_min_fpr(m, n), 0.6185 ** (m / n), rel_tol=1e-3)


class TestCountingBloomFilter:
    def test_deletes_return_to_the_keep_only_state(self):
        keep = list(synthetic(60, seed=51, tag=0))
        churn = list(synthetic(60, seed=51, tag=1))
        filt = CountingBloomFilter(512, 4, seed=10)
        for e in keep + churn:
            filt.insert(e)
        for e in churn:
            assert e in filt
        for e in churn:
            filt.delete(e)
        fresh = CountingBloomFilter(512, 4, seed=10)
        for e in keep:
            fresh.insert(e)
        assert filt.counters == fresh.counters
        assert filt.n == fresh.n == 60
        for e in keep:
            assert e in filt

    def test_delete_from_empty_raises_and_restores(self):
        filt = CountingBloomFilter(512, 4, seed=11)
        with pytest.raises(CounterUnderflowError):
            filt.delete(b"0123456789abc")
        assert filt.n == 0
        assert not filt.counters.nonzero_mask(np.arange(512)).any()


class TestSpectralPour:
    def _literal(self, values, count, cap):
        vals = values.astype(np.int64).copy()
        clamped = False
        for _ in range(count):
            mn = vals.min()
            if mn >= cap:
                clamped = True
                break
            vals[vals == mn] += 1
        return vals, clamped

    def test_fast_forward_equals_stepwise_pouring(self):
        rng = np.random.default_rng(72)
        for _ in range(300):
            cap = int(rng.choice([15, 63]))
            k = int(rng.integers(1, 9))
            values = rng.integers(0, cap + 1, size=k)
            count = int(rng.integers(0, cap * k + 2))
            got, got_clamped = _pour(values.copy(), count, cap)
            want, want_clamped = self._literal(values, count, cap)
            np.testing.assert_array_equal(got, want)
            assert got_clamped == want_clamped

    def test_duplicate_values_move_together(self):
        # [2,2,5]: both minima rise per occurrence, merging at 5 after 3
        got, clamped = _pour(np.array([2, 2, 5]), 3, 63)
        np.testing.assert_array_equal(got, [5, 5, 5])
        assert not clamped
        got, clamped = _pour(np.array([2, 2, 5]), 4, 63)
        np.testing.assert_array_equal(got, [6, 6, 6])
        assert not clamped


class TestSpectralFilter:
    def test_matches_the_naive_stepper(self):
        rng = np.random.default_rng(73)
        filt = SpectralBloomFilter(512, 4, width=6, seed=12)
        naive = NaiveSpectral(512, 4, cap=63, seed=12)
        members = list(synthetic(80, seed=52, tag=0))
        for e in members:
            cnt = int(rng.integers(1, 71))
            filt.insert(e, cnt)
            naive.insert(e, cnt)
        np.testing.assert_array_equal(
            filt.counters.values(np.arange(512)), np.asarray(naive.counts)
        )
        for e in members + list(synthetic(100, 52, tag=1)):
            assert filt.query(e) == naive.query(e)
        assert filt.counters.overflowed

    def test_counted_bulk_equals_repeated_inserts(self):
        rng = np.random.default_rng(74)
        members = list(synthetic(50, seed=53, tag=0))
        counted = {e: int(rng.integers(1, 12)) for e in members}
        bulk = SpectralBloomFilter(1024, 4, seed=13)
        bulk.insert_counted(counted)
        stepped = SpectralBloomFilter(1024, 4, seed=13)
        for e, cnt in counted.items():
            for _ in range(cnt):
                stepped.insert(e)
        assert bulk.counters == stepped.counters
        stream = [e for e, cnt in counted.items() for _ in range(cnt)]
        streamed = SpectralBloomFilter(1024, 4, seed=13)
        streamed.insert_counted(stream)
        assert streamed.counters == stepped.counters

    def test_simultaneous_batch_judges_ties_against_the_pre_state(self):
        corpus = synthetic(300, seed=54, tag=0)
        filt = SpectralBloomFilter(1500, 4, seed=14)
        filt.insert_many(corpus.records[:150])
        family = HashFamily(4, 14)
        pre = filt.counters.values(np.arange(1500)).copy()
        delta = np.zeros(1500, dtype=np.int64)
        for i in range(150, 300):
            rec = corpus[i]
            pos = [family.value(h, rec) % 1500 for h in range(4)]
            vals = pre[pos]
            mn = vals.min()
            for p, v in zip(pos, vals):
                if v == mn:
                    delta[p] += 1
        filt.insert_many(corpus.records[150:])
        np.testing.assert_array_equal(
            filt.counters.values(np.arange(1500)), pre + delta
        )

    def test_round_robin_stream_never_underestimates(self):
        rng = np.random.default_rng(75)
        corpus = synthetic(400, seed=55, tag=0)
        counts = rng.integers(1, 21, size=400)
        filt = SpectralBloomFilter(3000, 4, seed=15)
        for arrival_round in range(1, 21):
            live = corpus.records[counts >= arrival_round]
            if len(live):
                filt.insert_many(live)
        got = filt.query_many(corpus.records)
        assert (got >= counts).all()

    def test_batch_query_equals_scalar(self):
        corpus = synthetic(200, seed=56, tag=0)
        filt = SpectralBloomFilter(1024, 4, seed=16)
        filt.insert_counted(list(corpus) * 3)
        mixed = np.concatenate([corpus.records, synthetic(200, 56, tag=1).records])
        got = filt.query_many(mixed)
        for i in range(0, len(mixed), 7):
            assert int(got[i]) == filt.query(mixed[i].tobytes())

    def test_never_exceeds_plain_counting_occupancy(self):
        """Minimum increment can only skip updates a counting filter
        would apply, so its counters are dominated pointwise."""
        rng = np.random.default_rng(76)
        pool = list(synthetic(120, seed=57, tag=0))
        spectral = SpectralBloomFilter(1024, 4, width=8, seed=17)
        counting = CountingBloomFilter(1024, 4, width=8, seed=17)
        for _ in range(600):
            e = pool[int(rng.integers(0, len(pool)))]
            spectral.insert(e)
            counting.insert(e)
        everything = np.arange(1024)
        assert (
            spectral.counters.values(everything)
            <= counting.counters.values(everything)
        ).all()


class TestIndependentPair:
    def test_answer_truth_table(self):
        assert IbfAnswer(True, False).claims == frozenset({Region.S1_ONLY})
        assert IbfAnswer(False, True).claims == frozenset({Region.S2_ONLY})
        assert IbfAnswer(True, True).claims == frozenset(Region)
        assert IbfAnswer(False, False).claims == frozenset()
        assert IbfAnswer(True, False).is_clear
        assert IbfAnswer(False, True).is_clear
        assert not IbfAnswer(True, True).is_clear
        assert not IbfAnswer(False, False).is_clear

    def test_union_members_are_never_contradicted(self):
        only1 = synthetic(4000, seed=58, tag=3)
        both = synthetic(4000, seed=58, tag=2)
        only2 = synthetic(4000, seed=58, tag=4)
        filt = Ibf.build(
            list(only1) + list(both), list(both) + list(only2), k=8, seed=18
        )
        truth = {
            Region.S1_ONLY: only1,
            Region.BOTH: both,
            Region.S2_ONLY: only2,
        }
        for region, corpus in truth.items():
            in1, in2 = filt.query_many(corpus.records)
            claims_exist = in1 | in2
            assert claims_exist.all()
            for flag1, flag2 in zip(in1[:200], in2[:200]):
                answer = IbfAnswer(bool(flag1), bool(flag2))
                assert region in answer.claims

    def test_balanced_clear_rate_matches_the_model(self):
        n = 30000
        only1 = synthetic(n, seed=59, tag=3)
        both = synthetic(n, seed=59, tag=2)
        only2 = synthetic(n, seed=59, tag=4)
        filt = Ibf.build(
            list(only1) + list(both), list(both) + list(only2), k=8, seed=19
        )
        clear = 0
        for corpus in (only1, both, only2):
            in1, in2 = filt.query_many(corpus.records)
            clear += int((in1 ^ in2).sum())
        rate = clear / (3 * n)
        assert math.isclose(ibf_clear_rate(8), 2 / 3 * (1 - 0.5**8), rel_tol=1e-15)
        assert abs(rate - ibf_clear_rate(8)) < 0.02

    def test_scalar_query_and_accounting(self):
        both = list(synthetic(50, seed=60, tag=2))
        filt = Ibf.build(both, both, k=8, m1=4096, m2=4096, seed=20)
        filt.bf1.store.access_counter = 0
        filt.bf2.store.access_counter = 0
        answer = filt.query(both[0])
        assert answer.in_s1 and answer.in_s2
        assert filt.access_counter == 16

    def test_sides_hash_independently(self):
        filt = Ibf(4096, 4096, 8, seed=21)
        e = b"0123456789abc"
        pos1 = [filt.bf1.family.value(i, e) % 4096 for i in range(8)]
        pos2 = [filt.bf2.family.value(i, e) % 4096 for i in range(8)]
        assert pos1 != pos2
