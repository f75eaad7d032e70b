"""Synthetic corpora, trace files and the experiment runners."""

import csv
import math

import numpy as np
import pytest

from shiftbf.baselines import ibf_clear_rate
from shiftbf.bench.corpus import (
    CorpusFormatError,
    TraceCorpus,
    read_corpus,
    synthetic,
    write_corpus,
)
from shiftbf.bench.experiments import (
    EXPERIMENTS,
    run_access_and_throughput,
    run_association_clear,
    run_fpr_membership,
    run_multiplicity_cr,
    run_throughput,
)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSyntheticCorpus:
    def test_same_key_same_records(self):
        a = synthetic(100, seed=7, tag=2)
        b = synthetic(100, seed=7, tag=2)
        assert a == b
        np.testing.assert_array_equal(a.records, b.records)

    def test_seed_and_tag_change_the_stream(self):
        base = synthetic(100, seed=7, tag=2)
        assert base != synthetic(100, seed=8, tag=2)
        assert base != synthetic(100, seed=7, tag=3)

    def test_tag_byte_makes_tags_disjoint(self):
        a = synthetic(5000, seed=3, tag=0)
        b = synthetic(5000, seed=3, tag=1)
        assert (a.records[:, 12] == 0).all()
        assert (b.records[:, 12] == 1).all()
        assert not set(iter(a)) & set(iter(b))

    def test_records_are_distinct(self):
        corpus = synthetic(200_000, seed=4, tag=0)
        assert corpus.distinct_count == 200_000

    def test_prefix_stability(self):
        assert synthetic(50, seed=5, tag=0) == TraceCorpus(
            synthetic(200, seed=5, tag=0).records[:50]
        )

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            synthetic(-1, seed=0)
        with pytest.raises(ValueError):
            synthetic(10, seed=0, tag=256)


class TestTraceCorpus:
    def test_container_protocol(self):
        corpus = synthetic(40, seed=9, tag=0)
        assert len(corpus) == 40
        assert corpus[3] == corpus.records[3].tobytes()
        seen = list(corpus)
        assert len(seen) == 40
        assert all(isinstance(rec, bytes) and len(rec) == 13 for rec in seen)

    def test_rejects_non_record_shapes(self):
        with pytest.raises(CorpusFormatError):
            TraceCorpus(np.zeros((4, 12), dtype=np.uint8))

    def test_distinct_keeps_first_appearance(self):
        base = synthetic(10, seed=10, tag=0)
        doubled = TraceCorpus(
            np.concatenate([base.records, base.records[::-1]])
        )
        assert doubled.distinct_count == 10
        assert doubled.distinct() == base

    def test_sample_is_a_subset(self):
        corpus = synthetic(100, seed=11, tag=0)
        picked = corpus.sample(30, seed=1)
        assert len(picked) == 30
        universe = set(iter(corpus))
        assert all(rec in universe for rec in picked)
        with pytest.raises(ValueError):
            corpus.sample(101)

    def test_split_partitions(self):
        corpus = synthetic(100, seed=12, tag=0)
        head, tail = corpus.split(30)
        assert len(head) == 30 and len(tail) == 70
        np.testing.assert_array_equal(
            np.concatenate([head.records, tail.records]), corpus.records
        )


class TestTraceFiles:
    @pytest.mark.parametrize("format", ["raw13", "hexline"])
    def test_round_trip(self, tmp_path, format):
        corpus = synthetic(64, seed=13, tag=0)
        path = tmp_path / f"trace.{format}"
        write_corpus(corpus, path, format)
        assert read_corpus(path, format) == corpus

    def test_raw13_rejects_ragged_length(self, tmp_path):
        path = tmp_path / "trace.raw13"
        path.write_bytes(b"\x00" * 27)
        with pytest.raises(CorpusFormatError, match="multiple of 13"):
            read_corpus(path, "raw13")

    def test_empty_files_are_rejected(self, tmp_path):
        for format in ("raw13", "hexline"):
            path = tmp_path / f"empty.{format}"
            path.write_text("")
            with pytest.raises(CorpusFormatError, match="empty"):
                read_corpus(path, format)

    def test_hexline_skips_blank_lines(self, tmp_path):
        corpus = synthetic(3, seed=14, tag=0)
        lines = [corpus.records[i].tobytes().hex() for i in range(3)]
        path = tmp_path / "trace.hexline"
        path.write_text(f"{lines[0]}\n\n{lines[1]}\n   \n{lines[2]}\n")
        assert read_corpus(path, "hexline") == corpus

    def test_hexline_errors_carry_the_line_number(self, tmp_path):
        good = synthetic(1, seed=15, tag=0)[0].hex()
        path = tmp_path / "trace.hexline"
        path.write_text(f"{good}\n{good}\nzz{good[2:]}\n")
        with pytest.raises(CorpusFormatError, match=":3:"):
            read_corpus(path, "hexline")
        path.write_text(f"{good}\nabcd\n")
        with pytest.raises(CorpusFormatError, match="26 hex digits"):
            read_corpus(path, "hexline")

    def test_unknown_format_is_rejected(self, tmp_path):
        corpus = synthetic(2, seed=16, tag=0)
        with pytest.raises(CorpusFormatError, match="unknown trace format"):
            write_corpus(corpus, tmp_path / "x", "base64")
        write_corpus(corpus, tmp_path / "x", "raw13")
        with pytest.raises(CorpusFormatError, match="unknown trace format"):
            read_corpus(tmp_path / "x", "base64")


class TestFprSweep:
    def test_sweep_structure(self, tmp_path):
        result = run_fpr_membership(
            tmp_path, seed=1, m=2048, k=4, wbar=21,
            n_start=100, n_stop=200, n_step=50, probes=20000, figures=False,
        )
        assert result.csv_path == tmp_path / "fpr_membership.csv"
        assert result.figure_path is None
        assert [row[0] for row in result.rows] == [100, 150, 200]
        for n, emp, theory, rel in result.rows:
            assert 0.0 <= emp <= 1.0
            assert theory > 0.0
            assert rel == abs(emp - theory) / theory
        table = _read_csv(result.csv_path)
        assert table[0] == ["n", "fpr_empirical", "fpr_theory", "relative_error"]
        assert len(table) == 4

    def test_empty_start_row_is_exact(self, tmp_path):
        result = run_fpr_membership(
            tmp_path, seed=2, m=2048, k=4, wbar=21,
            n_start=0, n_stop=100, n_step=100, probes=5000, figures=False,
        )
        n, emp, theory, rel = result.rows[0]
        assert (n, emp, theory, rel) == (0, 0.0, 0.0, 0.0)

    def test_csv_bytes_are_reproducible(self, tmp_path):
        kwargs = dict(
            seed=3, m=2048, k=4, wbar=21,
            n_start=100, n_stop=160, n_step=30, probes=10000, figures=False,
        )
        a = run_fpr_membership(tmp_path / "a", **kwargs)
        b = run_fpr_membership(tmp_path / "b", **kwargs)
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()


class TestAccessAndThroughput:
    def test_instrumented_read_counts(self, tmp_path):
        result = run_access_and_throughput(
            tmp_path, seed=4, n=2000, k=8, wbar=57, ratio=10,
            timed=600, figures=False,
        )
        assert result.csv_path == tmp_path / "mem_accesses.csv"
        rows = {(r[0], r[1]): r for r in result.rows}
        assert len(result.rows) == 6
        # members never short-circuit, so the averages are exact
        assert rows[("shbf-m", "members")][3] == 4.0
        assert rows[("bf", "members")][3] == 8.0
        assert rows[("shbf-a", "balanced_regions")][3] == 8.0
        assert rows[("shbf-a", "balanced_regions")][4] == 10.0
        for name, mix in (("shbf-m", "members"), ("shbf-m", "mixed")):
            assert rows[(name, mix)][4] == rows[(name, mix)][3] + 1
        for name, mix in (("bf", "members"), ("bf", "mixed")):
            assert rows[(name, mix)][4] == rows[(name, mix)][3]
        # mixed probes short-circuit part of the time
        assert rows[("shbf-m", "mixed")][3] < 4.0
        assert rows[("bf", "mixed")][3] < 8.0
        ibf_reads = rows[("ibf", "balanced_regions")][3]
        assert 8.0 < ibf_reads <= 16.0
        for row in result.rows:
            assert row[2] == 600
            assert row[5] > 0

    def test_throughput_alias_writes_its_own_csv(self, tmp_path):
        result = run_throughput(
            tmp_path, seed=5, n=1500, k=8, timed=450, figures=True,
        )
        assert result.csv_path == tmp_path / "throughput.csv"
        assert result.figure_path == tmp_path / "throughput.png"
        assert result.figure_path.stat().st_size > 1024


class TestAssociationClear:
    def test_outcome_tally_structure(self, tmp_path):
        result = run_association_clear(
            tmp_path, seed=6, n1=4000, n2=4000, figures=False,
        )
        assert len(result.rows) == 26
        assert result.notes["n_common"] == 1000
        shbf_rows = [r for r in result.rows if r[0] == "shbf-a" and r[1] != "balanced"]
        assert len(shbf_rows) == 21
        for row in shbf_rows:
            count, total, frac, theory, rel = row[3:8]
            assert count == round(frac * total)
            if theory == 0.0:
                # outcomes incompatible with the true region cannot happen
                assert count == 0
                assert rel == ""
        tallies = result.notes["tallies"]
        assert set(tallies) == {"S1_ONLY", "BOTH", "S2_ONLY"}
        for name, counts in tallies.items():
            assert counts[0] == 0
            assert sum(counts) in (3000, 1000)

    def test_balanced_rows_sit_on_the_models(self, tmp_path):
        result = run_association_clear(
            tmp_path, seed=7, n1=4000, n2=4000, figures=False,
        )
        shbf_clear = next(
            r for r in result.rows if r[0] == "shbf-a" and r[1] == "balanced"
        )
        assert abs(shbf_clear[5] - (1 - 0.5**8) ** 2) < 0.01
        ibf_clear = next(
            r for r in result.rows if r[0] == "ibf" and r[1] == "balanced"
        )
        assert abs(ibf_clear[5] - ibf_clear_rate(8)) < 0.02
        both_row = next(
            r for r in result.rows if r[0] == "ibf" and r[1] == "both"
        )
        # both-set members always hit both filters: never clear
        assert both_row[5] == 0.0

    def test_rejects_oversized_intersection(self, tmp_path):
        with pytest.raises(ValueError):
            run_association_clear(
                tmp_path, n1=100, n2=100, n_common=150, figures=False
            )


class TestMultiplicityCr:
    def test_rates_track_the_model(self, tmp_path):
        result = run_multiplicity_cr(
            tmp_path, seed=8, n=4000, c=20, ks=(8,), figures=False,
        )
        assert len(result.rows) == 3
        members = next(r for r in result.rows if r[1] == "shbf-x" and r[2] == "members")
        non = next(r for r in result.rows if r[2] == "non_members")
        spectral = next(r for r in result.rows if r[1] == "spectral")
        assert members[7] < 0.02
        assert non[7] < 0.02
        assert spectral[6] == "" and spectral[7] == ""
        assert 0.0 < spectral[5] <= 1.0
        # round-robin arrivals cost the minimum-increment counters accuracy
        assert members[5] > spectral[5]

    def test_rejects_counts_beyond_the_counter_range(self, tmp_path):
        with pytest.raises(ValueError):
            run_multiplicity_cr(tmp_path, c=64, spectral_width=6, figures=False)


class TestFigures:
    def test_sweep_renders_a_figure(self, tmp_path):
        result = run_fpr_membership(
            tmp_path, seed=9, m=2048, k=4, wbar=21,
            n_start=100, n_stop=200, n_step=50, probes=5000, figures=True,
        )
        assert result.figure_path == tmp_path / "fpr_membership.png"
        assert result.figure_path.stat().st_size > 1024

    def test_tally_renders_a_figure(self, tmp_path):
        result = run_association_clear(
            tmp_path, seed=10, n1=1000, n2=1000, figures=True,
        )
        assert result.figure_path == tmp_path / "association_clear.png"
        assert result.figure_path.stat().st_size > 1024


def test_experiment_registry_is_complete():
    assert set(EXPERIMENTS) == {
        "fpr_membership",
        "mem_accesses",
        "throughput",
        "association_clear",
        "multiplicity_cr",
    }
