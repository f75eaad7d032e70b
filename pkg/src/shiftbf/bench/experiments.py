"""Experiment runners behind the ``bench`` CLI subcommand.

Each runner builds its structures from a seeded synthetic corpus,
measures, and writes one CSV; when figures are enabled a PNG with the
same stem is rendered next to it. Every row that compares measurement
against a closed-form value carries both numbers plus the relative
error. All runners are deterministic under a fixed seed, including the
CSV bytes; throughput columns are the exception and are only meant for
same-machine ratios.

Query protocol for the timing runs: structures are warmed with a small
untimed pass, then queried single-threaded from Python scalars.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..association import ANSWER_BY_CODE, Region, ShbfA, optimal_m, outcome_probabilities
from ..baselines import LN2, BloomFilter, Ibf, SpectralBloomFilter, ibf_clear_rate
from ..hashing import mix64
from ..membership import ShbfM, fpr_theoretical
from ..multiplicity import ShbfX, correctness_rate, mean_member_correctness_rate
from .corpus import synthetic

EXPERIMENTS = (
    "fpr_membership",
    "mem_accesses",
    "throughput",
    "association_clear",
    "multiplicity_cr",
)


@dataclass
class ExperimentResult:
    name: str
    header: list
    rows: list
    csv_path: Path | None = None
    figure_path: Path | None = None
    notes: dict = field(default_factory=dict)


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.10g}"
    return value


def _write(out_dir, result: ExperimentResult) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{result.name}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(result.header)
        for row in result.rows:
            writer.writerow([_fmt(v) for v in row])
    result.csv_path = path


def _render(result: ExperimentResult, out_dir, figures: bool) -> None:
    if not figures:
        return
    from . import figures as figmod

    render = getattr(figmod, f"render_{result.name}", None)
    if render is None:
        return
    path = Path(out_dir) / f"{result.name}.png"
    render(result, path)
    result.figure_path = path


def run_fpr_membership(
    out_dir,
    seed: int = 0,
    m: int = 22008,
    k: int = 8,
    wbar: int = 57,
    n_start: int = 1000,
    n_stop: int = 1500,
    n_step: int = 20,
    probes: int = 1_000_000,
    figures: bool = True,
) -> ExperimentResult:
    """Incremental-insertion false positive sweep.

    Starts from `n_start` inserted elements and grows the set in
    `n_step` batches, probing the same non-member corpus at each point.
    Probe positions are hashed once up front; only the bit tests repeat.
    """
    members = synthetic(n_stop, seed, tag=0)
    probe_corpus = synthetic(probes, seed, tag=1)
    filt = ShbfM(m, k, wbar, seed=seed)
    bases, offs = filt._batch_positions(probe_corpus.records)

    def empirical() -> float:
        alive = np.ones(probes, dtype=bool)
        for pos in bases:
            alive &= filt.store.get_bits(pos).astype(bool)
            alive &= filt.store.get_bits(pos + offs).astype(bool)
        return float(alive.sum()) / probes

    rows = []
    filt.insert_many(members.records[:n_start])
    points = list(range(n_start, n_stop + 1, n_step))
    for lo, n in zip([None] + points, points):
        if lo is not None:
            filt.insert_many(members.records[lo:n])
        emp = empirical()
        theory = fpr_theoretical(m, k, wbar, n)
        if theory > 0:
            rel = abs(emp - theory) / theory
        else:
            rel = 0.0 if emp == 0 else math.inf
        rows.append([n, emp, theory, rel])

    result = ExperimentResult(
        "fpr_membership",
        ["n", "fpr_empirical", "fpr_theory", "relative_error"],
        rows,
        notes={"m": m, "k": k, "wbar": wbar, "probes": probes},
    )
    _write(out_dir, result)
    _render(result, out_dir, figures)
    return result


def _timed_scalar(queryable, records) -> float:
    for rec in records[:256]:
        queryable(rec.tobytes())
    t0 = time.perf_counter()
    for rec in records:
        queryable(rec.tobytes())
    return time.perf_counter() - t0


def run_access_and_throughput(
    out_dir,
    seed: int = 0,
    n: int = 100_000,
    k: int = 8,
    wbar: int = 57,
    ratio: int = 10,
    timed: int = 20_000,
    figures: bool = True,
    result_name: str = "mem_accesses",
) -> ExperimentResult:
    """Window reads and query rate on a half-member half-non-member mix.

    Single-set filters get m = ratio*n bits; the association pair sizes
    itself for the same element budget. Reads and hash counts come from
    the instrumented scalar path (the warm pass is excluded), so for the
    short-circuiting filters both are exact per-query averages.
    """
    members = synthetic(n, seed, tag=0)
    probes = synthetic(n, seed, tag=1)
    mix = np.concatenate([members.records, probes.records])
    rng = np.random.default_rng(mix64(seed ^ 0xACCE55))
    mix = mix[rng.permutation(len(mix))]

    rows = []
    header = [
        "structure",
        "query_mix",
        "queries",
        "mean_window_reads",
        "mean_hash_ops",
        "queries_per_sec",
    ]

    m = ratio * n
    shbf = ShbfM(m, k, wbar, seed=seed)
    bf = BloomFilter(m, k, seed=seed)
    shbf.insert_many(members.records)
    bf.insert_many(members.records)

    member_sub = members.records[:timed]
    mix_sub = mix[:timed]
    for name, filt in (("shbf-m", shbf), ("bf", bf)):
        for mix_name, sub in (("members", member_sub), ("mixed", mix_sub)):
            filt.store.access_counter = 0
            seconds = _timed_scalar(filt.query, sub)
            # the warm pass is re-run inside the timed count
            reads = filt.store.access_counter / (len(sub) + 256)
            hashes = reads + 1 if name == "shbf-m" else reads
            rows.append([name, mix_name, len(sub), reads, hashes, len(sub) / seconds])

    # association pair, balanced three-region mix
    common = n // 4
    both = synthetic(common, seed, tag=2)
    only1 = synthetic(n - common, seed, tag=3)
    only2 = synthetic(n - common, seed, tag=4)
    sa = ShbfA(
        max(64, round(optimal_m(n, n, common, k))), k, wbar, seed=seed
    )
    sa.ingest_regions(only1.records, both.records, only2.records)
    ibf = Ibf(
        max(64, round(n * k / LN2)), max(64, round(n * k / LN2)), k, seed=seed
    )
    ibf.bf1.insert_many(np.concatenate([only1.records, both.records]))
    ibf.bf2.insert_many(np.concatenate([only2.records, both.records]))

    per_region = timed // 3
    balanced = np.concatenate(
        [
            only1.records[:per_region],
            both.records[:per_region],
            only2.records[:per_region],
        ]
    )
    sa.store.access_counter = 0
    seconds = _timed_scalar(sa.query, balanced)
    rows.append(
        [
            "shbf-a",
            "balanced_regions",
            len(balanced),
            sa.store.access_counter / (len(balanced) + 256),
            float(k + 2),
            len(balanced) / seconds,
        ]
    )
    ibf.bf1.store.access_counter = 0
    ibf.bf2.store.access_counter = 0
    seconds = _timed_scalar(ibf.query, balanced)
    reads = ibf.access_counter / (len(balanced) + 256)
    rows.append(
        ["ibf", "balanced_regions", len(balanced), reads, reads, len(balanced) / seconds]
    )

    result = ExperimentResult(
        result_name,
        header,
        rows,
        notes={"n": n, "k": k, "m": m, "wbar": wbar},
    )
    _write(out_dir, result)
    _render(result, out_dir, figures)
    return result


def run_throughput(out_dir, seed: int = 0, **kwargs) -> ExperimentResult:
    """Alias: reads and throughput come from the same instrumented run."""
    kwargs.setdefault("result_name", "throughput")
    return run_access_and_throughput(out_dir, seed=seed, **kwargs)


def run_association_clear(
    out_dir,
    seed: int = 0,
    n1: int = 100_000,
    n2: int = 100_000,
    n_common: int | None = None,
    k: int = 8,
    wbar: int = 57,
    figures: bool = True,
) -> ExperimentResult:
    """Outcome distribution for set-association queries.

    Builds two overlapping sets (intersection defaults to a quarter of
    each), queries every stored element grouped by its true region, and
    tallies the seven possible answers against their closed-form
    probabilities. An inverted pair of plain Bloom filters runs the
    same queries for the clear-answer comparison.
    """
    if n_common is None:
        n_common = n1 // 4
    if n_common > min(n1, n2):
        raise ValueError("intersection larger than a set")
    both = synthetic(n_common, seed, tag=2)
    only1 = synthetic(n1 - n_common, seed, tag=3)
    only2 = synthetic(n2 - n_common, seed, tag=4)

    m = max(64, round(optimal_m(n1, n2, n_common, k)))
    sa = ShbfA(m, k, wbar, seed=seed)
    sa.ingest_regions(only1.records, both.records, only2.records)
    m_ibf1 = max(64, round(n1 * k / LN2))
    m_ibf2 = max(64, round(n2 * k / LN2))
    ibf = Ibf(m_ibf1, m_ibf2, k, seed=seed)
    ibf.bf1.insert_many(np.concatenate([only1.records, both.records]))
    ibf.bf2.insert_many(np.concatenate([only2.records, both.records]))

    region_records = {
        Region.S1_ONLY: only1.records,
        Region.BOTH: both.records,
        Region.S2_ONLY: only2.records,
    }
    probs = outcome_probabilities(k)
    region_names = {
        Region.S1_ONLY: "s1_only",
        Region.BOTH: "both",
        Region.S2_ONLY: "s2_only",
    }

    header = [
        "structure",
        "region",
        "outcome",
        "count",
        "region_queries",
        "fraction",
        "theory_fraction",
        "relative_error",
    ]
    rows = []
    tallies = {}
    for region, recs in region_records.items():
        codes = sa.query_codes(recs)
        counts = np.bincount(codes, minlength=8)
        tallies[region] = counts
        total = len(recs)
        for code in range(1, 8):
            answer = ANSWER_BY_CODE[code]
            theory = probs[answer] if region in answer.claims else 0.0
            frac = counts[code] / total
            rel = abs(frac - theory) / theory if theory > 0 else ""
            rows.append(
                [
                    "shbf-a",
                    region_names[region],
                    answer.name.lower(),
                    int(counts[code]),
                    total,
                    frac,
                    theory,
                    rel,
                ]
            )

    clear_codes = (1, 2, 4)
    clear_frac = float(
        np.mean(
            [
                sum(tallies[r][c] for c in clear_codes) / len(region_records[r])
                for r in region_records
            ]
        )
    )
    theory_clear = (1 - 0.5**k) ** 2
    total_queries = sum(len(r) for r in region_records.values())
    rows.append(
        [
            "shbf-a",
            "balanced",
            "clear",
            "",
            total_queries,
            clear_frac,
            theory_clear,
            abs(clear_frac - theory_clear) / theory_clear,
        ]
    )

    ibf_clear = []
    for region, recs in region_records.items():
        in1, in2 = ibf.query_many(recs)
        clear = int(np.count_nonzero(in1 ^ in2))
        frac = clear / len(recs)
        theory = 0.0 if region is Region.BOTH else 1 - 0.5**k
        rows.append(
            [
                "ibf",
                region_names[region],
                "clear",
                clear,
                len(recs),
                frac,
                theory,
                abs(frac - theory) / theory if theory else "",
            ]
        )
        ibf_clear.append(frac)
    theory = ibf_clear_rate(k)
    mean_clear = float(np.mean(ibf_clear))
    rows.append(
        [
            "ibf",
            "balanced",
            "clear",
            "",
            total_queries,
            mean_clear,
            theory,
            abs(mean_clear - theory) / theory,
        ]
    )

    result = ExperimentResult(
        "association_clear",
        header,
        rows,
        notes={
            "n1": n1,
            "n2": n2,
            "n_common": n_common,
            "k": k,
            "m": m,
            "tallies": {r.name: tallies[r].tolist() for r in tallies},
        },
    )
    _write(out_dir, result)
    _render(result, out_dir, figures)
    return result


def run_multiplicity_cr(
    out_dir,
    seed: int = 0,
    n: int = 100_000,
    c: int = 57,
    ks=(8, 10, 12, 14, 16),
    mem_factor: float = 1.5,
    spectral_width: int = 6,
    figures: bool = True,
) -> ExperimentResult:
    """Correctness rate of multiplicity queries at matched memory.

    Multiplicities are uniform on 1..c. For each k the shifting filter
    gets mem_factor * n * k / ln2 bits and the spectral filter the same
    bit budget divided into `spectral_width`-bit counters. Occurrences
    arrive round-robin (one per live element per round), the natural
    order for a stream of interleaved flows; arrival order changes
    nothing for the shifting filter but matters for minimum-increment
    counters, which do markedly better when each element's occurrences
    arrive back to back.
    """
    if c > (1 << spectral_width) - 1:
        raise ValueError("spectral counters too narrow for c")
    members = synthetic(n, seed, tag=0)
    probes = synthetic(n, seed, tag=1)
    rng = np.random.default_rng(mix64(seed ^ 0x3C7))
    counts = rng.integers(1, c + 1, size=n)
    occurrences = {members[i]: int(counts[i]) for i in range(n)}

    header = [
        "k",
        "structure",
        "population",
        "queries",
        "correct",
        "cr_empirical",
        "cr_theory",
        "relative_error",
    ]
    rows = []
    for k in ks:
        bits = round(mem_factor * n * k / math.log(2))
        sx = ShbfX.build(occurrences, m=bits, k=k, c=c, seed=seed)
        reported = sx.query_many(members.records)
        correct = int(np.count_nonzero(reported == counts))
        emp = correct / n
        theory = mean_member_correctness_rate(bits, k, c, n)
        rows.append(
            [k, "shbf-x", "members", n, correct, emp, theory, abs(emp - theory) / theory]
        )

        miss = sx.query_many(probes.records)
        correct0 = int(np.count_nonzero(miss == 0))
        emp0 = correct0 / n
        theory0 = correctness_rate(bits, k, c, n, 0)
        rows.append(
            [
                k,
                "shbf-x",
                "non_members",
                n,
                correct0,
                emp0,
                theory0,
                abs(emp0 - theory0) / theory0,
            ]
        )

        counters = max(1, bits // spectral_width)
        sp = SpectralBloomFilter(counters, k, width=spectral_width, seed=seed)
        for arrival_round in range(1, c + 1):
            live = members.records[counts >= arrival_round]
            if len(live):
                sp.insert_many(live)
        sp_rep = sp.query_many(members.records)
        sp_correct = int(np.count_nonzero(sp_rep == counts))
        rows.append([k, "spectral", "members", n, sp_correct, sp_correct / n, "", ""])

    result = ExperimentResult(
        "multiplicity_cr",
        header,
        rows,
        notes={"n": n, "c": c, "mem_factor": mem_factor},
    )
    _write(out_dir, result)
    _render(result, out_dir, figures)
    return result


RUNNERS = {
    "fpr_membership": run_fpr_membership,
    "mem_accesses": run_access_and_throughput,
    "throughput": run_throughput,
    "association_clear": run_association_clear,
    "multiplicity_cr": run_multiplicity_cr,
}
