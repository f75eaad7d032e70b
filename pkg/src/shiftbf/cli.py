"""Command line front end.

Subcommands:
  build      construct a filter from a trace (or synthetic corpus) and save it
  query      load a saved filter and answer queries from a trace
  bench      run a named experiment, writing CSV (and PNG unless disabled)
  ingest     validate/convert a trace file, reporting record counts
  serialize  inspect a saved filter and optionally rewrite it

Exit codes: 0 on success, 2 on argument or input validation problems.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from . import serial
from .association import ShbfA
from .baselines import BloomFilter, CountingBloomFilter, Ibf, SpectralBloomFilter
from .bench.corpus import CorpusFormatError, read_corpus, synthetic, write_corpus
from .bench.experiments import EXPERIMENTS, RUNNERS
from .membership import CShbfM, GenShbfM, ShbfM
from .multiplicity import ShbfX
from .sketches import CountMinSketch, ShiftingCountMinSketch

FILTERS = (
    "shbf-m",
    "cshbf-m",
    "gen-shbf-m",
    "shbf-a",
    "shbf-x",
    "cm",
    "scm",
    "bf",
    "cbf",
    "ibf",
    "spectral",
)

# filters that store a set: duplicates in the trace collapse to one element
_SET_FILTERS = {"shbf-m", "cshbf-m", "gen-shbf-m", "bf", "cbf", "ibf", "shbf-a"}


class CliError(Exception):
    pass


def _corpus(args, attr="trace"):
    path = getattr(args, attr, None)
    if path is not None:
        try:
            return read_corpus(path, args.format)
        except (CorpusFormatError, OSError) as exc:
            raise CliError(str(exc)) from None
    if args.synthetic:
        tag = 0 if attr == "trace" else 5
        return synthetic(args.synthetic, args.seed, tag=tag)
    raise CliError(f"--{attr} or --synthetic required")


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise CliError(f"--{name} is required for --filter {args.filter}")


def _build_filter(args):
    name = args.filter
    if name is None:
        raise CliError("--filter is required")
    corpus = _corpus(args)
    if name in _SET_FILTERS:
        corpus = corpus.distinct()

    if name == "shbf-m":
        _require(args, "m", "k")
        filt = ShbfM(args.m, args.k, args.wbar, seed=args.seed)
        filt.insert_many(corpus.records)
    elif name == "cshbf-m":
        _require(args, "m", "k")
        filt = CShbfM(args.m, args.k, args.wbar, seed=args.seed)
        filt.insert_many(corpus.records)
    elif name == "gen-shbf-m":
        _require(args, "m", "k")
        filt = GenShbfM(args.m, args.k, args.t, args.wbar, seed=args.seed)
        filt.insert_many(corpus.records)
    elif name == "bf":
        _require(args, "m", "k")
        filt = BloomFilter(args.m, args.k, seed=args.seed)
        filt.insert_many(corpus.records)
    elif name == "cbf":
        _require(args, "m", "k")
        filt = CountingBloomFilter(args.m, args.k, width=args.width or 4, seed=args.seed)
        for rec in corpus:
            filt.insert(rec)
    elif name == "spectral":
        _require(args, "m", "k")
        filt = SpectralBloomFilter(args.m, args.k, width=args.width or 6, seed=args.seed)
        filt.insert_counted(Counter(corpus))
    elif name == "shbf-x":
        _require(args, "m", "k")
        occurrences = Counter(corpus)
        over = max(occurrences.values(), default=0)
        if over > args.c:
            raise CliError(f"trace holds a multiplicity of {over}, above --c {args.c}")
        filt = ShbfX.build(occurrences, m=args.m, k=args.k, c=args.c, seed=args.seed)
    elif name == "cm":
        _require(args, "m", "k")
        filt = CountMinSketch(args.k, args.m, counter_bits=args.counter_bits, seed=args.seed)
        filt.insert_many(corpus.records)
    elif name == "scm":
        _require(args, "m", "k")
        filt = ShiftingCountMinSketch(
            args.k, args.m, counter_bits=args.counter_bits, seed=args.seed
        )
        filt.insert_many(corpus.records)
    elif name == "shbf-a":
        _require(args, "k")
        second = _second_corpus(args).distinct()
        filt = ShbfA.build(
            list(corpus), list(second), m=args.m, k=args.k, wbar=args.wbar, seed=args.seed
        )
    elif name == "ibf":
        _require(args, "k")
        second = _second_corpus(args).distinct()
        filt = Ibf.build(list(corpus), list(second), k=args.k, m1=args.m, seed=args.seed)
    else:
        raise CliError(f"unknown filter {name}")
    return filt


def _second_corpus(args):
    if args.trace2 is None and not args.synthetic:
        raise CliError(f"--trace2 is required for --filter {args.filter}")
    if args.trace2 is not None:
        try:
            return read_corpus(args.trace2, args.format)
        except (CorpusFormatError, OSError) as exc:
            raise CliError(str(exc)) from None
    return synthetic(args.synthetic, args.seed, tag=5)


def _cmd_build(args) -> int:
    filt = _build_filter(args)
    if args.out is None:
        raise CliError("--out is required to save the filter")
    serial.save(filt, args.out)
    print(f"saved {args.filter} to {args.out}")
    return 0


def _answer(filt, rec: bytes):
    if isinstance(filt, (ShbfM, GenShbfM, BloomFilter, CountingBloomFilter)):
        return "true" if filt.query(rec) else "false"
    if isinstance(filt, ShbfA):
        answer = filt.query(rec)
        return "none" if answer is None else answer.name.lower()
    if isinstance(filt, Ibf):
        answer = filt.query(rec)
        return f"{str(answer.in_s1).lower()}/{str(answer.in_s2).lower()}"
    # multiplicity reporters
    return str(filt.query(rec))


def _cmd_query(args) -> int:
    try:
        filt = serial.load(args.state)
    except (serial.SerializationError, OSError) as exc:
        raise CliError(str(exc)) from None
    corpus = _corpus(args)
    lines = [f"{corpus.records[i].tobytes().hex()},{_answer(filt, corpus[i])}" for i in range(len(corpus))]
    text = "record,answer\n" + "\n".join(lines) + "\n"
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote {len(lines)} answers to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    runner = RUNNERS[args.experiment]
    out = Path(args.out) if args.out else Path("bench-results")
    rename = None
    if out.suffix == ".csv":
        rename = out
        out = out.parent if str(out.parent) else Path(".")
    kwargs = {"seed": args.seed, "figures": not args.no_figures}
    grid = _grid_overrides(args)
    kwargs.update(grid)
    result = runner(out, **kwargs)
    if rename is not None and result.csv_path != rename:
        result.csv_path.replace(rename)
        if result.figure_path is not None:
            new_fig = rename.with_suffix(".png")
            result.figure_path.replace(new_fig)
            result.figure_path = new_fig
        result.csv_path = rename
    print(f"wrote {result.csv_path}")
    if result.figure_path is not None:
        print(f"wrote {result.figure_path}")
    return 0


def _grid_overrides(args) -> dict:
    grid = {}
    if args.experiment == "fpr_membership":
        for name in ("m", "k", "wbar"):
            if getattr(args, name) is not None:
                grid[name] = getattr(args, name)
        if args.queries:
            grid["probes"] = args.queries
    elif args.experiment in ("mem_accesses", "throughput"):
        for name in ("k", "wbar"):
            if getattr(args, name) is not None:
                grid[name] = getattr(args, name)
        if args.n:
            grid["n"] = args.n
    elif args.experiment == "association_clear":
        if args.k is not None:
            grid["k"] = args.k
        if args.wbar is not None:
            grid["wbar"] = args.wbar
        if args.n:
            grid["n1"] = grid["n2"] = args.n
    elif args.experiment == "multiplicity_cr":
        if args.c is not None:
            grid["c"] = args.c
        if args.n:
            grid["n"] = args.n
        if args.k is not None:
            grid["ks"] = (args.k,)
    return grid


def _cmd_ingest(args) -> int:
    corpus = _corpus(args)
    print(f"records: {len(corpus)}")
    print(f"distinct: {corpus.distinct_count}")
    if args.out is not None:
        write_corpus(corpus, args.out, args.to_format)
        print(f"wrote {args.out} ({args.to_format})")
    return 0


def _cmd_serialize(args) -> int:
    try:
        info = serial.describe(args.state)
        filt = serial.load(args.state)
    except (serial.SerializationError, OSError) as exc:
        raise CliError(str(exc)) from None
    for key, value in info.items():
        print(f"{key}: {value}")
    if args.out is not None:
        serial.save(filt, args.out)
        print(f"rewrote to {args.out}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--filter", choices=FILTERS, help="structure to build")
    parser.add_argument("--m", type=int, help="bit count (or counters per row for cm/scm)")
    parser.add_argument("--k", type=int, help="hash functions (rows for cm/scm)")
    parser.add_argument("--wbar", type=int, default=57, help="offset window bound")
    parser.add_argument("--c", type=int, default=57, help="multiplicity bound for shbf-x")
    parser.add_argument("--t", type=int, default=1, help="offsets per group for gen-shbf-m")
    parser.add_argument("--seed", type=int, default=0, help="hash and corpus seed")
    parser.add_argument("--trace", help="trace file of 13-byte records")
    parser.add_argument(
        "--format", choices=("raw13", "hexline"), default="raw13", help="trace encoding"
    )
    parser.add_argument("--out", help="output path (CSV, filter file, or directory)")
    parser.add_argument("--trace2", help="second-set trace for shbf-a / ibf")
    parser.add_argument(
        "--synthetic", type=int, metavar="N", help="use N seeded synthetic records instead of --trace"
    )
    parser.add_argument("--width", type=int, help="counter bits for cbf/spectral")
    parser.add_argument(
        "--counter-bits", type=int, default=6, help="counter bits for cm/scm"
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftbf", description="Shifting filter toolkit and benchmark harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build a filter from a trace and save it")
    _add_common(p_build)
    p_build.set_defaults(func=_cmd_build)

    p_query = sub.add_parser("query", help="answer queries from a saved filter")
    p_query.add_argument("state", help="saved filter file")
    _add_common(p_query)
    p_query.set_defaults(func=_cmd_query)

    p_bench = sub.add_parser("bench", help="run an experiment")
    p_bench.add_argument(
        "--experiment", choices=EXPERIMENTS, required=True, help="experiment id"
    )
    _add_common(p_bench)
    p_bench.add_argument("--n", type=int, help="elements per set")
    p_bench.add_argument("--queries", type=int, help="probe count per sweep point")
    p_bench.add_argument(
        "--no-figures", action="store_true", help="skip PNG rendering, CSV only"
    )
    p_bench.set_defaults(func=_cmd_bench)

    p_ingest = sub.add_parser("ingest", help="validate or convert a trace file")
    _add_common(p_ingest)
    p_ingest.add_argument(
        "--to-format",
        choices=("raw13", "hexline"),
        default="raw13",
        help="output encoding when --out is given",
    )
    p_ingest.set_defaults(func=_cmd_ingest)

    p_ser = sub.add_parser("serialize", help="inspect or rewrite a saved filter")
    p_ser.add_argument("state", help="saved filter file")
    _add_common(p_ser)
    p_ser.set_defaults(func=_cmd_serialize)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
