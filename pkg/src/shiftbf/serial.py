"""On-disk format for every filter and sketch in the package.

Layout: a fixed header (magic ``SHBF``, version, variant byte, m, k,
wbar, extra) immediately followed by the little-endian word payload,
then optional variant sections (counter dumps, sketch grids), then a
fixed-size footer holding the master seed, inserted count, word width
and the section length, so a reader can locate every region from the
two fixed structs alone. Filters with exact side tables (association
sets, multiplicity counts) keep them in a companion ``<path>.aux`` file
of length-prefixed records. Serialisation is deterministic: the same
filter state always produces the same bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from .association import CShbfA, ShbfA
from .baselines import BloomFilter, CountingBloomFilter, Ibf, SpectralBloomFilter
from .membership import CShbfM, GenShbfM, ShbfM
from .multiplicity import ShbfX
from .sketches import CountMinSketch, ShiftingCountMinSketch

MAGIC = b"SHBF"
AUX_MAGIC = b"SHBX"
VERSION = 1

_HEADER = struct.Struct("<4sHBQHHQ")
_FOOTER = struct.Struct("<QQBQ4s")
_FOOTER_MAGIC = b"FBHS"

VARIANTS = {
    ShbfM: 1,
    CShbfM: 2,
    GenShbfM: 3,
    ShbfA: 4,
    ShbfX: 5,
    CountMinSketch: 6,
    ShiftingCountMinSketch: 7,
    BloomFilter: 8,
    CountingBloomFilter: 9,
    Ibf: 10,
    SpectralBloomFilter: 11,
    CShbfA: 12,
}
VARIANT_NAMES = {
    1: "shbf-m",
    2: "cshbf-m",
    3: "gen-shbf-m",
    4: "shbf-a",
    5: "shbf-x",
    6: "cm",
    7: "scm",
    8: "bf",
    9: "cbf",
    10: "ibf",
    11: "spectral",
    12: "cshbf-a",
}


class SerializationError(ValueError):
    pass


def _counter_section(counters) -> bytes:
    return struct.pack("<B", counters.width) + counters.to_bytes()


def _grid_bytes(sketch) -> bytes:
    dtype = np.uint8 if sketch.counter_bits <= 8 else np.dtype("<u2")
    raw = sketch.grid.astype(dtype).tobytes()
    if len(raw) % 8:
        raw += b"\x00" * (8 - len(raw) % 8)
    return raw


def _load_grid(sketch, payload) -> None:
    dtype = np.uint8 if sketch.counter_bits <= 8 else np.dtype("<u2")
    itemsize = np.dtype(dtype).itemsize
    want = sketch.grid.size * itemsize
    if len(payload) < want or len(payload) - want >= 8:
        raise SerializationError("sketch payload size mismatch")
    flat = np.frombuffer(payload[:want], dtype=dtype).astype(np.int64)
    sketch.grid[:, :] = flat.reshape(sketch.grid.shape)


def _records_blob(elements) -> bytes:
    parts = [struct.pack("<Q", len(elements))]
    for e in elements:
        parts.append(struct.pack("<I", len(e)))
        parts.append(bytes(e))
    return b"".join(parts)


def _read_records(buf, off):
    (count,) = struct.unpack_from("<Q", buf, off)
    off += 8
    out = []
    for _ in range(count):
        (ln,) = struct.unpack_from("<I", buf, off)
        off += 4
        out.append(bytes(buf[off : off + ln]))
        off += ln
    return out, off


def _pack(variant, m, k, wbar, extra, words, sections, seed, n, word_bits) -> bytes:
    header = _HEADER.pack(MAGIC, VERSION, variant, m, k, wbar, extra)
    footer = _FOOTER.pack(seed, n, word_bits, len(sections), _FOOTER_MAGIC)
    return header + words + sections + footer


def dumps(filt) -> tuple[bytes, bytes | None]:
    """Serialise to (main bytes, aux bytes or None)."""
    variant = VARIANTS.get(type(filt))
    if variant is None:
        raise SerializationError(f"cannot serialise {type(filt).__name__}")
    aux = None
    if variant in (1, 2):
        sections = _counter_section(filt.counters) if variant == 2 else b""
        main = _pack(
            variant, filt.m, filt.k, filt.wbar, 0,
            filt.store.to_bytes(), sections, filt.family.seed, filt.n,
            filt.store.word_bits,
        )
    elif variant == 3:
        main = _pack(
            3, filt.m, filt.k, filt.wbar, filt.t,
            filt.store.to_bytes(), b"", filt.family.seed, filt.n,
            filt.store.word_bits,
        )
    elif variant in (4, 12):
        sections = _counter_section(filt.counters) if variant == 12 else b""
        main = _pack(
            variant, filt.m, filt.k, filt.wbar, 0,
            filt.store.to_bytes(), sections, filt.family.seed,
            len(filt.t1 | filt.t2), filt.store.word_bits,
        )
        aux = (
            AUX_MAGIC
            + struct.pack("<HB", VERSION, variant)
            + _records_blob(sorted(filt.t1))
            + _records_blob(sorted(filt.t2))
        )
    elif variant == 5:
        main = _pack(
            5, filt.m, filt.k, 0, filt.c,
            filt.store.to_bytes(), _counter_section(filt.counters),
            filt.family.seed, len(filt.counts), filt.store.word_bits,
        )
        parts = [AUX_MAGIC, struct.pack("<HB", VERSION, 5)]
        parts.append(struct.pack("<Q", len(filt.counts)))
        for e in sorted(filt.counts):
            parts.append(struct.pack("<I", len(e)) + bytes(e))
            parts.append(struct.pack("<I", filt.counts[e]))
        aux = b"".join(parts)
    elif variant == 6:
        main = _pack(
            6, filt.r, filt.d, 0, filt.counter_bits,
            _grid_bytes(filt), b"", filt.family.seed, 0, 64,
        )
    elif variant == 7:
        main = _pack(
            7, filt.r, filt.d, filt.wbar, filt.counter_bits,
            _grid_bytes(filt), b"", filt.family.seed, 0, filt.word_bits,
        )
    elif variant == 8:
        main = _pack(
            8, filt.m, filt.k, 0, 0,
            filt.store.to_bytes(), b"", filt.family.seed, filt.n,
            filt.store.word_bits,
        )
    elif variant == 9:
        main = _pack(
            9, filt.m, filt.k, 0, 0,
            b"", _counter_section(filt.counters), filt.family.seed, filt.n, 64,
        )
    elif variant == 10:
        main = _pack(
            10, filt.bf1.m, filt.k, 0, filt.bf2.m,
            filt.bf1.store.to_bytes() + filt.bf2.store.to_bytes(),
            struct.pack("<QQ", filt.bf1.n, filt.bf2.n),
            filt.bf1.family.seed, filt.bf1.n + filt.bf2.n,
            filt.bf1.store.word_bits,
        )
    else:  # 11
        main = _pack(
            11, filt.m, filt.k, 0, 0,
            b"", _counter_section(filt.counters), filt.family.seed, 0, 64,
        )
    return main, aux


def _split(blob: bytes):
    if len(blob) < _HEADER.size + _FOOTER.size:
        raise SerializationError("file too short")
    magic, version, variant, m, k, wbar, extra = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise SerializationError("bad magic")
    if version != VERSION:
        raise SerializationError(f"unsupported version {version}")
    seed, n, word_bits, section_len, fmagic = _FOOTER.unpack(blob[-_FOOTER.size :])
    if fmagic != _FOOTER_MAGIC:
        raise SerializationError("bad footer")
    words_end = len(blob) - _FOOTER.size - section_len
    if words_end < _HEADER.size:
        raise SerializationError("truncated payload")
    words = blob[_HEADER.size : words_end]
    sections = blob[words_end : len(blob) - _FOOTER.size]
    return variant, m, k, wbar, extra, words, sections, seed, n, word_bits


def _restore_counters(counters, section) -> bytes:
    if len(section) < 1:
        raise SerializationError("missing counter section")
    (width,) = struct.unpack_from("<B", section, 0)
    if width != counters.width:
        raise SerializationError("counter width mismatch")
    per = 1 if width <= 8 else 2
    need = counters.size * per
    counters.load_bytes(section[1 : 1 + need])
    return section[1 + need :]


def loads(blob: bytes, aux: bytes | None = None):
    variant, m, k, wbar, extra, words, sections, seed, n, word_bits = _split(blob)

    def aux_records(expect_variant):
        if aux is None:
            raise SerializationError("companion table data required but missing")
        if aux[:4] != AUX_MAGIC:
            raise SerializationError("bad companion magic")
        version, var = struct.unpack_from("<HB", aux, 4)
        if version != VERSION or var != expect_variant:
            raise SerializationError("companion header mismatch")
        return 7

    if variant == 1:
        filt = ShbfM(m, k, wbar, word_bits, seed)
        filt.store.load_bytes(words)
        filt.n = n
    elif variant == 2:
        filt = CShbfM(m, k, wbar, _peek_width(sections), word_bits, seed)
        filt.store.load_bytes(words)
        _restore_counters(filt.counters, sections)
        filt.n = n
    elif variant == 3:
        filt = GenShbfM(m, k, extra, wbar, word_bits, seed)
        filt.store.load_bytes(words)
        filt.n = n
    elif variant in (4, 12):
        if variant == 4:
            filt = ShbfA(m, k, wbar, word_bits, seed)
        else:
            filt = CShbfA(m, k, wbar, _peek_width(sections), word_bits, seed)
            _restore_counters(filt.counters, sections)
        filt.store.load_bytes(words)
        off = aux_records(variant)
        t1, off = _read_records(aux, off)
        t2, _ = _read_records(aux, off)
        filt.t1 = set(t1)
        filt.t2 = set(t2)
    elif variant == 5:
        filt = ShbfX(m, k, extra, _peek_width(sections), word_bits, seed)
        filt.store.load_bytes(words)
        _restore_counters(filt.counters, sections)
        off = aux_records(5)
        (count,) = struct.unpack_from("<Q", aux, off)
        off += 8
        counts = {}
        for _ in range(count):
            (ln,) = struct.unpack_from("<I", aux, off)
            off += 4
            e = bytes(aux[off : off + ln])
            off += ln
            (cnt,) = struct.unpack_from("<I", aux, off)
            off += 4
            counts[e] = cnt
        filt.counts = counts
    elif variant == 6:
        filt = CountMinSketch(k, m, extra, seed)
        _load_grid(filt, words)
    elif variant == 7:
        filt = ShiftingCountMinSketch(k, m, extra, word_bits, seed)
        if filt.wbar != wbar:
            raise SerializationError("window mismatch for sketch")
        _load_grid(filt, words)
    elif variant == 8:
        filt = BloomFilter(m, k, word_bits, seed)
        filt.store.load_bytes(words)
        filt.n = n
    elif variant == 9:
        filt = CountingBloomFilter(m, k, _peek_width(sections), seed)
        _restore_counters(filt.counters, sections)
        filt.n = n
    elif variant == 10:
        filt = Ibf(m, extra, k, word_bits, seed)
        cut = len(filt.bf1.store.to_bytes())
        filt.bf1.store.load_bytes(words[:cut])
        filt.bf2.store.load_bytes(words[cut:])
        filt.bf1.n, filt.bf2.n = struct.unpack("<QQ", sections)
    elif variant == 11:
        filt = SpectralBloomFilter(m, k, _peek_width(sections), seed)
        _restore_counters(filt.counters, sections)
    else:
        raise SerializationError(f"unknown variant byte {variant}")
    return filt


def _peek_width(sections: bytes) -> int:
    if not sections:
        raise SerializationError("missing counter section")
    return sections[0]


def save(filt, path) -> None:
    main, aux = dumps(filt)
    with open(path, "wb") as fh:
        fh.write(main)
    if aux is not None:
        with open(f"{path}.aux", "wb") as fh:
            fh.write(aux)


def load(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    aux = None
    try:
        with open(f"{path}.aux", "rb") as fh:
            aux = fh.read()
    except FileNotFoundError:
        pass
    return loads(blob, aux)


def describe(path) -> dict:
    """Header summary without reconstructing the filter."""
    with open(path, "rb") as fh:
        blob = fh.read()
    variant, m, k, wbar, extra, words, sections, seed, n, word_bits = _split(blob)
    return {
        "variant": VARIANT_NAMES.get(variant, str(variant)),
        "m": m,
        "k": k,
        "wbar": wbar,
        "extra": extra,
        "seed": seed,
        "n": n,
        "word_bits": word_bits,
        "word_bytes": len(words),
        "section_bytes": len(sections),
    }
