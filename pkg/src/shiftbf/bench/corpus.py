"""Trace corpora: fixed 13-byte element keys, real or synthetic.

Thirteen bytes is the size of a serialized flow identifier (two IPv4
addresses, two ports, one protocol byte), which is the shape of element
the structures here are usually fed. Synthetic corpora are generated
from a seeded counter-mode mixer, so the same (seed, tag) pair always
yields the same records and different tags can never collide: the final
byte of every record is the tag itself.
"""

from __future__ import annotations

import numpy as np

from ..hashing import M64, mix64, mix64_batch

RECORD_BYTES = 13

_STRIDE = np.uint64(0x9E3779B97F4A7C15)


class CorpusFormatError(ValueError):
    pass


class TraceCorpus:
    """A stack of equal-length records stored as an (n, 13) byte array."""

    def __init__(self, records: np.ndarray):
        records = np.ascontiguousarray(records, dtype=np.uint8)
        if records.ndim != 2 or records.shape[1] != RECORD_BYTES:
            raise CorpusFormatError(
                f"records must be (n, {RECORD_BYTES}) bytes, got shape {records.shape}"
            )
        self.records = records

    def __len__(self) -> int:
        return self.records.shape[0]

    def __getitem__(self, i: int) -> bytes:
        return self.records[i].tobytes()

    def __iter__(self):
        for i in range(len(self)):
            yield self.records[i].tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, TraceCorpus):
            return NotImplemented
        return self.records.shape == other.records.shape and bool(
            np.array_equal(self.records, other.records)
        )

    @property
    def distinct_count(self) -> int:
        return len(np.unique(self._keys()))

    def _keys(self) -> np.ndarray:
        # void view makes each row one comparable scalar
        return self.records.reshape(len(self), -1).view(
            np.dtype((np.void, RECORD_BYTES))
        )[:, 0]

    def distinct(self) -> "TraceCorpus":
        """Copy with duplicate records dropped, first appearance kept."""
        _, first = np.unique(self._keys(), return_index=True)
        return TraceCorpus(self.records[np.sort(first)])

    def sample(self, count: int, seed: int = 0) -> "TraceCorpus":
        if count > len(self):
            raise ValueError("sample larger than corpus")
        rng = np.random.default_rng(mix64(seed ^ 0xC0B9))
        idx = rng.choice(len(self), size=count, replace=False)
        return TraceCorpus(self.records[np.sort(idx)])

    def split(self, count: int) -> tuple["TraceCorpus", "TraceCorpus"]:
        return TraceCorpus(self.records[:count]), TraceCorpus(self.records[count:])


def synthetic(count: int, seed: int = 0, tag: int = 0) -> TraceCorpus:
    """Deterministic corpus of `count` records keyed by (seed, tag).

    Records carry 96 random bits plus a trailing tag byte, so corpora
    built with different tags are disjoint by construction.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if not 0 <= tag <= 0xFF:
        raise ValueError("tag must fit one byte")
    key = np.uint64(mix64((seed & M64) ^ mix64(0xA5C1 + tag)))
    idx = np.arange(count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        a = mix64_batch(key + (np.uint64(2) * idx + np.uint64(1)) * _STRIDE)
        b = mix64_batch(key + (np.uint64(2) * idx + np.uint64(2)) * _STRIDE)
    out = np.empty((count, RECORD_BYTES), dtype=np.uint8)
    out[:, :8] = a.astype("<u8").view(np.uint8).reshape(count, 8)
    out[:, 8:12] = b.astype("<u8").view(np.uint8).reshape(count, 8)[:, :4]
    out[:, 12] = tag
    return TraceCorpus(out)


def read_corpus(path, format: str = "raw13") -> TraceCorpus:
    if format == "raw13":
        with open(path, "rb") as fh:
            blob = fh.read()
        if not blob:
            raise CorpusFormatError(f"{path}: empty trace file")
        if len(blob) % RECORD_BYTES:
            raise CorpusFormatError(
                f"{path}: length {len(blob)} is not a multiple of {RECORD_BYTES}"
            )
        arr = np.frombuffer(blob, dtype=np.uint8).reshape(-1, RECORD_BYTES)
        return TraceCorpus(arr.copy())
    if format == "hexline":
        rows = []
        with open(path, "r", encoding="ascii") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.strip()
                if not text:
                    continue
                if len(text) != 2 * RECORD_BYTES:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: expected {2 * RECORD_BYTES} hex digits, "
                        f"got {len(text)}"
                    )
                try:
                    rows.append(bytes.fromhex(text))
                except ValueError:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: invalid hex record"
                    ) from None
        if not rows:
            raise CorpusFormatError(f"{path}: empty trace file")
        return TraceCorpus(np.frombuffer(b"".join(rows), dtype=np.uint8).reshape(-1, RECORD_BYTES).copy())
    raise CorpusFormatError(f"unknown trace format {format!r}")


def write_corpus(corpus: TraceCorpus, path, format: str = "raw13") -> None:
    if format == "raw13":
        with open(path, "wb") as fh:
            fh.write(corpus.records.tobytes())
        return
    if format == "hexline":
        with open(path, "w", encoding="ascii") as fh:
            for i in range(len(corpus)):
                fh.write(corpus.records[i].tobytes().hex())
                fh.write("\n")
        return
    raise CorpusFormatError(f"unknown trace format {format!r}")
