from .corpus import RECORD_BYTES, CorpusFormatError, TraceCorpus, read_corpus, synthetic, write_corpus

__all__ = [
    "RECORD_BYTES",
    "CorpusFormatError",
    "TraceCorpus",
    "read_corpus",
    "synthetic",
    "write_corpus",
]
