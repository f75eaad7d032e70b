"""Shifting filters: membership, association, and multiplicity queries
that fold per-element auxiliary information into hash offsets, plus the
classic structures they are measured against.
"""

from .association import (
    AssociationAnswer,
    CShbfA,
    Region,
    ShbfA,
    optimal_m,
    outcome_probabilities,
)
from .baselines import (
    BloomFilter,
    CountingBloomFilter,
    Ibf,
    IbfAnswer,
    SpectralBloomFilter,
    bf_fpr,
    bf_min_fpr,
    bf_optimal_k,
    ibf_clear_rate,
)
from .hashing import HashFamily, mix64, randomness_test
from .membership import (
    CShbfM,
    GenShbfM,
    OptimalK,
    ShbfM,
    fpr_theoretical,
    gen_fpr,
    optimal_k,
)
from .multiplicity import (
    CapacityError,
    ShbfX,
    correctness_rate,
    mean_member_correctness_rate,
)
from .serial import SerializationError, describe, load, save
from .sketches import CountMinSketch, ShiftingCountMinSketch
from .store import BitStore, CounterStore, CounterUnderflowError

__version__ = "0.1.0"

__all__ = [
    "AssociationAnswer",
    "BitStore",
    "BloomFilter",
    "CapacityError",
    "CountingBloomFilter",
    "CountMinSketch",
    "CounterStore",
    "CounterUnderflowError",
    "CShbfA",
    "CShbfM",
    "GenShbfM",
    "HashFamily",
    "Ibf",
    "IbfAnswer",
    "OptimalK",
    "Region",
    "SerializationError",
    "ShbfA",
    "ShbfM",
    "ShbfX",
    "ShiftingCountMinSketch",
    "SpectralBloomFilter",
    "bf_fpr",
    "bf_min_fpr",
    "bf_optimal_k",
    "correctness_rate",
    "describe",
    "fpr_theoretical",
    "gen_fpr",
    "ibf_clear_rate",
    "load",
    "mean_member_correctness_rate",
    "mix64",
    "optimal_k",
    "optimal_m",
    "outcome_probabilities",
    "randomness_test",
    "save",
    "__version__",
]
