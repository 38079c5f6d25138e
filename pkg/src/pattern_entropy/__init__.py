"""Pattern entropy of i.i.d. sources: exact values, bounds, and a bin-aware coder."""
from .distributions import AnalysisConfig, Distribution, iid_entropy, make_family
from .entropy import (
    EntropyEstimate,
    pattern_entropy_exact,
    pattern_entropy_mc,
    pattern_entropy_via_sequences,
)
from .errors import CorruptPayloadError, HeaderMismatchError, InfeasibleError
from .patterns import extract_pattern

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "CorruptPayloadError",
    "Distribution",
    "EntropyEstimate",
    "HeaderMismatchError",
    "InfeasibleError",
    "extract_pattern",
    "iid_entropy",
    "make_family",
    "pattern_entropy_exact",
    "pattern_entropy_mc",
    "pattern_entropy_via_sequences",
]
