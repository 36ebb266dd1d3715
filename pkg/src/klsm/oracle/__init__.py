"""Reference checkers and the deterministic schedule driver."""

from .checks import Verdict, check_structural, check_temporal, is_exact_history, rank_of
from .trace import LiveMultiset, Record, Trace, TraceError

__all__ = [
    "LiveMultiset", "Record", "Trace", "TraceError", "Verdict",
    "check_structural", "check_temporal", "is_exact_history", "rank_of",
]
