"""k-LSM: a lock-free relaxed priority queue built from log-structured merge-trees."""

from .block import MAX_LEVELS, Block, Item, Reclaimer, consolidate_levels, merge_blocks
from .dist_lsm import DistLSM, max_local_level
from .probe import Probe
from .queue import KLSM, Handle
from .shared import BlockArray, BlockBloom, SharedKLSM

__all__ = [
    "KLSM",
    "MAX_LEVELS",
    "Block",
    "BlockArray",
    "BlockBloom",
    "DistLSM",
    "Handle",
    "Item",
    "Probe",
    "Reclaimer",
    "SharedKLSM",
    "consolidate_levels",
    "max_local_level",
    "merge_blocks",
]

__version__ = "0.1.0"
