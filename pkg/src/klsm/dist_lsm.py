"""Per-handle LSM with non-destructive spying."""

from __future__ import annotations

from typing import TYPE_CHECKING

from . import probe as P
from .block import MAX_LEVELS, Block, Item, Purge, consolidate_levels, merge_blocks

if TYPE_CHECKING:
    from .queue import Handle
    from .shared import SharedKLSM


def max_local_level(k: int) -> int:
    """Largest block level kept locally: 2**(level+1) <= k+1, or -1 when none fits.

    Strictly decreasing levels then hold at most 2**(L+1) - 1 <= k items.
    """
    return (k + 1).bit_length() - 2


class DistLSM:
    """One handle's private LSM: blocks of strictly decreasing level.

    Only the owner writes ``blocks`` and ``size``; other handles read them
    while spying. Writers install replacement blocks before shrinking
    ``size``, so a concurrent reader may see an item twice but never miss
    one that is still live.
    """

    def __init__(self, owner: int = 0):
        self.owner = owner
        self.blocks: list[Block | None] = [None] * MAX_LEVELS
        self.size = 0

    def __repr__(self) -> str:
        return f"DistLSM({self.blocks[: self.size]})"

    def view(self) -> list[Block]:
        return [b for b in self.blocks[: self.size] if b is not None]

    def live_count(self) -> int:
        return sum(len(b.live_items()) for b in self.view())

    def insert(self, item: Item, h: Handle, shared: SharedKLSM, k: int, purge: Purge = None) -> None:
        probe = shared.probe
        b = Block(0, bloom=h.bloom_mask)
        b.append(item, purge)
        blocks = self.blocks
        old_size = self.size
        i = old_size
        # merges build new blocks; the old ones stay visible throughout
        while i > 0 and blocks[i - 1].level <= b.level:
            b = merge_blocks(blocks[i - 1], b, purge)
            i -= 1
        merged_away = blocks[i:old_size]
        if b.level > max_local_level(k):
            shared.insert(h, b)
            probe.point(P.PUBLISH, h)
            self.size = i
            for j in range(i, old_size):
                blocks[j] = None
        else:
            probe.point(P.PUBLISH, h)
            if b.filled:
                blocks[i] = b
                self.size = i + 1
            else:
                self.size = i
            probe.mark(P.M_INSERT, h)
            for j in range(self.size, old_size):
                blocks[j] = None
        if h.reclaimer.enabled:
            h.reclaimer.retire(h.slot, [x for x in merged_away if x is not None])

    def find_min(self, h: Handle, probe: P.Probe = P.NULL_PROBE, purge: Purge = None) -> Item | None:
        """Smallest live item across local blocks, consolidating dead tails first."""
        blocks = self.blocks
        n = self.size
        for j in range(n):
            b = blocks[j]
            t = b.tail()
            if t is None or t.taken or (purge is not None and purge(t)):
                self.consolidate(h, probe, purge)
                n = self.size
                break
        best: Item | None = None
        for j in range(n):
            t = blocks[j].tail()
            if best is None or t.key < best.key:
                best = t
        return best

    def consolidate(self, h: Handle, probe: P.Probe = P.NULL_PROBE, purge: Purge = None) -> None:
        old = self.blocks[: self.size]
        new, _ = consolidate_levels(old, purge)
        if len(new) == len(old) and all(a is b for a, b in zip(new, old)):
            return
        probe.point(P.PUBLISH, h)
        blocks = self.blocks
        # new block j only holds items from old slots >= j, so writing in
        # increasing order keeps every live item reachable
        for j, b in enumerate(new):
            blocks[j] = b
        self.size = len(new)
        for j in range(len(new), len(old)):
            blocks[j] = None
        keep = {id(b) for b in new}
        if h.reclaimer.enabled:
            h.reclaimer.retire(h.slot, [b for b in old if id(b) not in keep])

    def spy(self, victim: DistLSM, h: Handle, k: int, probe: P.Probe = P.NULL_PROBE,
            purge: Purge = None) -> bool:
        """Copy the victim's blocks (never more than ``k`` items) into this empty LSM."""
        copied = 0
        i = 0
        while True:
            probe.point(P.SPY, h)
            if i >= victim.size:
                break
            b = victim.blocks[i]
            i += 1
            if b is None:
                continue
            level = b.level
            if self.size == 0 or level < self.blocks[self.size - 1].level:
                nb = b.copy(level, purge)
                if nb.filled == 0 or copied + nb.filled > k:
                    continue
                self.blocks[self.size] = nb
                self.size += 1
                copied += nb.filled
        return self.size != 0
