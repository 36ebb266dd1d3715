"""The shared, copy-on-write k-LSM.

All handles see one published :class:`BlockArray` through an atomic
reference. A handle works on a private copy (its *snapshot*) and publishes
changes by swapping the reference with compare-and-swap; a published array
is never modified again, apart from ``filled`` on its blocks.
"""

from __future__ import annotations

import functools
import heapq
import random
from typing import TYPE_CHECKING, Optional

from . import probe as P
from .atomics import AtomicCounter, AtomicReference
from .block import MAX_LEVELS, Block, Item, Purge, Reclaimer, consolidate_levels

if TYPE_CHECKING:
    from .queue import Handle


class TabulationHash:
    """Simple tabulation hashing of 64-bit integers (8 tables of 256 words)."""

    def __init__(self, rng: random.Random):
        self.tables = [[rng.getrandbits(64) for _ in range(256)] for _ in range(8)]

    def __call__(self, x: int) -> int:
        h = 0
        for i, table in enumerate(self.tables):
            h ^= table[(x >> (8 * i)) & 0xFF]
        return h


@functools.lru_cache(maxsize=64)
def _hash_pair(seed: int) -> tuple[TabulationHash, TabulationHash]:
    rng = random.Random(seed)
    return TabulationHash(rng), TabulationHash(rng)


@functools.lru_cache(maxsize=4096)
def _mask(seed: int, handle_id: int) -> int:
    h1, h2 = _hash_pair(seed)
    return (1 << (h1(handle_id) & 63)) | (1 << (h2(handle_id) & 63))


class BlockBloom:
    """64-bit Bloom filters over handle ids, two tabulation hashes per id.

    Filters are plain ints stored on each block; a merged block's filter is
    the OR of its sources, so membership can only gain false positives.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.h1, self.h2 = _hash_pair(seed)

    def mask(self, handle_id: int) -> int:
        return _mask(self.seed, handle_id)

    @staticmethod
    def query(bits: int, mask: int) -> bool:
        return mask != 0 and bits & mask == mask


class BlockArray:
    """Level-ordered blocks (largest first) plus per-block pivot offsets.

    Positions ``pivots[i] .. filled-1`` of block ``i`` are the candidates
    for a relaxed delete-min; together they are the ``k+1`` smallest keys
    of the array at the time the pivots were computed.
    """

    __slots__ = ("blocks", "pivots", "version")

    def __init__(self, blocks: list[Block] | None = None, pivots: list[int] | None = None,
                 version: int = 0):
        self.blocks = [] if blocks is None else blocks
        self.pivots = [0] * len(self.blocks) if pivots is None else pivots
        self.version = version

    @property
    def size(self) -> int:
        return len(self.blocks)

    def copy(self) -> BlockArray:
        # shallow over blocks: they are shared read-only
        return BlockArray(list(self.blocks), list(self.pivots), self.version)

    def levels(self) -> list[int]:
        return [b.level for b in self.blocks]

    def insert(self, block: Block, purge: Purge = None) -> None:
        pos = 0
        while pos < len(self.blocks) and self.blocks[pos].level >= block.level:
            pos += 1
        self.blocks.insert(pos, block)
        self.pivots.insert(pos, 0)
        self.consolidate(purge)

    def consolidate(self, purge: Purge = None) -> bool:
        """Shrink and merge blocks; returns True iff a merge happened.

        Pivots are reset; callers recompute them before relying on
        candidate ranges.
        """
        blocks, merged = consolidate_levels(self.blocks, purge)
        assert len(blocks) <= MAX_LEVELS
        self.blocks = blocks
        self.pivots = [0] * len(blocks)
        return merged

    def calculate_pivots(self, k: int) -> None:
        """Mark the k+1 smallest positions as candidates.

        Walks a multi-way merge upward from the block tails, counting k+1
        positions, so duplicates of the pivot key never push the candidate
        count past k+1.
        """
        fills = [b.filled for b in self.blocks]
        taken = [0] * len(self.blocks)
        heap = [(b.items[f - 1].key, i) for i, (b, f) in enumerate(zip(self.blocks, fills)) if f]
        heapq.heapify(heap)
        budget = k + 1
        while heap and budget:
            _, i = heapq.heappop(heap)
            taken[i] += 1
            budget -= 1
            nxt = fills[i] - taken[i]
            if nxt > 0:
                heapq.heappush(heap, (self.blocks[i].items[nxt - 1].key, i))
        self.pivots = [f - t for f, t in zip(fills, taken)]

    def candidate_count(self) -> int:
        return sum(max(0, b.filled - p) for b, p in zip(self.blocks, self.pivots))

    def candidates(self) -> list[Item]:
        out = []
        for b, p in zip(self.blocks, self.pivots):
            out.extend(b.items[p: b.filled])
        return out

    def find_min(self, rng: random.Random, mask: int = 0) -> Item | None:
        """Relaxed minimum: a uniformly random candidate, or the caller's own smaller item.

        A taken random pick falls back to the tail of its block. When ``mask``
        is set, the smallest live item of every block whose Bloom filter
        matches the caller is also considered and the smaller key wins.
        """
        blocks = self.blocks
        ranges = []
        total = 0
        for b, p in zip(blocks, self.pivots):
            r = b.filled - p
            if r < 0:
                r = 0
            ranges.append(r)
            total += r
        choice: Item | None = None
        if total > 0:
            r = rng.randrange(total)
            for b, p, rg in zip(blocks, self.pivots, ranges):
                if r < rg:
                    if r != rg - 1:
                        item = b.items[p + r]
                        if not item.taken:
                            choice = item
                    if choice is None:
                        choice = b.items[p + rg - 1]
                    break
                r -= rg
        else:
            # every candidate range was trimmed away: fall back to the exact minimum
            for b in blocks:
                t = b.tail()
                if t is not None and (choice is None or t.key < choice.key):
                    choice = t
        if mask:
            own: Item | None = None
            for b in blocks:
                if b.bloom & mask == mask:
                    m = b.min_live()
                    if m is not None and (own is None or m.key < own.key):
                        own = m
            if own is not None and (choice is None or own.key < choice.key):
                return own
        return choice


class SharedKLSM:
    def __init__(self, k: int, probe: P.Probe = P.NULL_PROBE, reclaimer: Reclaimer | None = None):
        self.k = k
        self.probe = probe
        self.reclaimer = reclaimer if reclaimer is not None else Reclaimer()
        self.purge: Purge = None
        self._ref: AtomicReference[BlockArray] = AtomicReference(None)
        self._versions = AtomicCounter()
        self.cas_failures = AtomicCounter()
        self.publications = AtomicCounter()

    def published(self) -> Optional[BlockArray]:
        return self._ref.get()

    def refresh_snapshot(self, h: Handle, current: Optional[BlockArray] = None,
                         read: bool = True) -> None:
        if read:
            current = self._ref.get()
        h.observed = current
        h.observed_version = current.version if current is not None else 0
        h.snapshot = current.copy() if current is not None else None

    def push_snapshot(self, h: Handle) -> bool:
        self.probe.point(P.CAS, h)
        observed = h.observed
        cur = self._ref.get()
        # full-version check right before the swap
        if cur is not observed or (cur is not None and cur.version != h.observed_version):
            self.cas_failures.add()
            return False
        new = h.snapshot
        if new is not None:
            # other handles may have trimmed shared tails since the snapshot
            # was built, so pivots are taken right before the swap
            new.calculate_pivots(self.k)
            new.version = self._versions.add()
        if not self._ref.compare_and_set(observed, new):
            self.cas_failures.add()
            return False
        self.publications.add()
        if observed is not None and self.reclaimer.enabled:
            keep = {id(b) for b in new.blocks} if new is not None else set()
            self.reclaimer.retire(h.slot, [b for b in observed.blocks if id(b) not in keep])
        h.observed = new
        h.observed_version = new.version if new is not None else 0
        h.snapshot = new.copy() if new is not None else None
        self.probe.mark(P.M_PUBLISHED, h, new)
        return True

    def insert(self, h: Handle, block: Block) -> None:
        """Publish ``block``; retries on a fresh snapshot until the swap succeeds."""
        while True:
            self.probe.point(P.READ_SHARED, h)
            cur = self._ref.get()
            if cur is not h.observed:
                self.refresh_snapshot(h, cur, read=False)
            snap = h.snapshot if h.snapshot is not None else BlockArray()
            snap.insert(block, self.purge)
            h.snapshot = snap if snap.size else None
            if self.push_snapshot(h):
                self.probe.mark(P.M_INSERT, h)
                return

    def find_min(self, h: Handle) -> Item | None:
        """Candidate item from the shared array, not yet marked; None if empty."""
        while True:
            self.probe.point(P.VERIFY, h)
            cur = self._ref.get()
            self.probe.mark(P.M_VERIFY, h)
            if cur is not h.observed:
                self.refresh_snapshot(h, cur, read=False)
            snap = h.snapshot
            if snap is None:
                return None
            item = snap.find_min(h.rng, h.bloom_mask)
            if item is not None and not item.taken:
                return item
            push = snap.consolidate(self.purge)
            if snap.size == 0:
                h.snapshot = None
                push = True
            else:
                snap.calculate_pivots(self.k)
            if push:
                # failure means someone else already replaced the array
                self.push_snapshot(h)
