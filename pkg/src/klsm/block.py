"""Items, sorted blocks and deferred reclamation.

A block is a level-tagged array of item references sorted by nonincreasing
key, so the block minimum sits at index ``filled - 1``. Blocks are built
privately and never structurally modified once another handle can see them;
the single exception is ``filled``, which ``shrink`` may lower to trim
logically deleted items off the tail.
"""

from __future__ import annotations

import threading
from operator import attrgetter
from typing import Callable, Iterable, Optional

from .atomics import stripe_lock

MAX_LEVELS = 32
KEY_MAX = (1 << 64) - 1
POISON_KEY = KEY_MAX


class Item:
    """A key/payload pair with a one-shot deletion mark."""

    __slots__ = ("key", "payload", "taken")

    def __init__(self, key: int, payload: int = 0):
        self.key = key
        self.payload = payload
        self.taken = False

    def take(self) -> bool:
        """Atomic test-and-set of the deletion mark; True for the single winner."""
        if self.taken:
            return False
        with stripe_lock(self):
            if self.taken:
                return False
            self.taken = True
            return True

    def __repr__(self) -> str:
        mark = "x" if self.taken else ""
        return f"Item({self.key}{mark})"


_key = attrgetter("key")

# Lazy-deletion predicate: items it accepts are dropped on copy/merge/shrink.
Purge = Optional[Callable[[Item], bool]]


def is_dead(item: Item, purge: Purge = None) -> bool:
    return item.taken or (purge is not None and purge(item))


class Block:
    __slots__ = ("level", "filled", "items", "bloom")

    def __init__(self, level: int, items: list[Item] | None = None, bloom: int = 0):
        assert 0 <= level < MAX_LEVELS
        self.level = level
        self.items = [] if items is None else items
        self.filled = len(self.items)
        assert self.filled <= 1 << level
        self.bloom = bloom

    @property
    def capacity(self) -> int:
        return 1 << self.level

    def __len__(self) -> int:
        return self.filled

    def __repr__(self) -> str:
        keys = [it.key for it in self.items[: self.filled]]
        return f"Block(level={self.level}, {keys})"

    def keys(self) -> list[int]:
        return [it.key for it in self.items[: self.filled]]

    def tail(self) -> Item | None:
        f = self.filled
        return self.items[f - 1] if f else None

    def min_live(self) -> Item | None:
        """Smallest item not yet taken (scans backwards over taken tails)."""
        items = self.items
        j = self.filled - 1
        while j >= 0 and items[j].taken:
            j -= 1
        return items[j] if j >= 0 else None

    def live_items(self) -> list[Item]:
        return [it for it in self.items[: self.filled] if not it.taken]

    def append(self, item: Item, purge: Purge = None) -> None:
        if item.taken or (purge is not None and purge(item)):
            return
        f = self.filled
        assert f < self.capacity, "block overflow"
        assert f == 0 or item.key <= self.items[f - 1].key, "append breaks descending order"
        if len(self.items) > f:
            del self.items[f:]
        self.items.append(item)
        self.filled = f + 1

    def copy(self, level: int, purge: Purge = None) -> Block:
        """Fresh block of ``level`` holding the items of this block not seen dead."""
        src = self.items[: self.filled]
        if purge is None:
            kept = [it for it in src if not it.taken]
        else:
            kept = [it for it in src if not (it.taken or purge(it))]
        return Block(level, kept, self.bloom)

    def merge_in(self, b1: Block, b2: Block, purge: Purge = None) -> None:
        """Two-way merge of ``b1`` and ``b2`` into this empty block.

        Equal keys keep ``b1``'s items ahead of ``b2``'s.
        """
        assert self.filled == 0
        src = b1.items[: b1.filled] + b2.items[: b2.filled]
        if purge is None:
            out = [it for it in src if not it.taken]
        else:
            out = [it for it in src if not (it.taken or purge(it))]
        # timsort finds the two runs; stability keeps b1 first on ties
        out.sort(key=_key, reverse=True)
        assert len(out) <= self.capacity, "merge overflow"
        self.items = out
        self.filled = len(out)
        self.bloom = b1.bloom | b2.bloom

    def shrink(self, purge: Purge = None) -> Block:
        """Trim dead tail items and drop to the smallest level that fits.

        Returns ``self`` when the level is unchanged (only ``filled`` may be
        lowered), otherwise a fresh, re-filtered copy.
        """
        f = self.filled
        items = self.items
        if purge is None:
            while f > 0 and items[f - 1].taken:
                f -= 1
        else:
            while f > 0 and (items[f - 1].taken or purge(items[f - 1])):
                f -= 1
        level = self.level
        while level > 0 and f <= 1 << (level - 1):
            level -= 1
        if level < self.level:
            kept = [it for it in items[:f] if not is_dead(it, purge)]
            return Block(level, kept, self.bloom).shrink(purge)
        # racy store on shared blocks: f only ever drops dead items
        self.filled = f
        return self


def merge_blocks(b1: Block, b2: Block, purge: Purge = None) -> Block:
    dst = Block(max(b1.level, b2.level) + 1)
    dst.merge_in(b1, b2, purge)
    return dst.shrink(purge)


def consolidate_levels(blocks: list[Block], purge: Purge = None) -> tuple[list[Block], bool]:
    """Shrink and merge a level-ordered block list until levels strictly decrease.

    Blocks are visited from the smallest (the end of the list) to the
    largest; a block whose level, after shrinking, does not exceed its
    smaller neighbour is merged with it, repeatedly. Empty blocks are
    dropped. Returns the new list (largest first) and whether any merge
    happened.
    """
    acc: list[Block] = []  # increasing levels, acc[-1] largest
    merged = False
    for b in reversed(blocks):
        b = b.shrink(purge)
        if b.filled == 0:
            continue
        while acc and acc[-1].level >= b.level:
            b = merge_blocks(b, acc.pop(), purge)
            merged = True
        if b.filled:
            acc.append(b)
    acc.reverse()
    return acc, merged


class Reclaimer:
    """Epoch-based deferred reclamation with a poisoning debug mode.

    Python's garbage collector already guarantees that nothing reachable is
    freed, so in normal operation this object does nothing. With
    ``poison=True`` retired blocks are "released" by overwriting their item
    slots with fresh sentinel items carrying ``POISON_KEY``: any handle that
    still read a released block would then surface that key. A block retired
    while the global epoch is ``e`` is released only once the epoch reaches
    ``e + 2``, which requires every handle active at retirement to have
    finished its operation.
    """

    def __init__(self, poison: bool = False):
        self.enabled = poison
        self.epoch = 0
        self.released = 0
        self._active: list[bool] = []
        self._local: list[int] = []
        self._limbo: list[list[tuple[int, Block]]] = []
        self._lock = threading.Lock()

    def register(self) -> int:
        with self._lock:
            self._active.append(False)
            self._local.append(0)
            self._limbo.append([])
            return len(self._active) - 1

    def enter(self, slot: int) -> None:
        if self.enabled:
            self._local[slot] = self.epoch
            self._active[slot] = True

    def exit(self, slot: int) -> None:
        if not self.enabled:
            return
        self._active[slot] = False
        self._try_advance()
        self._collect(slot)

    def retire(self, slot: int, blocks: Iterable[Block]) -> None:
        if self.enabled:
            e = self.epoch
            self._limbo[slot].extend((e, b) for b in blocks)

    def _try_advance(self) -> None:
        with self._lock:
            e = self.epoch
            for active, local in zip(self._active, self._local):
                if active and local != e:
                    return
            self.epoch = e + 1

    def _collect(self, slot: int) -> None:
        limbo = self._limbo[slot]
        horizon = self.epoch - 2
        keep = []
        for e, b in limbo:
            if e <= horizon:
                b.items = [Item(POISON_KEY, POISON_KEY) for _ in b.items]
                self.released += 1
            else:
                keep.append((e, b))
        self._limbo[slot] = keep
