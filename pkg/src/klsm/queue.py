"""The k-LSM relaxed priority queue."""

from __future__ import annotations

import random
import threading
from typing import Callable, Optional

from . import probe as P
from .block import Item, Purge, Reclaimer
from .dist_lsm import DistLSM
from .shared import BlockArray, BlockBloom, SharedKLSM


class Handle:
    """A single-owner session on a :class:`KLSM`.

    Plays the role of a thread's local state: its distributed LSM, its view
    of the shared array, and its random generator. A handle must not be used
    by two threads at once.
    """

    def __init__(self, queue: KLSM, hid: int, seed: int):
        self.queue = queue
        self.id = hid
        self.dist = DistLSM(hid)
        self.observed: Optional[BlockArray] = None
        self.observed_version = 0
        self.snapshot: Optional[BlockArray] = None
        self.seed = seed
        self._rng: Optional[random.Random] = None
        self.bloom_mask = queue.bloom.mask(hid)
        self.reclaimer = queue.reclaimer
        self.slot = queue.reclaimer.register()

    def __repr__(self) -> str:
        return f"Handle({self.id})"

    @property
    def rng(self) -> random.Random:
        # seeding is costly relative to a short scripted run, so it is deferred
        if self._rng is None:
            self._rng = random.Random(self.seed)
        return self._rng

    def insert(self, key: int, payload: int = 0) -> None:
        self.queue.insert(self, key, payload)

    def try_delete_min(self) -> Optional[tuple[int, int]]:
        return self.queue.try_delete_min(self)


class KLSM:
    """Lock-free relaxed priority queue over per-handle LSMs and a shared k-LSM.

    A successful ``try_delete_min`` returns one of the ``rho + 1`` smallest
    live keys, ``rho = k * (number of handles)``, and never skips a live key
    inserted by the calling handle.

    >>> q = KLSM(k=0, max_handles=1)
    >>> h = q.register_handle()
    >>> for key in (5, 3, 9):
    ...     h.insert(key)
    >>> h.try_delete_min()
    (3, 0)
    """

    def __init__(self, k: int, max_handles: int, seed: int = 0,
                 probe: P.Probe = P.NULL_PROBE, poison: bool = False):
        if k < 0:
            raise ValueError("k must be non-negative")
        if max_handles < 1:
            raise ValueError("max_handles must be positive")
        self.k = k
        self.max_handles = max_handles
        self.seed = seed
        self.probe = probe
        self.bloom = BlockBloom(seed)
        self.reclaimer = Reclaimer(poison)
        self.shared = SharedKLSM(k, probe, self.reclaimer)
        self.handles: list[Handle] = []
        self._purge: Purge = None
        self._register_lock = threading.Lock()

    @property
    def rho(self) -> int:
        return self.k * len(self.handles)

    def register_handle(self) -> Handle:
        with self._register_lock:
            if len(self.handles) >= self.max_handles:
                raise RuntimeError(f"all {self.max_handles} handles are registered")
            hid = len(self.handles)
            h = Handle(self, hid, self.seed * 1_000_003 + hid)
            self.handles.append(h)
            return h

    def set_needs_deletion_hook(self, predicate: Optional[Callable[[int, int], bool]]) -> None:
        """Items with ``predicate(key, payload)`` true are dropped whenever a block is rebuilt.

        Such items can still be returned until a copy or shrink touches them.
        """
        if predicate is None:
            self._purge = None
        else:
            self._purge = lambda item: predicate(item.key, item.payload)
        self.shared.purge = self._purge

    def insert(self, h: Handle, key: int, payload: int = 0) -> None:
        rec = self.reclaimer
        rec.enter(h.slot)
        try:
            h.dist.insert(Item(key, payload), h, self.shared, self.k, self._purge)
        finally:
            rec.exit(h.slot)

    def try_delete_min(self, h: Handle) -> Optional[tuple[int, int]]:
        """Delete and return ``(key, payload)``, or None if the queue looked empty.

        None may be spurious; callers wanting certainty retry.
        """
        rec = self.reclaimer
        rec.enter(h.slot)
        try:
            return self._delete_min(h)
        finally:
            rec.exit(h.slot)

    def _delete_min(self, h: Handle) -> Optional[tuple[int, int]]:
        probe = self.probe
        purge = self._purge
        dist = h.dist
        shared = self.shared
        spied = False
        while True:
            while True:
                item = dist.find_min(h, probe, purge)
                other = shared.find_min(h)
                # ties go to the local item
                if item is None or (other is not None and other.key < item.key):
                    item = other
                if item is None:
                    break
                probe.point(P.TAKE, h)
                if not item.taken and item.take():
                    probe.mark(P.M_DELETE, h, item)
                    return item.key, item.payload
            if spied:
                break
            spied = True
            victim = self._pick_victim(h)
            if victim is None or not dist.spy(victim.dist, h, self.k, probe, purge):
                break
        probe.mark(P.M_FAIL, h)
        return None

    def _pick_victim(self, h: Handle) -> Optional[Handle]:
        n = len(self.handles)
        if n < 2:
            return None
        j = h.rng.randrange(n - 1)
        return self.handles[j if j < h.id else j + 1]

    def approx_size(self) -> int:
        """Number of distinct live items reachable from the shared array and all local LSMs.

        Exact when no operation is in flight.
        """
        seen: set[int] = set()
        arr = self.shared.published()
        sources = list(arr.blocks) if arr is not None else []
        for h in self.handles:
            sources.extend(h.dist.view())
        for b in sources:
            for it in b.items[: b.filled]:
                if not it.taken:
                    seen.add(id(it))
        return len(seen)

    def drain(self, h: Handle) -> list[tuple[int, int]]:
        """Delete everything reachable, retrying spurious failures. Quiescent use only."""
        out = []
        while True:
            r = self.try_delete_min(h)
            if r is not None:
                out.append(r)
            elif self.approx_size() == 0:
                return out
