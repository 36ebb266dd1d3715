"""Label-correcting parallel SSSP on the k-LSM.

Entries are ``(distance, node)`` items; a node improved while it already
has an entry in flight just gets another one, and the older entry turns
stale. Stale entries are skipped on pop and dropped by the queue's
deletion hook when blocks are rebuilt.

Termination counts *pending nodes* (nodes whose freshest entry is still in
the queue or being processed) rather than entries, because purged entries
are never popped.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from ..atomics import AtomicCounter
from ..queue import KLSM
from .graph import INF, Graph

_STRIPES = 256


class DistTable:
    """Tentative distances with an atomic-minimum update."""

    def __init__(self, n: int, source: int):
        self.dist: list[float] = [INF] * n
        self.pending = [False] * n
        self.dist[source] = 0
        self.pending[source] = True
        self._locks = [threading.Lock() for _ in range(min(_STRIPES, max(n, 1)))]

    def lower(self, v: int, d: int) -> tuple[bool, bool]:
        """Set ``dist[v] = min(dist[v], d)``; returns (improved, newly pending)."""
        with self._locks[v % len(self._locks)]:
            if d >= self.dist[v]:
                return False, False
            self.dist[v] = d
            fresh = not self.pending[v]
            self.pending[v] = True
            return True, fresh

    def claim(self, v: int, d: int) -> bool:
        """True if ``(d, v)`` is the freshest entry of ``v``; clears its pending flag."""
        with self._locks[v % len(self._locks)]:
            if d != self.dist[v] or not self.pending[v]:
                return False
            self.pending[v] = False
            return True


@dataclass
class SSSPResult:
    dist: list[float]
    iterations: int
    stale_pops: int
    reachable: int
    elapsed: float = 0.0

    @property
    def extra_iterations(self) -> int:
        # a sequential Dijkstra settles each reachable node exactly once
        return self.iterations - self.reachable


def sssp_run(g: Graph, source: int, threads: int, k: int, seed: int = 0) -> SSSPResult:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} not in graph")
    adj = g.adjacency()
    table = DistTable(g.n, source)
    dist = table.dist
    in_flight = AtomicCounter(1)
    q = KLSM(k, threads, seed=seed)
    q.set_needs_deletion_hook(lambda key, node: key > dist[node])
    handles = [q.register_handle() for _ in range(threads)]
    handles[0].insert(0, source)
    iterations = [0] * threads
    stale = [0] * threads
    errors: list[BaseException] = []

    def worker(i: int) -> None:
        h = handles[i]
        try:
            while True:
                r = q.try_delete_min(h)
                if r is None:
                    if in_flight.value == 0 or errors:
                        return
                    time.sleep(0)  # let the busy workers have the interpreter
                    continue
                d, u = r
                if not table.claim(u, d):
                    stale[i] += 1
                    continue
                iterations[i] += 1
                for v, w in adj[u]:
                    nd = d + w
                    if nd < dist[v]:
                        improved, fresh = table.lower(v, nd)
                        if improved:
                            if fresh:
                                in_flight.add(1)
                            q.insert(h, nd, v)
                in_flight.add(-1)
        except BaseException as e:  # surfaced after join
            errors.append(e)

    t0 = time.perf_counter()
    if threads == 1:
        worker(0)
    else:
        ts = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(threads)]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
    elapsed = time.perf_counter() - t0
    if errors:
        raise errors[0]
    reachable = sum(1 for d in dist if d != INF)
    return SSSPResult(list(dist), sum(iterations), sum(stale), reachable, elapsed)
