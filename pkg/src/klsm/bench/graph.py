"""Random directed graphs and a sequential shortest-path reference."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf
WMAX = 10**8


@dataclass
class Graph:
    """Directed graph in CSR form; edge ``e`` of node ``u`` is ``targets[e]`` with ``weights[e]``."""

    n: int
    offsets: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    _adj: list | None = field(default=None, repr=False, compare=False)

    @property
    def edge_count(self) -> int:
        return int(self.offsets[-1])

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-node ``(target, weight)`` lists as plain Python ints (cached)."""
        if self._adj is not None:
            return self._adj
        off = self.offsets.tolist()
        tgt = self.targets.tolist()
        wgt = self.weights.tolist()
        self._adj = [list(zip(tgt[off[u]:off[u + 1]], wgt[off[u]:off[u + 1]]))
                     for u in range(self.n)]
        return self._adj

    @classmethod
    def from_edges(cls, n: int, edges: list[tuple[int, int, int]]) -> Graph:
        edges = sorted(edges)
        src = np.array([e[0] for e in edges], dtype=np.int64)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.add.at(offsets, src + 1, 1)
        return cls(n, np.cumsum(offsets),
                   np.array([e[1] for e in edges], dtype=np.int64),
                   np.array([e[2] for e in edges], dtype=np.int64))


def gen_gnp(n: int, p: float, seed: int, wmax: int = WMAX) -> Graph:
    """Erdos-Renyi G(n, p) with each directed edge drawn independently, no self-loops.

    Weights are uniform integers in ``[1, wmax]``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    if n < 0 or wmax < 1:
        raise ValueError("need n >= 0 and wmax >= 1")
    rng = np.random.default_rng(seed)
    offsets = np.zeros(n + 1, dtype=np.int64)
    targets, weights = [], []
    for u in range(n):
        # row by row keeps memory at O(n) for dense settings
        row = np.flatnonzero(rng.random(n) < p)
        row = row[row != u]
        targets.append(row)
        weights.append(rng.integers(1, wmax, size=row.size, endpoint=True))
        offsets[u + 1] = offsets[u] + row.size
    cat = (lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=np.int64))
    return Graph(n, offsets, cat(targets).astype(np.int64), cat(weights).astype(np.int64))


def dijkstra_ref(g: Graph, source: int) -> list[float]:
    """Textbook Dijkstra on a binary heap; unreachable nodes get ``inf``."""
    adj = g.adjacency()
    dist: list[float] = [INF] * g.n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist
