"""Parallel label-correcting shortest paths on a random graph."""

import time

import numpy as np

from klsm.bench import dijkstra_ref, gen_gnp, sssp_run

g = gen_gnp(1000, 0.05, seed=7)
print("edges:", g.edge_count, " mean weight:", int(g.weights.mean()))

t = time.perf_counter()
ref = dijkstra_ref(g, 0)
print(f"sequential dijkstra {time.perf_counter() - t:.2f} s")

rows = []
for threads in (1, 2, 4):
    for k in (0, 16, 256):
        r = sssp_run(g, 0, threads, k, seed=1)
        assert r.dist == ref
        rows.append((threads, k, r.iterations, r.extra_iterations, r.stale_pops, r.elapsed))

print("threads    k  pops  extra  stale  seconds")
for threads, k, it, extra, stale, secs in rows:
    print(f"{threads:7d} {k:4d} {it:5d} {extra:6d} {stale:6d} {secs:8.2f}")

finite = np.array([d for d in ref if d != float("inf")])
print("reachable:", finite.size, " max distance:", int(finite.max()))
