"""Prefilled 50/50 insert/delete mix at a few settings.

Under CPython's global interpreter lock, threads interleave rather than run
in parallel, so the numbers show overheads, not scalability.
"""

from klsm.bench import ThroughputConfig, throughput_run
from klsm.bench.cli import mean_ci

for threads, k in [(1, 0), (1, 256), (4, 0), (4, 256)]:
    rates = []
    for seed in range(3):
        cfg = ThroughputConfig(threads=threads, k=k, prefill=20_000, duration=0.5, seed=seed)
        st = throughput_run(cfg)
        assert st.drained + st.deletes == cfg.prefill + st.inserts
        rates.append(st.ops_per_s)
    m, half = mean_ci(rates)
    print(f"threads={threads} k={k:3d}: {m:9.0f} ops/s  +/- {half:.0f}")
