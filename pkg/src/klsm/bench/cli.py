"""``klsm-bench``: throughput and SSSP benchmarks, one CSV line per run.

Keys are drawn uniformly from [0, 2**31) and deleted keys are not
reinserted. With ``--repeat N`` each configuration runs N times (seeds
``seed .. seed+N-1``) and the mean with a 95% confidence interval is
written to stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .graph import dijkstra_ref, gen_gnp
from .sssp import sssp_run
from .throughput import ThroughputConfig, throughput_run

HEADER = ["mode", "threads", "k", "prefill_or_nodes", "seed", "duration_s", "total_ops",
          "ops_per_thread_per_s", "extra_iterations"]


def mean_ci(xs: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """Mean and half-width of the Student-t confidence interval."""
    a = np.asarray(xs, dtype=float)
    m = float(a.mean())
    if a.size < 2:
        return m, float("nan")
    half = stats.t.ppf(0.5 + level / 2, a.size - 1) * stats.sem(a)
    return m, float(half)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="klsm-bench", description=__doc__.splitlines()[0],
                                epilog="Key distribution: uniform in [0, 2**31); "
                                       "deleted keys are not reinserted.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-header", action="store_true", help="omit the CSV header")
    common.add_argument("--repeat", type=int, default=1, help="runs per configuration (default 1)")
    sub = p.add_subparsers(dest="mode", required=True)

    t = sub.add_parser("throughput", parents=[common],
                       help="prefilled 50/50 insert/delete-min mix")
    t.add_argument("--threads", type=int, default=1)
    t.add_argument("--k", type=int, default=256)
    t.add_argument("--prefill", type=int, default=10**6)
    t.add_argument("--duration", type=float, default=10.0, help="seconds")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--ratio", type=float, default=0.5, help="insert probability")

    s = sub.add_parser("sssp", parents=[common], help="label-correcting SSSP on G(n, p)")
    s.add_argument("--nodes", type=int, default=1000)
    s.add_argument("--edge-prob", type=float, default=0.05)
    s.add_argument("--large", action="store_true",
                   help="n=10000, p=0.5 (about 5e7 edges; slow and memory hungry)")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--k", type=int, default=256)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--source", type=int, default=0)
    s.add_argument("--verify", action="store_true",
                   help="compare with sequential Dijkstra; exit 1 on any mismatch")
    return p


def _throughput(args, seed: int) -> tuple[list, float]:
    cfg = ThroughputConfig(threads=args.threads, k=args.k, prefill=args.prefill,
                           duration=args.duration, ratio=args.ratio, seed=seed)
    st = throughput_run(cfg, drain=False)
    row = ["throughput", cfg.threads, cfg.k, cfg.prefill, seed, f"{st.elapsed:.3f}",
           st.total_ops, f"{st.ops_per_thread_per_s:.1f}", ""]
    return row, st.ops_per_thread_per_s


def _sssp(args, seed: int) -> tuple[list, float, bool]:
    g = gen_gnp(args.nodes, args.edge_prob, seed)
    r = sssp_run(g, args.source, args.threads, args.k, seed=seed)
    ok = True
    if args.verify:
        ref = dijkstra_ref(g, args.source)
        bad = [v for v in range(g.n) if r.dist[v] != ref[v]]
        if bad:
            ok = False
            print(f"klsm-bench: seed {seed}: {len(bad)} distance mismatches, first at node {bad[0]}",
                  file=sys.stderr)
    row = ["sssp", args.threads, args.k, args.nodes, seed, f"{r.elapsed:.3f}", r.iterations,
           f"{r.iterations / args.threads / r.elapsed:.1f}" if r.elapsed > 0 else "0",
           r.extra_iterations]
    return row, r.extra_iterations, ok


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.repeat < 1:
        print("klsm-bench: --repeat must be >= 1", file=sys.stderr)
        return 2
    if args.mode == "sssp" and args.large:
        args.nodes, args.edge_prob = 10_000, 0.5
    out = csv.writer(sys.stdout, lineterminator="\n")
    if not args.no_header:
        out.writerow(HEADER)
    values = []
    ok = True
    try:
        for r in range(args.repeat):
            seed = args.seed + r
            if args.mode == "throughput":
                row, v = _throughput(args, seed)
            else:
                row, v, good = _sssp(args, seed)
                ok = ok and good
            out.writerow(row)
            sys.stdout.flush()
            values.append(v)
    except ValueError as e:
        print(f"klsm-bench: {e}", file=sys.stderr)
        return 2
    if args.repeat > 1:
        what = "ops_per_thread_per_s" if args.mode == "throughput" else "extra_iterations"
        m, half = mean_ci(values)
        print(f"{what}: mean {m:.2f} +/- {half:.2f} (95% CI, n={len(values)})", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
