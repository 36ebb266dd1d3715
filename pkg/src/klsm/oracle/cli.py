"""``relax-check``: verify a trace file against a relaxation bound.

Exit status is 0 when the trace passes, 1 on a relaxation violation (the
offending record is printed) and 2 when the trace cannot be read.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .checks import check_structural, check_temporal
from .trace import Trace, TraceError

CHECKS = {"structural": check_structural, "temporal": check_temporal}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relax-check", description=__doc__.splitlines()[0])
    p.add_argument("--rho", type=int, required=True, help="relaxation bound (>= 0)")
    p.add_argument("--mode", choices=sorted(CHECKS), default="structural")
    p.add_argument("tracefile", help="trace in 'idx op handle key' lines, '-' for stdin")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.rho < 0:
        print("relax-check: --rho must be non-negative", file=sys.stderr)
        return 2
    try:
        if args.tracefile == "-":
            trace = Trace.load(sys.stdin)
        else:
            with open(args.tracefile, encoding="utf-8") as fp:
                trace = Trace.load(fp)
        verdict = CHECKS[args.mode](trace, args.rho)
    except (OSError, TraceError) as e:
        print(f"relax-check: malformed trace: {e}", file=sys.stderr)
        return 2
    if verdict.ok:
        print(f"pass: {len(trace)} records, {args.mode} rho={args.rho}")
        return 0
    print(f"violation at record {verdict.line}: {verdict.record.to_line()}  ({verdict.detail})")
    return 1


if __name__ == "__main__":
    sys.exit(main())
