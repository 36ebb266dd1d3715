"""Relaxation verdicts over linearized traces.

An operation *skips* a live item when exact priority-queue semantics would
have it return that item (or something at least as small) instead. A failed
delete-min skips every live item.

Structural rho-relaxation bounds how many items are skipped at the moment
of each delete. Temporal rho-relaxation only lets an operation skip items
that are among the ``rho`` most recent insertions, counting insertions of
items that have since been deleted; each insertion is a distinct instance
even when keys repeat, and a delete of a repeated key removes the oldest
live instance.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Optional

from .trace import LiveMultiset, Record, Trace, TraceError


@dataclass
class Verdict:
    ok: bool
    line: Optional[int] = None  # 1-based record number of the first violation
    record: Optional[Record] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def rank_of(key: int, live: LiveMultiset) -> int:
    """1-based rank of a live ``key``: live keys strictly smaller, plus one."""
    if key not in live:
        raise TraceError(f"key {key} is not live")
    return live.smaller_than(key) + 1


def check_structural(trace: Trace, rho: int) -> Verdict:
    live = LiveMultiset()
    prev = None
    for line, r in enumerate(trace, 1):
        if prev is not None and r.index <= prev:
            raise TraceError("linearization indices must strictly increase", line)
        prev = r.index
        if r.op == "I":
            live.add(r.key)
        elif r.op == "D":
            if r.key not in live:
                raise TraceError(f"delete of key {r.key} that is not live", line)
            rank = rank_of(r.key, live)
            if rank > rho + 1:
                return Verdict(False, line, r, f"rank {rank} > rho+1 = {rho + 1}")
            live.remove(r.key)
        elif len(live) > rho:
            return Verdict(False, line, r, f"failure with {len(live)} live items > rho = {rho}")
    return Verdict(True)


def check_temporal(trace: Trace, rho: int) -> Verdict:
    # live instances: key -> deque of insertion ordinals (oldest first)
    by_key: dict[int, deque[int]] = defaultdict(deque)
    inserted = 0
    prev = None
    for line, r in enumerate(trace, 1):
        if prev is not None and r.index <= prev:
            raise TraceError("linearization indices must strictly increase", line)
        prev = r.index
        if r.op == "I":
            by_key[r.key].append(inserted)
            inserted += 1
            continue
        if r.op == "D" and not by_key.get(r.key):
            raise TraceError(f"delete of key {r.key} that is not live", line)
        # oldest live instance that this operation skips
        oldest = None
        for key, inst in by_key.items():
            if inst and (r.op == "F" or key < r.key):
                if oldest is None or inst[0] < oldest:
                    oldest = inst[0]
        if oldest is not None and inserted - 1 - oldest >= rho:
            newer = inserted - 1 - oldest
            return Verdict(False, line, r,
                           f"skipped an item with {newer} later insertions (rho = {rho})")
        if r.op == "D":
            by_key[r.key].popleft()
    return Verdict(True)


def is_exact_history(trace: Trace) -> bool:
    """Brute-force reference: replay on a plain list, each delete must return min()."""
    live: list[int] = []
    for r in trace:
        if r.op == "I":
            live.append(r.key)
        elif r.op == "D":
            if not live or r.key != min(live):
                return False
            live.remove(r.key)
        elif live:
            return False
    return True
