"""Deterministic multi-handle execution of the queue on a single thread.

Every handle runs its script inside a greenlet. The queue calls
``probe.point`` before each step that touches shared state; under the
driver that call suspends the handle and hands control back, so a
*schedule* (the sequence of handle ids to resume, one step each) fixes the
interleaving completely. Linearization indices come from the queue's own
``mark`` events: an insert at the write or swap that made it visible, a
delete-min at its last comparison of the published array with the
handle's snapshot.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from greenlet import greenlet

from .. import probe as P
from ..queue import KLSM, Handle
from ..shared import BlockArray
from .checks import Verdict, check_structural
from .trace import Trace

# ("I", key) or ("I", key, payload) or ("D",)
Op = tuple
Program = Sequence[Sequence[Op]]


class DriverError(RuntimeError):
    pass


class _DriverProbe(P.Probe):
    def __init__(self, driver: Driver):
        self.driver = driver

    def point(self, kind, handle):
        d = self.driver
        if greenlet.getcurrent() is d._workers[handle.id]:
            d._labels[handle.id] = kind
            d._main.switch()

    def mark(self, kind, handle, arg=None):
        self.driver._on_mark(kind, handle, arg)


class Driver:
    """Step-by-step runner for one program.

    ``on_complete(driver, hid)`` runs after each finished operation and
    ``on_publish(driver, array)`` after each successful swap of the shared
    array; both run while no handle is between steps.
    """

    def __init__(self, program: Program, k: int, seed: int = 0, *, poison: bool = False,
                 on_complete: Optional[Callable[[Driver, int], None]] = None,
                 on_publish: Optional[Callable[[Driver, BlockArray], None]] = None):
        self.program = [list(ops) for ops in program]
        self.probe = _DriverProbe(self)
        self.queue = KLSM(k, len(self.program), seed=seed, probe=self.probe, poison=poison)
        self.handles: list[Handle] = [self.queue.register_handle() for _ in self.program]
        self.on_complete = on_complete
        self.on_publish = on_publish
        self.clock = 0
        self.steps = 0
        self.records: list[tuple[int, str, int, Optional[int]]] = []
        self.results: list[list] = [[] for _ in self.program]
        self.completed = [0] * len(self.program)
        self._last_verify = [None] * len(self.program)
        self._current: list[Optional[Op]] = [None] * len(self.program)
        self._labels: list[Optional[str]] = ["start"] * len(self.program)
        self._done = [False] * len(self.program)
        self._main = greenlet.getcurrent()
        self._workers = [greenlet(self._make_worker(i)) for i in range(len(self.program))]

    def _make_worker(self, hid: int):
        def run():
            h = self.handles[hid]
            for op in self.program[hid]:
                self._current[hid] = op
                if op[0] == "I":
                    h.insert(op[1], op[2] if len(op) > 2 else 0)
                    self.results[hid].append(None)
                elif op[0] == "D":
                    self.results[hid].append(h.try_delete_min())
                else:
                    raise DriverError(f"unknown op {op!r}")
                self.completed[hid] += 1
                if self.on_complete is not None:
                    self.on_complete(self, hid)
            self._current[hid] = None
        return run

    def _on_mark(self, kind, handle, arg):
        hid = handle.id
        if kind == P.M_VERIFY:
            self.clock += 1
            self._last_verify[hid] = self.clock
        elif kind == P.M_INSERT:
            self.clock += 1
            self.records.append((self.clock, "I", hid, self._current[hid][1]))
        elif kind == P.M_DELETE:
            self.records.append((self._last_verify[hid], "D", hid, arg.key))
        elif kind == P.M_FAIL:
            self.records.append((self._last_verify[hid], "F", hid, None))
        elif kind == P.M_PUBLISHED and self.on_publish is not None:
            self.on_publish(self, arg)

    # -- scheduling -------------------------------------------------------

    def runnable(self) -> list[int]:
        return [i for i, d in enumerate(self._done) if not d]

    def finished(self) -> bool:
        return all(self._done)

    def label(self, hid: int) -> Optional[str]:
        """Kind of the step ``hid`` will take next (``"start"`` before its first step)."""
        return None if self._done[hid] else self._labels[hid]

    def step(self, hid: int) -> Optional[str]:
        """Resume ``hid`` for one step; returns its next point kind, or None once it finished."""
        if not 0 <= hid < len(self._workers) or self._done[hid]:
            raise DriverError(f"handle {hid} has no pending step")
        self.steps += 1
        self._workers[hid].switch()
        if self._workers[hid].dead:
            self._done[hid] = True
            self._labels[hid] = None
            return None
        return self._labels[hid]

    def run(self, schedule: Sequence[int]) -> Driver:
        for hid in schedule:
            self.step(hid)
        return self

    def run_ops(self, hid: int, n: int = 1) -> Driver:
        """Step ``hid`` alone until ``n`` more of its operations completed."""
        target = self.completed[hid] + n
        while self.completed[hid] < target:
            self.step(hid)
        return self

    def run_round_robin(self, skip: Sequence[int] = (), deadline: Optional[float] = None) -> bool:
        """Alternate over unfinished handles not in ``skip``; False if the deadline passed."""
        while True:
            live = [i for i in self.runnable() if i not in skip]
            if not live:
                return True
            for i in live:
                self.step(i)
            if deadline is not None and time.monotonic() > deadline:
                return False

    def run_random(self, rng: random.Random) -> Driver:
        while True:
            live = self.runnable()
            if not live:
                return self
            self.step(rng.choice(live))

    def trace(self) -> Trace:
        t = Trace()
        for idx, op, hid, key in sorted(self.records, key=lambda r: r[0]):
            t.append(op, hid, key, index=idx)
        return t


def drive_schedule(program: Program, schedule: Sequence[int], k: int, seed: int = 0,
                   finish: bool = True) -> Trace:
    """Run ``program`` under ``schedule`` and return the linearized trace.

    With ``finish`` the handles left unfinished by the schedule then run
    round-robin to completion.
    """
    d = Driver(program, k, seed).run(schedule)
    if finish:
        d.run_round_robin()
    return d.trace()


@dataclass
class Exploration:
    schedules: int = 0
    violations: list[tuple[list[int], str]] = field(default_factory=list)
    max_depth: int = 0


def explore(program: Program, k: int, seed: int = 0, *,
            check: Optional[Callable[[Driver], Optional[str]]] = None,
            on_complete: Optional[Callable[[Driver, int], None]] = None,
            setup: Optional[Callable[[Driver], None]] = None,
            limit: Optional[int] = None) -> Exploration:
    """Enumerate every schedule of ``program`` by depth-first replay.

    ``setup(driver)`` runs first on every replay (for instance a serial
    prefill through :meth:`Driver.run_ops`) and is not branched on.

    ``check(driver)`` runs at each leaf and returns an error message or
    None; by default it applies :func:`check_structural` with
    ``rho = k * handles``.
    """
    if check is None:
        rho = k * len(program)

        def check(d: Driver) -> Optional[str]:
            v: Verdict = check_structural(d.trace(), rho)
            return None if v.ok else f"{v.detail} at {v.record}"

    result = Exploration()
    # choice stack: (runnable handles, index chosen) per depth
    stack: list[tuple[list[int], int]] = []
    while True:
        d = Driver(program, k, seed, on_complete=on_complete)
        if setup is not None:
            setup(d)
        schedule = []
        for runnable, idx in stack:
            schedule.append(runnable[idx])
            d.step(runnable[idx])
        while not d.finished():
            runnable = d.runnable()
            stack.append((runnable, 0))
            schedule.append(runnable[0])
            d.step(runnable[0])
        result.schedules += 1
        result.max_depth = max(result.max_depth, len(schedule))
        msg = check(d)
        if msg is not None:
            result.violations.append((schedule, msg))
        while stack and stack[-1][1] + 1 >= len(stack[-1][0]):
            stack.pop()
        if not stack or (limit is not None and result.schedules >= limit):
            return result
        runnable, idx = stack.pop()
        stack.append((runnable, idx + 1))
