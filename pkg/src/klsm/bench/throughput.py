"""Prefilled insert/delete-min mix, one handle per worker thread."""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass

from ..queue import KLSM

KEY_RANGE = 1 << 31


@dataclass
class ThroughputConfig:
    threads: int = 1
    k: int = 256
    prefill: int = 10**6
    duration: float = 10.0
    ratio: float = 0.5  # probability that an operation is an insert
    key_range: int = KEY_RANGE
    seed: int = 0

    def validate(self) -> None:
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.prefill < 0:
            raise ValueError("prefill must be >= 0")
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must be in [0, 1]")
        if self.key_range < 1:
            raise ValueError("key_range must be >= 1")


@dataclass
class ThroughputStats:
    threads: int
    elapsed: float
    inserts: int
    deletes: int
    failures: int
    drained: int = 0

    @property
    def total_ops(self) -> int:
        return self.inserts + self.deletes + self.failures

    @property
    def ops_per_thread_per_s(self) -> float:
        return self.total_ops / self.threads / self.elapsed if self.elapsed > 0 else 0.0

    @property
    def ops_per_s(self) -> float:
        return self.total_ops / self.elapsed if self.elapsed > 0 else 0.0


def throughput_run(cfg: ThroughputConfig, drain: bool = True) -> ThroughputStats:
    """Run the mix for ``cfg.duration`` seconds after every worker prefilled its share.

    With ``drain`` the queue is emptied afterwards and the count recorded,
    so that ``drained + deletes == prefill + inserts`` can be checked.
    """
    cfg.validate()
    q = KLSM(cfg.k, cfg.threads, seed=cfg.seed)
    try:
        handles = [q.register_handle() for _ in range(cfg.threads)]
    except RuntimeError as e:
        raise ValueError(f"bad config: {e}") from None
    counts = [[0, 0, 0] for _ in range(cfg.threads)]
    start = threading.Barrier(cfg.threads + 1)
    stop = threading.Event()
    errors: list[BaseException] = []

    def worker(i: int) -> None:
        h = handles[i]
        rng = random.Random((cfg.seed << 16) ^ (i + 1))
        share = cfg.prefill // cfg.threads + (1 if i < cfg.prefill % cfg.threads else 0)
        kr, ratio = cfg.key_range, cfg.ratio
        try:
            for _ in range(share):
                h.insert(rng.randrange(kr))
        except BaseException as e:
            errors.append(e)
        start.wait()
        c = counts[i]
        try:
            while not stop.is_set():
                # check the clock every few ops only
                for _ in range(16):
                    if rng.random() < ratio:
                        h.insert(rng.randrange(kr))
                        c[0] += 1
                    elif h.try_delete_min() is not None:
                        c[1] += 1
                    else:
                        c[2] += 1
        except BaseException as e:
            errors.append(e)

    ts = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(cfg.threads)]
    for t in ts:
        t.start()
    start.wait()
    t0 = time.perf_counter()
    stop.wait(cfg.duration)
    stop.set()
    for t in ts:
        t.join()
    elapsed = time.perf_counter() - t0
    if errors:
        raise errors[0]
    stats = ThroughputStats(cfg.threads, elapsed, sum(c[0] for c in counts),
                            sum(c[1] for c in counts), sum(c[2] for c in counts))
    if drain:
        stats.drained = len(q.drain(handles[0]))
    return stats
