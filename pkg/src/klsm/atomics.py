"""Atomic primitives for CPython.

CPython exposes no compare-and-swap instruction, so each primitive guards a
single compare-and-store with a small lock. The lock is never held across a
scheduler yield point or across any other shared access, so the structures
built on top keep their lock-free progress argument: a thread suspended
between atomic steps cannot hold any of these locks.
"""

from __future__ import annotations

import threading
from typing import Any, Generic, TypeVar

T = TypeVar("T")

_STRIPES = 64
_locks = [threading.Lock() for _ in range(_STRIPES)]


def stripe_lock(obj: Any) -> threading.Lock:
    """Lock guarding the atomic fields of ``obj`` (shared by 1/64 of objects)."""
    return _locks[(id(obj) >> 4) % _STRIPES]


class AtomicReference(Generic[T]):
    __slots__ = ("_value", "_lock")

    def __init__(self, value: T | None = None):
        self._value = value
        self._lock = threading.Lock()

    def get(self) -> T | None:
        return self._value

    def set(self, value: T | None) -> None:
        with self._lock:
            self._value = value

    def compare_and_set(self, expected: T | None, new: T | None) -> bool:
        # identity comparison, like a pointer CAS
        with self._lock:
            if self._value is not expected:
                return False
            self._value = new
            return True


class AtomicCounter:
    __slots__ = ("_value", "_lock")

    def __init__(self, value: int = 0):
        self._value = value
        self._lock = threading.Lock()

    @property
    def value(self) -> int:
        return self._value

    def add(self, delta: int = 1) -> int:
        """Add ``delta`` and return the new value."""
        with self._lock:
            self._value += delta
            return self._value

    def compare_and_set(self, expected: int, new: int) -> bool:
        with self._lock:
            if self._value != expected:
                return False
            self._value = new
            return True
