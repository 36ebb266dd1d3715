"""Linearized operation histories and their text format.

One record per line: ``idx op handle key`` with ``op`` one of ``I``
(insert), ``D`` (successful delete-min) or ``F`` (failed delete-min, key
written as ``-``). Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional


class TraceError(ValueError):
    """The trace itself is malformed (as opposed to violating a relaxation bound)."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Record:
    index: int
    op: str
    handle: int
    key: Optional[int] = None

    def __post_init__(self):
        if self.op not in ("I", "D", "F"):
            raise TraceError(f"unknown op {self.op!r}")
        if (self.key is None) != (self.op == "F"):
            raise TraceError(f"op {self.op} {'must not' if self.op == 'F' else 'must'} carry a key")

    def to_line(self) -> str:
        key = "-" if self.key is None else str(self.key)
        return f"{self.index} {self.op} {self.handle} {key}"


class Trace:
    def __init__(self, records: Iterable[Record] = ()):
        self.records: list[Record] = list(records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Trace) and self.records == other.records

    def __repr__(self) -> str:
        return f"Trace({self.records!r})"

    def append(self, op: str, handle: int, key: Optional[int] = None,
               index: Optional[int] = None) -> Record:
        if index is None:
            index = self.records[-1].index + 1 if self.records else 0
        rec = Record(index, op, handle, key)
        self.records.append(rec)
        return rec

    def sorted(self) -> Trace:
        return Trace(sorted(self.records, key=lambda r: r.index))

    def keys(self, op: str = "D") -> list[int]:
        return [r.key for r in self.records if r.op == op]

    def validate(self) -> None:
        """Raise TraceError unless indices increase and every delete hits a live key."""
        live = LiveMultiset()
        prev = None
        for line, r in enumerate(self.records, 1):
            if prev is not None and r.index <= prev:
                raise TraceError("linearization indices must strictly increase", line)
            prev = r.index
            if r.op == "I":
                live.add(r.key)
            elif r.op == "D":
                if r.key not in live:
                    raise TraceError(f"delete of key {r.key} that is not live", line)
                live.remove(r.key)

    def dumps(self) -> str:
        return "".join(r.to_line() + "\n" for r in self.records)

    def dump(self, fp: IO[str]) -> None:
        fp.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> Trace:
        records = []
        for line, raw in enumerate(text.splitlines(), 1):
            raw = raw.split("#", 1)[0].strip()
            if not raw:
                continue
            parts = raw.split()
            if len(parts) != 4:
                raise TraceError(f"expected 4 fields, got {len(parts)}", line)
            try:
                idx, handle = int(parts[0]), int(parts[2])
                key = None if parts[3] == "-" else int(parts[3])
                records.append(Record(idx, parts[1], handle, key))
            except TraceError as e:
                raise TraceError(str(e), line) from None
            except ValueError:
                raise TraceError(f"bad number in {raw!r}", line) from None
        return cls(records)

    @classmethod
    def load(cls, fp: IO[str]) -> Trace:
        return cls.loads(fp.read())


class LiveMultiset:
    """Sorted multiset of live keys."""

    def __init__(self, keys: Iterable[int] = ()):
        self._keys = sorted(keys)

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: int) -> bool:
        i = bisect.bisect_left(self._keys, key)
        return i < len(self._keys) and self._keys[i] == key

    def __iter__(self) -> Iterator[int]:
        return iter(self._keys)

    def add(self, key: int) -> None:
        bisect.insort(self._keys, key)

    def remove(self, key: int) -> None:
        i = bisect.bisect_left(self._keys, key)
        if i == len(self._keys) or self._keys[i] != key:
            raise KeyError(key)
        del self._keys[i]

    def smaller_than(self, key: int) -> int:
        return bisect.bisect_left(self._keys, key)

    def min(self) -> Optional[int]:
        return self._keys[0] if self._keys else None
