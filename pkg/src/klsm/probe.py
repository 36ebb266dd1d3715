"""Instrumentation hooks called by the queue at its shared-memory steps.

``point`` is called immediately *before* a step that touches state other
handles can observe (reading or swapping the shared array reference, taking
an item, publishing or reading a distributed LSM). ``mark`` reports events
that happen at a linearization point. The default probe ignores both; the
deterministic driver in :mod:`klsm.oracle.driver` suspends the calling
handle in ``point`` and timestamps ``mark`` calls.
"""

from __future__ import annotations

from typing import Any

# point kinds
READ_SHARED = "read-shared"  # insert path: read the published array
VERIFY = "verify"  # delete path: compare published array with observed
CAS = "cas"  # swap the published array
TAKE = "take"  # test-and-set an item
PUBLISH = "publish"  # owner writes its distributed LSM
SPY = "spy"  # read one slot of a victim's distributed LSM

# mark kinds
M_VERIFY = "verify"  # the published array was found equal to observed
M_INSERT = "insert"  # an insert became visible
M_PUBLISHED = "published"  # a new BlockArray was swapped in (arg: the array)
M_DELETE = "delete"  # an item was taken (arg: the item)
M_FAIL = "fail"  # try_delete_min gave up


class Probe:
    def point(self, kind: str, handle: Any) -> None:
        pass

    def mark(self, kind: str, handle: Any, arg: Any = None) -> None:
        pass


NULL_PROBE = Probe()
