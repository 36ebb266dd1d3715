"""A first look at the relaxed queue: handles, local ordering, and k."""

import random

from klsm import KLSM

# One queue, three handles. Each handle would normally belong to one thread.
q = KLSM(k=4, max_handles=3, seed=1)
a, b, c = (q.register_handle() for _ in range(3))
print("rho =", q.rho)  # k times the number of handles

for key in (50, 10, 40):
    a.insert(key)
for key in (30, 20):
    b.insert(key)

# a only ever sees its own 10 first: a handle never skips its own items
print("a pops", a.try_delete_min())

# c owns nothing, so it spies on another handle or reads the shared part
print("c pops", c.try_delete_min())
print("left  ", q.approx_size())

# With k=0 and one handle the queue is an exact priority queue.
exact = KLSM(k=0, max_handles=1)
h = exact.register_handle()
keys = random.Random(0).sample(range(100), 10)
for key in keys:
    h.insert(key)
print([h.try_delete_min()[0] for _ in keys] == sorted(keys))

# Larger k lets deletes pick among more small keys. Pop from a handle
# that inserted nothing and look at how far from the minimum it lands.
for k in (0, 8, 64):
    q = KLSM(k=k, max_handles=2, seed=3)
    writer, reader = q.register_handle(), q.register_handle()
    for key in range(1000):
        writer.insert(key)
    got = [reader.try_delete_min()[0] for _ in range(8)]
    print(f"k={k:3d}: reader got {got}")
