"""Run handles deterministically, record linearized traces, check them."""

from klsm.oracle import Trace, check_structural, check_temporal
from klsm.oracle.driver import Driver, explore

# Two handles: one inserts 1 and 2, the other deletes twice.
program = [[("I", 1), ("I", 2)], [("D",), ("D",)]]

# One schedule, spelled out: the driver resumes the listed handle for a
# single step each time.
d = Driver(program, k=1)
d.run([1, 0, 1, 0, 0, 1]).run_round_robin()
print(d.trace().dumps())

# All schedules. Each trace is checked with rho = k * handles = 2.
r = explore(program, k=1)
print(f"{r.schedules} schedules, {len(r.violations)} violations, depth {r.max_depth}")

# Structural and temporal relaxation differ. Insert A > B > C > D in that
# order, delete C, then A: B was skipped while two newer items arrived.
stack = Trace.loads("""
1 I 0 4
2 I 0 3
3 I 0 2
4 I 0 1
5 D 0 2
6 D 0 4
""")
print("structural rho=2:", check_structural(stack, 2).ok)
v = check_temporal(stack, 2)
print("temporal   rho=2:", v.ok, "-", v.detail)
