"""Derivative-vanishing sets: finer invariant structure than rank alone.

F = (x1^2 + x2^2 - 1)^3 is conserved by the planar rotation.  On the unit
circle every partial derivative of F up to order 2 vanishes while some
third-order partials do not, so the circle sits in the order-2 vanishing
set but not the order-3 one.  Membership in each vanishing set is
preserved by the flow; the verifier also checks the order-3 hypothesis
failure and the downward nesting of the sets.
"""

import numpy as np

from invarsets import (
    in_vanishing_set,
    partial_tensor,
    rank_level,
    verify_vanishing_invariance,
)
from invarsets import oscillator

system = oscillator.harmonic_oscillator()
quantity = oscillator.unit_circle_power(3)
x0 = np.array([1.0, 0.0])

tensor = partial_tensor(quantity, x0, 3)
print("largest |partial| up to order 2:",
      max(abs(tensor.entry(0, a)) for a in tensor.entries if len(a) <= 2))
print("third partial in x1 alone:", tensor.entry(0, (0, 0, 0)))

for order in (1, 2, 3):
    member = in_vanishing_set(quantity, x0, order, abs_tol=1e-4)
    print(f"order-{order} vanishing membership at (1, 0): {member.verdict} "
          f"(residual {member.residual:+.2e})")

print()
report = verify_vanishing_invariance(
    system, quantity, x0, order=2, t_end=2 * np.pi, abs_tol=1e-4
)
print("order-2 membership along one full rotation:", report.verdict)
print("worst residual along the flow:", f"{report.worst_value:+.3e}")

report3 = verify_vanishing_invariance(
    system, quantity, x0, order=3, t_end=2 * np.pi, abs_tol=1e-4
)
print("order-3 attempt:", report3.verdict, "-", report3.message)

print()
print("nesting and the rank-0 equivalence at mixed probe states:")
rng = np.random.default_rng(3)
probes = [np.array([np.cos(t), np.sin(t)]) for t in np.linspace(0, 2 * np.pi, 5)]
probes += list(rng.standard_normal((5, 2)))
for x in probes:
    # order-2 entries come from nested differencing, so their membership
    # threshold has to sit above the ~1e-6 differencing noise
    v1 = in_vanishing_set(quantity, x, 1, abs_tol=1e-4).verdict
    v2 = in_vanishing_set(quantity, x, 2, abs_tol=1e-4).verdict
    r0 = rank_level(quantity, x).rank == 0
    assert (not v2) or v1          # order-2 membership implies order-1
    assert r0 == v1                # rank 0 iff first-order vanishing
    print(f"  x = {np.round(x, 3)}: order-1 {v1}, order-2 {v2}, rank-0 {r0}")
