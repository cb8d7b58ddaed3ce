"""Dimension tables: square-integrable harmonic forms and moduli counts.

For each boundary invariant b in 1..9 the table gives the dimensions of
the reduced-cohomology groups computing the harmonic forms (nonzero only
in middle degree, where it is 11 - b), the moduli count 3(10 - b) with
its geometric split, and the weighted behaviour of degree-0/1 classes.
"""

from alhlab.cohomology import (l2_hodge_table, moduli_dim, wh_interval)

print("b   middle-degree dimension   moduli (split)")
for b in range(1, 10):
    m = moduli_dim(b)
    row = l2_hodge_table(b)
    mid = next(e.dim for e in row if e.k == 2)
    print(f"{b}   {mid:^24d}   {int(m)} = {m.split[0]} + {m.split[1]}")

print()
print("full identification table at b = 1:")
for entry in l2_hodge_table(1):
    print(f"  k = {entry.k}: dim {entry.dim:2d}   {entry.label}")

print()
print("weighted classes (degree, weight) -> dimension:")
for degree, gamma in ((0, -0.7), (0, 0.3), (1, 0.4)):
    print(f"  degree {degree}, weight {gamma:+.1f}: "
          f"{wh_interval(degree, gamma)}")
print("  degree 1, weight +0.0:", wh_interval(1, 0.0),
      "(borderline: undetermined)")
