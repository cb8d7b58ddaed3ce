"""Indicial roots, nullvectors, and Fredholm weight windows.

The radial operators are Fuchsian at x = 0: substituting x^gamma gives a
matrix polynomial in gamma whose roots are the possible leading
exponents.  The weight window between consecutive indicial weights is
where the operator is Fredholm on weighted spaces.
"""

from alhlab.indicial import (indicial_poly, indicial_roots,
                             is_fredholm_weight, weight_window)
from alhlab.operators import reduced_D00, reduced_scalar_b

print("scalar zero-mode operator x^2 d^2 + 2x d:")
roots = indicial_roots(indicial_poly(reduced_scalar_b()))
for r in roots:
    print(f"  root {r.root} (multiplicity {r.multiplicity})")
w = weight_window(roots)
print("  indicial weights:", w.weights)
for c in (-2, -1.5, -1, 0):
    print(f"  weight {c}: Fredholm = {is_fredholm_weight(w, c)}")

print()
print("first-order 8x8 system, split by circle parity:")
for parity in ("even", "odd"):
    M = indicial_poly(reduced_D00(parity))
    roots = indicial_roots(M)
    labels = ", ".join(f"{r.root} (x{r.multiplicity})" for r in roots)
    print(f"  {parity:5s}: roots {labels}")

print()
print("nullvector relations on the coupled pair (components 3, 4):")
even = indicial_roots(indicial_poly(reduced_D00("even")))
r0, r2 = even
v = next(v for v in r0.nullvectors if v[3] != 0)
print(f"  root 0: v[3] = {v[3]}, v[4] = {v[4]}  (opposite)")
v = r2.nullvectors[0]
print(f"  root 2: v[3] = {v[3]}, v[4] = {v[4]}  (equal)")
