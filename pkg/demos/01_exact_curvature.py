"""Exact curvature of the model metrics.

Every metric in the library is a matrix of exact rational functions, so
curvature is computed symbolically: Ricci-flatness comes out as the
identically-zero matrix, not as a small number.
"""

from fractions import Fraction

from alhlab.geometry import (curvature, metric_a, metric_calabi, metric_gh,
                             ricci, volume_density)

gh = metric_gh()
print("half-space model metric, radial coordinate x -> 0 at infinity")
print("  g_00 =", gh.entry(0, 0))
print("  g_22 =", gh.entry(2, 2), "   g_23 =", gh.entry(2, 3))

ric = ricci(gh)
flat = all(ric[i][j].is_zero() for i in range(4) for j in range(4))
print("  Ricci tensor identically zero:", flat)
print("  volume density:", volume_density(gh))

print()
print("rescaled (analyst's) metric a = gh / x")
ga = metric_a()
cur = curvature(ga)
print("  scalar curvature:", cur["scalar"])
pt = {"x": Fraction(1, 2), "y1": Fraction(0), "y2": Fraction(0),
      "theta": Fraction(0)}
print("  Ricci diagonal at x = 1/2:",
      [str(cur["ricci"][i][i].evaluate(pt)) for i in range(4)])

print()
print("higher Calabi model (n = 3): not Ricci-flat in this chart")
cur3 = curvature(metric_calabi(3))
nonzero = sum(0 if cur3["ricci"][i][j].is_zero() else 1
              for i in range(4) for j in range(4))
print("  nonzero Ricci entries:", nonzero)
