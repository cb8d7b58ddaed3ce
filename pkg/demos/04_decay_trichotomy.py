"""Decay trichotomy of homogeneous solutions near x = 0.

Separating the flat directions into Fourier modes, the decaying
solutions fall into three classes as x -> 0:

  * both frequencies zero   -> powers of x (here: span{1, 1/x})
  * torus frequency only    -> exp(-m/x) decay
  * circle frequency        -> exp(-k/(2x^2)) decay

The solver uses a graded geometric grid and selects the decaying
solution through a weighted boundary condition at the singular end.
"""

import numpy as np

from alhlab.geometry import metric_a
from alhlab.modes import (BVProblem, DecaySelect, Dirichlet, RadialGrid,
                          fit_decay_rate, fit_expansion, solve_bvp)
from alhlab.indicial import indicial_poly, indicial_roots
from alhlab.operators import laplacian, project_modes, reduced_D00, \
    reduced_scalar_b

grid = RadialGrid()
print(f"grid: {grid.n} nodes, geometric from {grid.x_min} to {grid.x_max}")

print()
print("(i) zero mode: two-sided Dirichlet, closed form a + b/x")
sol = solve_bvp(BVProblem(reduced_scalar_b(), grid, None,
                          Dirichlet.scalar(2.0), Dirichlet.scalar(1.0)))
b = (2.0 - 1.0) / (1.0 / grid.x_min - 1.0 / grid.x_max)
a = 1.0 - b / grid.x_max
err = float(np.max(np.abs(sol.values[0] - (a + b / grid.nodes))))
print(f"    max error against the closed form: {err:.2e}")

La = laplacian(metric_a())

print()
print("(ii) torus mode (m = 1): fitted exponential rate in 1/x")
op = project_modes(La, 0, (1, 0), product_model=True)
sol = solve_bvp(BVProblem(op, grid, None, DecaySelect(0.0),
                          Dirichlet.scalar(1.0)))
print(f"    rate = {fit_decay_rate(sol, -1):+.4f}   (target -1)")

print()
print("(iii) circle mode (k = 1): fitted coefficient of 1/x^2 in log|u|")
op = project_modes(La, 1, (0, 0), product_model=True)
sol = solve_bvp(BVProblem(op, grid, None, DecaySelect(0.0),
                          Dirichlet.scalar(1.0)))
print(f"    rate = {fit_decay_rate(sol, -2):+.4f}   (target -1/2)")

print()
print("even-block system: leading exponent of the decaying solution")
op = reduced_D00("even")
sol = solve_bvp(BVProblem(op, grid, None, DecaySelect(0.0),
                          Dirichlet({3: grid.x_max ** 2})))
fit = fit_expansion(sol, indicial_roots(indicial_poly(op)), 0.0)
print(f"    exponents {tuple(str(e) for e in fit.exponents)}, "
      f"residual {fit.residual:.2e}, flagged = {fit.flagged}")
