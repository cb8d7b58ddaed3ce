"""Graded-mesh two-point boundary value solver for the reduced radial
operators, decay-rate and expansion fitting, and discrete weighted norms.

The mesh is geometric toward x=0 so that both power-law behavior (1,
1/x, x^2, ...) and the super-polynomial decay of the circle and torus
modes are resolved on the same grid.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy import sparse
from scipy.integrate import simpson
from scipy.linalg import svdvals
from scipy.sparse.linalg import spsolve

from .config import DEFAULT, Tolerances
from .indicial import NotBTypeError, indicial_poly, indicial_roots
from .operators import ModeReducedOp

__all__ = [
    "RadialGrid", "Dirichlet", "DecaySelect", "BVProblem", "SampledSolution",
    "ExpansionFit", "DiscreteNorm", "IndicialWeightError", "ConvergenceError",
    "solve_bvp", "fit_expansion", "fit_decay_rate", "discrete_a_norm",
    "weighted_sigma_min",
]


class IndicialWeightError(ValueError):
    """The requested weight sits exactly on an indicial value, so the
    boundary-value problem degenerates."""


class ConvergenceError(RuntimeError):
    """The discrete solve failed its residual or refinement check."""


class RadialGrid:
    """Geometrically graded nodes x_0 < ... < x_N in (0, x_max]."""

    def __init__(self, n: int = 2000, x_min: float = 1e-3,
                 x_max: float = 0.5):
        if not (0 < x_min < x_max):
            raise ValueError("need 0 < x_min < x_max")
        if n < 8:
            raise ValueError("grid too coarse")
        self.n = int(n)
        self.ratio = (x_min / x_max) ** (1.0 / n)
        i = np.arange(n + 1)
        self.nodes = x_max * self.ratio ** (n - i)
        # strictly increasing with a positive inner endpoint
        assert self.nodes[0] > 0 and np.all(np.diff(self.nodes) > 0)

    @property
    def x_min(self) -> float:
        return float(self.nodes[0])

    @property
    def x_max(self) -> float:
        return float(self.nodes[-1])


class Dirichlet(NamedTuple):
    """Fixed values for selected components at one end."""
    values: dict

    @staticmethod
    def scalar(value) -> "Dirichlet":
        return Dirichlet({0: float(value)})


class DecaySelect(NamedTuple):
    """Keep only local solution directions with exponent above
    ``weight + 1``; realized by projection rows on the innermost nodes.
    """
    weight: float
    fit_nodes: int = 20


class BVProblem(NamedTuple):
    operator: ModeReducedOp
    grid: RadialGrid
    rhs: Optional[object] = None      # callable x -> value(s); None = 0
    inner: object = None              # Dirichlet or DecaySelect
    outer: object = None              # Dirichlet


class SampledSolution(NamedTuple):
    grid: RadialGrid
    values: np.ndarray                # shape (size, n+1)
    operator: Optional[ModeReducedOp] = None

    def component(self, i: int) -> np.ndarray:
        return self.values[i]


class ExpansionFit(NamedTuple):
    exponents: tuple
    coefficients: np.ndarray          # shape (len(exponents), size)
    residual: float
    slope: Optional[float]
    flagged: bool


class DiscreteNorm(float):
    """Float with a divergence marker for the inner-end quadrature."""

    def __new__(cls, value, divergent=False):
        obj = super().__new__(cls, value)
        obj.divergent = bool(divergent)
        return obj


def _sample(coeff, xs, var):
    return np.array([float(coeff.evaluate({var: float(x)})) for x in xs])


def _op_order(op: ModeReducedOp) -> int:
    order = 0
    for row in op.entries:
        for cell in row:
            for o in cell:
                order = max(order, o)
    return order


def _mode_exponents(op: ModeReducedOp):
    """(root value, nullvector basis) pairs for decay selection."""
    M = indicial_poly(op)
    out = []
    for r in indicial_roots(M):
        if not isinstance(r.root, Fraction):
            raise ValueError("decay selection needs real rational "
                             "indicial roots")
        for v in r.nullvectors:
            out.append((r.root, v))
    return out


def _decay_rows(op, grid, bc: DecaySelect, n_conditions):
    """Projection rows killing the local directions at or below the
    cutoff; falls back to a zero Dirichlet condition for irregular
    (non-b-type) operators whose decaying solution is below resolution.
    """
    size = op.size
    npts = grid.n + 1
    try:
        basis = _mode_exponents(op)
    except NotBTypeError:
        rows = []
        for comp in range(size):
            rows.append(({comp * npts + 0: 1.0}, 0.0))
        if len(rows) != n_conditions:
            raise ValueError(
                f"irregular operator: inner Dirichlet supplies {len(rows)} "
                f"conditions but {n_conditions} are required")
        return rows
    cutoff = Fraction(bc.weight).limit_denominator(10**9) + 1 \
        if not isinstance(bc.weight, Fraction) else bc.weight + 1
    killed = []
    for idx, (gamma, _v) in enumerate(basis):
        if gamma == cutoff:
            raise IndicialWeightError(
                f"decay cutoff selects the indicial weight {gamma - 1} "
                f"(root {gamma}) exactly")
        if gamma < cutoff:
            killed.append(idx)
    if len(basis) != size * max(_op_order(op), 1):
        raise ValueError("local solution basis is incomplete "
                         "(logarithmic directions are unsupported)")
    if len(killed) != n_conditions:
        raise ValueError(
            f"decay selection kills {len(killed)} directions but the "
            f"problem needs {n_conditions} inner conditions")
    m = bc.fit_nodes
    xs = grid.nodes[:m]
    C = np.zeros((m * size, len(basis)))
    for j, (gamma, v) in enumerate(basis):
        prof = xs ** float(gamma)
        for comp in range(size):
            C[comp * m:(comp + 1) * m, j] = prof * float(v[comp])
    norms = np.linalg.norm(C, axis=0)
    P = np.linalg.pinv(C / norms)
    rows = []
    for j in killed:
        coeffs = {}
        for comp in range(size):
            for i in range(m):
                val = P[j, comp * m + i]
                if val != 0.0:
                    coeffs[comp * npts + i] = val
        rows.append((coeffs, 0.0))
    return rows


def _dirichlet_rows(bc: Dirichlet, grid, size, end):
    npts = grid.n + 1
    node = 0 if end == "inner" else grid.n
    rows = []
    for comp, val in sorted(bc.values.items()):
        if not (0 <= comp < size):
            raise ValueError(f"component {comp} out of range")
        rows.append(({comp * npts + node: 1.0}, float(val)))
    return rows


def _bc_rows(problem, end, n_conditions):
    bc = problem.inner if end == "inner" else problem.outer
    if bc is None:
        if n_conditions == 0:
            return []
        raise ValueError(f"missing {end} boundary condition")
    if isinstance(bc, Dirichlet):
        rows = _dirichlet_rows(bc, problem.grid, problem.operator.size, end)
        if len(rows) != n_conditions:
            raise ValueError(
                f"{end} Dirichlet supplies {len(rows)} conditions, "
                f"need {n_conditions}")
        return rows
    if isinstance(bc, DecaySelect):
        if end != "inner":
            raise ValueError("decay selection applies at the inner end")
        return _decay_rows(problem.operator, problem.grid, bc, n_conditions)
    raise TypeError(f"unsupported boundary condition {bc!r}")


def _rhs_values(problem, xs, size):
    if problem.rhs is None:
        return np.zeros((size, len(xs)))
    out = np.zeros((size, len(xs)))
    for i, x in enumerate(xs):
        val = problem.rhs(float(x))
        if size == 1 and np.isscalar(val):
            out[0, i] = val
        else:
            val = np.asarray(val, dtype=float)
            if val.shape != (size,):
                raise ValueError("rhs shape mismatch")
            out[:, i] = val
    return out


def solve_bvp(problem: BVProblem,
              config: Tolerances = DEFAULT) -> SampledSolution:
    """Solve the two-point boundary value problem on the graded grid.

    Scalar second-order operators use three-point stencils at the nodes;
    first-order systems use the midpoint box scheme.  The assembled
    sparse system is solved directly and its relative residual checked.
    """
    op = problem.operator
    grid = problem.grid
    xs = grid.nodes
    n = grid.n
    npts = n + 1
    size = op.size
    order = _op_order(op)

    rows_i = []
    rows_j = []
    vals = []
    rhs_vec = []

    def add_row(coeffs: dict, value: float):
        r = len(rhs_vec)
        for j, c in coeffs.items():
            rows_i.append(r)
            rows_j.append(j)
            vals.append(c)
        rhs_vec.append(value)

    if size == 1 and order == 2:
        c2 = _sample(op.coefficient(0, 0, 2), xs, op.var)
        c1 = _sample(op.coefficient(0, 0, 1), xs, op.var)
        c0 = _sample(op.coefficient(0, 0, 0), xs, op.var)
        f = _rhs_values(problem, xs, 1)[0]
        n_outer = len(problem.outer.values) \
            if isinstance(problem.outer, Dirichlet) else 1
        for row in _bc_rows(problem, "inner", 2 - n_outer):
            add_row(*row)
        hm = np.diff(xs)
        for i in range(1, n):
            hl, hr = hm[i - 1], hm[i]
            d1 = (-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr),
                  hl / (hr * (hl + hr)))
            d2 = (2 / (hl * (hl + hr)), -2 / (hl * hr),
                  2 / (hr * (hl + hr)))
            coeffs = {}
            for off, (w1, w2) in zip((-1, 0, 1),
                                     zip(d1, d2)):
                coeffs[i + off] = c2[i] * w2 + c1[i] * w1
            coeffs[i] = coeffs.get(i, 0.0) + c0[i]
            add_row(coeffs, f[i])
        for row in _bc_rows(problem, "outer", n_outer):
            add_row(*row)
    elif order == 1:
        mids = 0.5 * (xs[:-1] + xs[1:])
        h = np.diff(xs)
        sampled = {}
        for i in range(size):
            for j in range(size):
                for o in (0, 1):
                    c = op.coefficient(i, j, o)
                    if not c.is_zero():
                        sampled[(i, j, o)] = _sample(c, mids, op.var)
        fmid = _rhs_values(problem, mids, size)
        n_outer = len(problem.outer.values) \
            if isinstance(problem.outer, Dirichlet) else 0
        for row in _bc_rows(problem, "inner", size - n_outer):
            add_row(*row)
        zero = np.zeros_like(mids)
        for cell in range(n):
            for i in range(size):
                coeffs = {}
                for j in range(size):
                    a = sampled.get((i, j, 1), zero)[cell]
                    b = sampled.get((i, j, 0), zero)[cell]
                    if a == 0.0 and b == 0.0:
                        continue
                    coeffs[j * npts + cell] = -a / h[cell] + 0.5 * b
                    coeffs[j * npts + cell + 1] = a / h[cell] + 0.5 * b
                add_row(coeffs, fmid[i, cell])
        for row in _bc_rows(problem, "outer", n_outer):
            add_row(*row)
    else:
        raise ValueError(
            f"unsupported problem shape: size {size}, order {order}")

    n_unknowns = size * npts
    if len(rhs_vec) != n_unknowns:
        raise ValueError(
            f"assembled {len(rhs_vec)} equations for {n_unknowns} unknowns")
    A = sparse.csr_matrix((vals, (rows_i, rows_j)),
                          shape=(n_unknowns, n_unknowns))
    b = np.array(rhs_vec)
    u = spsolve(A, b)
    if not np.all(np.isfinite(u)):
        raise IndicialWeightError(
            "singular discrete system (weight at an indicial value)")
    scale = np.abs(A) @ np.abs(u) + np.abs(b)
    resid = np.abs(A @ u - b)
    rel = float(np.max(resid / np.maximum(scale, 1e-300)))
    if rel > config.discrete_residual:
        raise ConvergenceError(
            f"discrete residual {rel:.3e} exceeds "
            f"{config.discrete_residual:.1e}")
    return SampledSolution(grid, u.reshape(size, npts), op)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _tail_window(grid: RadialGrid, config: Tolerances):
    """Indices of the innermost decade, minus the boundary-condition
    nodes."""
    xs = grid.nodes
    idx = np.where(xs <= 10.0 * xs[0])[0]
    idx = idx[idx >= config.fit_nodes]
    if len(idx) < 8:
        raise ValueError("fitting window too small on this grid")
    return idx


def fit_expansion(u: SampledSolution, roots, cutoff,
                  config: Tolerances = DEFAULT) -> ExpansionFit:
    """Least-squares power-law expansion of a sampled solution on the
    inner tail, over candidate exponents above ``cutoff + 1``."""
    gammas = []
    for r in roots:
        g = r.root if hasattr(r, "root") else r
        if float(g) > float(cutoff) + 1.0:
            gammas.append(g)
    if not gammas:
        raise ValueError("no candidate exponents above the cutoff")
    gammas = sorted(gammas, key=float)
    idx = _tail_window(u.grid, config)
    xs = u.grid.nodes[idx]
    size = u.values.shape[0]
    V = np.column_stack([xs ** float(g) for g in gammas])
    norms = np.linalg.norm(V, axis=0)
    Vn = V / norms
    coeffs = np.zeros((len(gammas), size))
    resid_num = 0.0
    resid_den = 0.0
    for comp in range(size):
        y = u.values[comp, idx]
        a, *_ = np.linalg.lstsq(Vn, y, rcond=None)
        coeffs[:, comp] = a / norms
        r = y - Vn @ a
        resid_num += float(r @ r)
        resid_den += float(y @ y)
    residual = math.sqrt(resid_num / resid_den) if resid_den > 0 else 0.0
    mags = np.max(np.abs(u.values[:, idx]), axis=0)
    slope = None
    flagged = False
    if np.all(mags > 0):
        slope = float(np.polyfit(np.log(xs), np.log(mags), 1)[0])
        flagged = min(abs(slope - float(g)) for g in gammas) \
            > config.slope_flag
    return ExpansionFit(tuple(gammas), coeffs, residual, slope, flagged)


def fit_decay_rate(u: SampledSolution, power: int, component: int = 0,
                   config: Tolerances = DEFAULT) -> float:
    """Fit log|u| ~ a*x^power + b*log x + c on the amplitude window and
    return a — the leading decay coefficient (power -1 or -2)."""
    if power not in (-1, -2):
        raise ValueError("power must be -1 or -2")
    y = np.abs(u.values[component])
    xs = u.grid.nodes
    top = float(np.max(y))
    if top == 0.0:
        raise ValueError("cannot fit the decay rate of the zero solution")
    mask = (y > config.amplitude_lo * top) & (y < config.amplitude_hi * top)
    if np.count_nonzero(mask) < 10:
        raise ValueError("amplitude window contains too few nodes")
    xw, yw = xs[mask], y[mask]
    design = np.column_stack([xw ** power, np.log(xw), np.ones_like(xw)])
    sol, *_ = np.linalg.lstsq(design, np.log(yw), rcond=None)
    return float(sol[0])


# ---------------------------------------------------------------------------
# discrete weighted norms
# ---------------------------------------------------------------------------

def _radial_derivative(vals: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Second-order first derivative on the nonuniform grid."""
    du = np.empty_like(vals)
    h = np.diff(xs)
    hl, hr = h[:-1], h[1:]
    du[1:-1] = (-hr / (hl * (hl + hr)) * vals[:-2]
                + (hr - hl) / (hl * hr) * vals[1:-1]
                + hl / (hr * (hl + hr)) * vals[2:])
    du[0] = (vals[1] - vals[0]) / h[0]
    du[-1] = (vals[-1] - vals[-2]) / h[-1]
    return du


def discrete_a_norm(u: SampledSolution, weight: float, order: int = 0,
                    metric: str = "gh",
                    config: Tolerances = DEFAULT) -> DiscreteNorm:
    """Weighted Sobolev norm through the structure-field derivatives.

    Derivative words are built from the radial field x^3 d/dx and the
    fiber multipliers (mode frequency times x for the torus directions,
    the bare circle frequency); the square sums over all words of length
    at most ``order`` are integrated against x^(-2 weight) times the
    radial volume density (x^-3 or x^-5).
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1, or 2")
    if metric not in ("gh", "a"):
        raise ValueError("metric must be 'gh' or 'a'")
    xs = u.grid.nodes
    k, (m1, m2) = u.operator.mode if u.operator is not None else (0, (0, 0))
    x3 = xs ** 3

    def actions(w):
        return [x3 * _radial_derivative(w, xs),
                m1 * xs * w, m2 * xs * w, float(k) * w]

    total = np.zeros_like(xs)
    level = [u.values[comp].astype(float) for comp in
             range(u.values.shape[0])]
    for w in level:
        total += w * w
    for _ in range(order):
        nxt = []
        for w in level:
            nxt.extend(actions(w))
        for w in nxt:
            total += w * w
        level = nxt
    density = -3 if metric == "gh" else -5
    integrand = total * xs ** (-2.0 * float(weight) + density)
    value = float(simpson(integrand, x=xs))
    value = math.sqrt(max(value, 0.0))
    divergent = False
    head = integrand[:40]
    if np.all(head > 0):
        slope = float(np.polyfit(np.log(xs[:40]), np.log(head), 1)[0])
        divergent = slope < -0.99
    return DiscreteNorm(value, divergent)


# ---------------------------------------------------------------------------
# closed-range shadow
# ---------------------------------------------------------------------------

def weighted_sigma_min(op: ModeReducedOp, weight: float,
                       grid: RadialGrid, fit_nodes: int = 20) -> float:
    """Smallest singular value of the weighted, mass-normalized discrete
    operator with decay selection at the inner end and a Dirichlet row
    at the outer end.

    Local directions strictly below the weight are projected out; a
    direction sitting exactly at the weight (the indicial case) cannot
    be, and shows up as a slowly degenerating near-kernel.  Off the
    weight set the value stays bounded away from zero as the grid
    extends toward x=0.
    """
    if op.size != 1 or _op_order(op) != 2:
        raise ValueError("implemented for scalar second-order operators")
    xs = grid.nodes
    n = grid.n
    mu = float(weight)
    c2 = _sample(op.coefficient(0, 0, 2), xs, op.var)
    c1 = _sample(op.coefficient(0, 0, 1), xs, op.var)
    c0 = _sample(op.coefficient(0, 0, 0), xs, op.var)
    gammas = [float(g) for g, _ in _mode_exponents(op)]
    killed = [g for g in gammas if g < mu + 1.0 - 1e-12
              and abs(g - (mu + 1.0)) > 1e-12]
    # trapezoid masses against the x^-3 radial density
    dx = np.empty_like(xs)
    dx[1:-1] = 0.5 * (xs[2:] - xs[:-2])
    dx[0] = 0.5 * (xs[1] - xs[0])
    dx[-1] = 0.5 * (xs[-1] - xs[-2])
    mass = xs ** -3 * dx
    h = np.diff(xs)
    n_rows = len(killed) + (n - 1) + 1
    B = np.zeros((n_rows, n + 1))
    # inner projection rows on the conjugated variable v = x^-mu u,
    # whose local exponents are gamma - mu; expressed in the
    # mass-normalized coordinates and rescaled to unit row norm
    if killed:
        w = xs[:fit_nodes]
        C = np.column_stack([w ** (g - mu) for g in gammas])
        C = C / np.linalg.norm(C, axis=0)
        P = np.linalg.pinv(C)
        for r, g in enumerate(killed):
            j = gammas.index(g)
            row = P[j] / np.sqrt(mass[:fit_nodes])
            B[r, :fit_nodes] = row / np.linalg.norm(row)
    base = len(killed)
    for i in range(1, n):
        hl, hr = h[i - 1], h[i]
        d1 = (-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr),
              hl / (hr * (hl + hr)))
        d2 = (2 / (hl * (hl + hr)), -2 / (hl * hr), 2 / (hr * (hl + hr)))
        for off, w1, w2 in zip((-1, 0, 1), d1, d2):
            j = i + off
            a = c2[i] * w2 + c1[i] * w1 + (c0[i] if off == 0 else 0.0)
            B[base + i - 1, j] += a * (xs[j] / xs[i]) ** mu \
                * math.sqrt(mass[i] / mass[j])
    B[-1, n] = 1.0
    return float(svdvals(B)[-1])
