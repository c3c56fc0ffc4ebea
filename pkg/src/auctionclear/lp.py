"""Dense two-phase primal simplex over the numeric kernel.

The solver works on any :class:`LinearProgram` (rows with ``<=``, ``=`` or
``>=`` relations plus per-variable bounds) and returns the primal point, one
dual multiplier per row and the reduced cost of every variable.

Sign conventions
----------------
Duals are sensitivities: ``duals[r]`` is the rate of change of the optimal
objective with respect to the right-hand side of row ``r``.  For a
maximisation this makes ``<=`` multipliers non-negative and ``>=``
multipliers non-positive (reversed for minimisation).  Reduced costs are
``c - A^T y``; at an optimum of a maximisation a positive reduced cost only
appears on a variable sitting at its upper bound and a negative one only at
its lower bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .numeric import EXACT, Arithmetic, Scalar

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "=", ">="
MAX, MIN = "max", "min"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

BLAND = "bland"
DANTZIG = "dantzig"

_MAX_PIVOTS = 200_000


@dataclass(frozen=True)
class Row:
    """Sparse linear constraint ``sum(coeffs[j] * x[j]) rel rhs``."""

    coeffs: Mapping[int, Scalar]
    rel: str
    rhs: Scalar
    name: str = ""

    def __post_init__(self):
        if self.rel not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {self.rel!r}")

    def activity(self, x: Sequence[Scalar]) -> Scalar:
        return sum((v * x[j] for j, v in self.coeffs.items()), 0 * self.rhs)

    def violation(self, x: Sequence[Scalar]) -> Scalar:
        lhs = self.activity(x)
        if self.rel == LE:
            return max(lhs - self.rhs, 0 * self.rhs)
        if self.rel == GE:
            return max(self.rhs - lhs, 0 * self.rhs)
        return abs(lhs - self.rhs)


@dataclass(frozen=True)
class LinearProgram:
    """``sense c^T x`` subject to ``rows`` and ``bounds``.

    ``bounds[j]`` is a ``(lower, upper)`` pair where ``None`` means infinite.
    Variables without explicit bounds are free.
    """

    c: tuple
    rows: tuple = ()
    bounds: tuple = None  # type: ignore[assignment]
    sense: str = MAX
    names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(self.c))
        object.__setattr__(self, "rows", tuple(self.rows))
        n = len(self.c)
        if self.bounds is None:
            object.__setattr__(self, "bounds", ((None, None),) * n)
        else:
            object.__setattr__(self, "bounds", tuple(tuple(b) for b in self.bounds))
        if len(self.bounds) != n:
            raise ValueError("bounds length differs from objective length")
        if self.sense not in (MAX, MIN):
            raise ValueError(f"unknown sense {self.sense!r}")
        for r in self.rows:
            for j in r.coeffs:
                if not 0 <= j < n:
                    raise ValueError(f"row {r.name!r} references variable {j}")

    @property
    def n(self) -> int:
        return len(self.c)

    def objective_value(self, x: Sequence[Scalar]) -> Scalar:
        return sum((cj * xj for cj, xj in zip(self.c, x)), 0 * x[0] if x else 0)

    def with_rows(self, extra: Sequence[Row]) -> "LinearProgram":
        return LinearProgram(self.c, self.rows + tuple(extra), self.bounds, self.sense, self.names)

    def with_bounds(self, changes: Mapping[int, tuple]) -> "LinearProgram":
        b = list(self.bounds)
        for j, lohi in changes.items():
            b[j] = tuple(lohi)
        return LinearProgram(self.c, self.rows, tuple(b), self.sense, self.names)

    def with_objective(self, c: Sequence[Scalar], sense: str) -> "LinearProgram":
        return LinearProgram(tuple(c), self.rows, self.bounds, sense, self.names)


@dataclass
class LpSolution:
    status: str
    x: tuple | None = None
    objective: Scalar | None = None
    duals: tuple | None = None
    reduced_costs: tuple | None = None
    ray: tuple | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class _StdRow:
    coeffs: dict
    rel: str
    rhs: Scalar
    origin: int  # index of the original row, or -1 for an upper-bound row


@dataclass
class _Tableau:
    rows: list
    b: list
    basis: list
    ncols: int
    nart: int
    first_art: int
    arith: Arithmetic
    pivots: int = 0
    prune: bool = field(init=False)

    def __post_init__(self):
        self.prune = not self.arith.exact

    def pivot(self, r: int, k: int, d_rows: Sequence[list]):
        rows, b = self.rows, self.b
        prow = rows[r]
        p = prow[k]
        if p != 1:
            inv = 1 / p
            for idx in range(self.ncols):
                v = prow[idx]
                if v:
                    prow[idx] = v * inv
            b[r] = b[r] * inv
        prow[k] = p / p
        nz = [(idx, v) for idx, v in enumerate(prow) if v]
        br = b[r]
        tiny = 1e-13
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[k]
            if not f:
                continue
            for idx, v in nz:
                row[idx] -= f * v
            if self.prune:
                for idx, _ in nz:
                    if abs(row[idx]) < tiny:
                        row[idx] = 0.0
            row[k] = 0 * f
            b[i] -= f * br
            if self.prune and abs(b[i]) < tiny:
                b[i] = 0.0
        for d in d_rows:
            f = d[k]
            if f:
                for idx, v in nz:
                    d[idx] -= f * v
                d[k] = 0 * f
                d[-1] -= f * br
        self.basis[r] = k
        self.pivots += 1
        if self.pivots > _MAX_PIVOTS:
            raise RuntimeError("simplex pivot limit exceeded")

    def dump(self, d, label):
        if not log.isEnabledFor(logging.DEBUG):
            return
        lines = [f"tableau ({label}, pivot {self.pivots})"]
        lines.append("  d: " + " ".join(str(v) for v in d))
        for row, rhs, bv in zip(self.rows, self.b, self.basis):
            lines.append(f"  x{bv}: " + " ".join(str(v) for v in row) + f" | {rhs}")
        log.debug("\n".join(lines))


def _reduced_cost_row(tab: _Tableau, cost: Sequence[Scalar]) -> list:
    zero = tab.arith.zero
    d = list(cost) + [zero]  # last entry holds -objective
    for i, bv in enumerate(tab.basis):
        cb = cost[bv]
        if cb:
            row = tab.rows[i]
            for idx, v in enumerate(row):
                if v:
                    d[idx] -= cb * v
            d[-1] -= cb * tab.b[i]
    return d


def _simplex(tab: _Tableau, d: list, allowed: int, rule: str, extra: Sequence[list] = ()):
    """Run primal simplex on ``d`` over columns ``[0, allowed)``.

    Returns ``None`` at optimality or the entering column index of an
    unbounded ray.
    """
    a = tab.arith
    eps = a.tol.feasibility_eps
    peps = a.pivot_eps
    degenerate_run = 0
    while True:
        tab.dump(d, "phase")
        k = -1
        use_bland = rule == BLAND or degenerate_run > 50
        if use_bland:
            for j in range(allowed):
                if d[j] < -eps:
                    k = j
                    break
        else:
            best = -eps
            for j in range(allowed):
                if d[j] < best:
                    best, k = d[j], j
        if k < 0:
            return None
        r = -1
        best_ratio = None
        for i, row in enumerate(tab.rows):
            v = row[k]
            if v > peps:
                ratio = tab.b[i] / v
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and tab.basis[i] < tab.basis[r])):
                    best_ratio, r = ratio, i
        if r < 0:
            return k
        degenerate_run = degenerate_run + 1 if best_ratio == 0 else 0
        tab.pivot(r, k, (d,) + tuple(extra))


def solve_lp(lp: LinearProgram, arith: Arithmetic = EXACT, pivot_rule: str = BLAND) -> LpSolution:
    """Solve ``lp`` with the two-phase simplex method.

    Bland's rule is the default and guarantees termination; ``"dantzig"``
    picks the most negative reduced cost and falls back to Bland after a long
    run of degenerate pivots.
    """
    zero, one = arith.zero, arith.one
    n = lp.n
    eps = arith.tol.feasibility_eps

    # -- variable substitution: x_j = shift_j + sum(sign * column) --
    cols: list[tuple[int, int]] = []
    shift = [zero] * n
    colmap: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    std_rows: list[_StdRow] = []
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and hi is not None and hi < lo - eps:
            return LpSolution(INFEASIBLE)
        if lo is not None:
            shift[j] = lo
            colmap[j].append((len(cols), 1))
            cols.append((j, 1))
            if hi is not None:
                std_rows.append(_StdRow({len(cols) - 1: one}, LE, max(hi - lo, zero), -1))
        elif hi is not None:
            shift[j] = hi
            colmap[j].append((len(cols), -1))
            cols.append((j, -1))
        else:
            colmap[j].append((len(cols), 1))
            cols.append((j, 1))
            colmap[j].append((len(cols), -1))
            cols.append((j, -1))

    for r, row in enumerate(lp.rows):
        coeffs = {}
        rhs = row.rhs
        for j, v in row.coeffs.items():
            if not v:
                continue
            rhs -= v * shift[j]
            for col, sign in colmap[j]:
                coeffs[col] = v if sign > 0 else -v
        if not coeffs:
            ok = (rhs >= -eps if row.rel == LE else rhs <= eps if row.rel == GE else abs(rhs) <= eps)
            if not ok:
                return LpSolution(INFEASIBLE)
            continue
        std_rows.append(_StdRow(coeffs, row.rel, rhs, r))

    m = len(std_rows)
    nstruct = len(cols)
    # slack columns follow the structural ones; artificials come last
    slack_of = {}
    ncol = nstruct
    for i, sr in enumerate(std_rows):
        if sr.rel != EQ:
            slack_of[i] = ncol
            ncol += 1
    flips = []
    for i, sr in enumerate(std_rows):
        flips.append(-1 if sr.rhs < 0 else 1)
    need_art = []
    for i, sr in enumerate(std_rows):
        slack_sign = 1 if sr.rel == LE else -1 if sr.rel == GE else 0
        if slack_sign * flips[i] != 1:
            need_art.append(i)
    first_art = ncol
    art_of = {i: first_art + t for t, i in enumerate(need_art)}
    ncols = first_art + len(need_art)

    rows_t = []
    b = []
    basis = []
    id_col = []
    for i, sr in enumerate(std_rows):
        row = [zero] * ncols
        f = flips[i]
        for col, v in sr.coeffs.items():
            row[col] = v if f > 0 else -v
        if i in slack_of:
            s = one if sr.rel == LE else -one
            row[slack_of[i]] = s if f > 0 else -s
        if i in art_of:
            row[art_of[i]] = one
            basis.append(art_of[i])
            id_col.append(art_of[i])
        else:
            basis.append(slack_of[i])
            id_col.append(slack_of[i])
        rows_t.append(row)
        b.append(sr.rhs if f > 0 else -sr.rhs)

    tab = _Tableau(rows_t, b, basis, ncols, len(need_art), first_art, arith)

    cost = [zero] * ncols
    sgn = 1 if lp.sense == MIN else -1
    for col, (j, s) in enumerate(cols):
        cj = lp.c[j]
        cost[col] = cj if sgn * s > 0 else -cj
        if not cj:
            cost[col] = zero

    d2 = _reduced_cost_row(tab, cost)
    if need_art:
        cost1 = [zero] * ncols
        for col in art_of.values():
            cost1[col] = one
        d1 = _reduced_cost_row(tab, cost1)
        _simplex(tab, d1, ncols, pivot_rule, extra=(d2,))
        infeas = -d1[-1]
        if infeas > eps * max(1, m):
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        peps = arith.pivot_eps if arith.exact else 1e-9
        for i in range(m):
            if tab.basis[i] >= first_art:
                row = tab.rows[i]
                for k in range(first_art):
                    if abs(row[k]) > peps:
                        tab.pivot(i, k, (d1, d2))
                        break

    k = _simplex(tab, d2, first_art, pivot_rule)
    std_x = [zero] * ncols
    for i, bv in enumerate(tab.basis):
        std_x[bv] = tab.b[i]

    def to_orig(vals):
        out = []
        for j in range(n):
            out.append(sum((vals[col] if s > 0 else -vals[col] for col, s in colmap[j]), zero))
        return out

    if k is not None:
        direction = [zero] * ncols
        direction[k] = one
        for i, bv in enumerate(tab.basis):
            direction[bv] = -tab.rows[i][k]
        ray = tuple(to_orig(direction))
        return LpSolution(UNBOUNDED, ray=ray, pivots=tab.pivots)

    xo = to_orig(std_x)
    x = tuple(shift[j] + xo[j] for j in range(n))
    if not arith.exact:
        # clip bound drift
        xl = list(x)
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is not None and xl[j] < lo:
                xl[j] = lo
            if hi is not None and xl[j] > hi:
                xl[j] = hi
        x = tuple(xl)

    duals = [zero] * len(lp.rows)
    for i, sr in enumerate(std_rows):
        if sr.origin < 0:
            continue
        y_std = -d2[id_col[i]]
        y = y_std if flips[i] > 0 else -y_std
        duals[sr.origin] = y if lp.sense == MIN else -y
    duals = tuple(duals)
    rc = list(lp.c)
    for r, row in enumerate(lp.rows):
        y = duals[r]
        if y:
            for j, v in row.coeffs.items():
                rc[j] = rc[j] - y * v
    return LpSolution(OPTIMAL, x=x, objective=lp.objective_value(x) if n else zero,
                      duals=duals, reduced_costs=tuple(rc), pivots=tab.pivots)


@dataclass(frozen=True)
class KktResiduals:
    primal: Scalar
    dual_sign: Scalar
    complementarity: Scalar
    stationarity: Scalar
    duality_gap: Scalar

    @property
    def worst(self) -> Scalar:
        return max(self.primal, self.dual_sign, self.complementarity,
                   self.stationarity, self.duality_gap)

    def ok(self, eps: Scalar) -> bool:
        return self.worst <= eps


def dual_certificate(lp: LinearProgram, sol: LpSolution, arith: Arithmetic = EXACT,
                     duals: Sequence[Scalar] | None = None) -> KktResiduals:
    """KKT residuals of ``sol`` (optionally with substituted ``duals``).

    Bound multipliers are not carried separately: a reduced cost counts as
    stationary when its sign is matched by an active bound.
    """
    if not sol.optimal:
        raise ValueError("dual certificate requires an optimal solution")
    zero = arith.zero
    eps = arith.tol.feasibility_eps
    x = sol.x
    y = tuple(sol.duals if duals is None else duals)
    maximize = lp.sense == MAX

    primal = zero
    for row in lp.rows:
        primal = max(primal, row.violation(x))
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            primal = max(primal, lo - x[j])
        if hi is not None:
            primal = max(primal, x[j] - hi)

    sign = zero
    comp = zero
    for yr, row in zip(y, lp.rows):
        if row.rel == EQ:
            continue
        nonneg = (row.rel == LE) == maximize
        sign = max(sign, -yr if nonneg else yr)
        comp = max(comp, abs(yr * (row.activity(x) - row.rhs)))

    rc = list(lp.c)
    for yr, row in zip(y, lp.rows):
        if yr:
            for j, v in row.coeffs.items():
                rc[j] -= yr * v
    stat = zero
    for j, (lo, hi) in enumerate(lp.bounds):
        dj = rc[j] if maximize else -rc[j]
        at_lo = lo is not None and abs(x[j] - lo) <= eps
        at_hi = hi is not None and abs(x[j] - hi) <= eps
        if dj > 0 and not at_hi:
            stat = max(stat, dj)
        elif dj < 0 and not at_lo:
            stat = max(stat, -dj)

    dual_obj = sum((yr * row.rhs for yr, row in zip(y, lp.rows)), zero)
    dual_obj += sum((rc[j] * x[j] for j in range(lp.n)), zero)
    gap = abs(lp.objective_value(x) - dual_obj) if lp.n else zero
    return KktResiduals(primal, sign, comp, stat, gap)
