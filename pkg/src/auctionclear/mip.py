"""Exact branch-and-bound on top of :mod:`auctionclear.lp`.

Node selection is best-bound with ties broken by depth (deeper first) and
then by creation order; the branching variable is the most fractional one
with ties going to the lowest index.  No cuts, no presolve: problem-level
cuts are ordinary rows supplied by the caller.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import BudgetExceeded
from .lp import INFEASIBLE, MAX, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp
from .numeric import EXACT, Arithmetic, Scalar


@dataclass(frozen=True)
class MixedIntegerProgram:
    lp: LinearProgram
    integers: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "integers", frozenset(self.integers))
        for j in self.integers:
            if not 0 <= j < self.lp.n:
                raise ValueError(f"integer index {j} out of range")


@dataclass
class MipSolution:
    status: str
    x: tuple | None = None
    objective: Scalar | None = None
    nodes: int = 0
    incumbents: list = field(default_factory=list)  # (node number, objective)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _better(a: Scalar, b: Scalar, maximize: bool, eps: Scalar) -> bool:
    return a > b + eps if maximize else a < b - eps


def _snap(x: Sequence[Scalar], integers, arith: Arithmetic) -> tuple:
    if arith.exact:
        return tuple(x)
    return tuple(arith.round_integral(v) if j in integers else v for j, v in enumerate(x))


def solve_mip(mip: MixedIntegerProgram, arith: Arithmetic = EXACT,
              node_limit: int | None = None) -> MipSolution:
    """Global optimum of ``mip`` by best-bound branch-and-bound."""
    lp = mip.lp
    maximize = lp.sense == MAX
    eps = arith.tol.feasibility_eps
    ints = sorted(mip.integers)
    counter = itertools.count()
    nodes = 0

    # integer variables may start with fractional bounds
    base = {}
    for j in ints:
        lo, hi = lp.bounds[j]
        nlo = None if lo is None else arith.ceil(lo - arith.tol.integrality_eps)
        nhi = None if hi is None else arith.floor(hi + arith.tol.integrality_eps)
        if (nlo, nhi) != (lo, hi):
            base[j] = (nlo, nhi)
    root_lp = lp.with_bounds(base) if base else lp

    def key(bound, depth):
        return (-bound if maximize else bound, -depth, next(counter))

    root = solve_lp(root_lp, arith)
    nodes += 1
    if root.status == INFEASIBLE:
        return MipSolution(INFEASIBLE, nodes=nodes)
    if root.status == UNBOUNDED:
        return MipSolution(UNBOUNDED, nodes=nodes)

    incumbent = None
    inc_obj = None
    log = []
    heap = [(key(root.objective, 0), 0, root_lp.bounds, root)]
    while heap:
        _, depth, bounds, sol = heapq.heappop(heap)
        if inc_obj is not None and not _better(sol.objective, inc_obj, maximize, eps):
            continue
        branch_j = None
        worst = None
        for j in ints:
            v = sol.x[j]
            if arith.is_integral(v):
                continue
            frac = arith.fractionality(v)
            if worst is None or frac > worst:
                worst, branch_j = frac, j
        if branch_j is None:
            incumbent = _snap(sol.x, mip.integers, arith)
            inc_obj = lp.objective_value(incumbent)
            log.append((nodes, inc_obj))
            continue
        if node_limit is not None and nodes >= node_limit:
            raise RuntimeError("branch-and-bound node limit reached")
        v = sol.x[branch_j]
        lo, hi = bounds[branch_j]
        for child in ((lo, arith.floor(v)), (arith.ceil(v), hi)):
            b = list(bounds)
            b[branch_j] = child
            clp = LinearProgram(lp.c, lp.rows, tuple(b), lp.sense, lp.names)
            csol = solve_lp(clp, arith)
            nodes += 1
            if csol.status != OPTIMAL:
                continue
            if inc_obj is not None and not _better(csol.objective, inc_obj, maximize, eps):
                continue
            heapq.heappush(heap, (key(csol.objective, depth + 1), depth + 1, clp.bounds, csol))

    if incumbent is None:
        return MipSolution(INFEASIBLE, nodes=nodes, incumbents=log)
    return MipSolution(OPTIMAL, incumbent, inc_obj, nodes, log)


def integer_ranges(mip: MixedIntegerProgram, arith: Arithmetic = EXACT) -> dict:
    """Integer bounds of every integer variable over the LP relaxation."""
    lp = mip.lp
    out = {}
    for j in sorted(mip.integers):
        c = [arith.zero] * lp.n
        c[j] = arith.one
        ends = []
        for sense in ("min", "max"):
            s = solve_lp(lp.with_objective(c, sense), arith)
            if s.status == INFEASIBLE:
                return {}
            if s.status == UNBOUNDED:
                raise BudgetExceeded(f"integer variable {j} is unbounded")
            ends.append(s.objective)
        lo = int(math.ceil(ends[0] - arith.tol.integrality_eps))
        hi = int(math.floor(ends[1] + arith.tol.integrality_eps))
        out[j] = (lo, hi)
    return out


def enumerate_optima(mip: MixedIntegerProgram, arith: Arithmetic = EXACT, budget: int = 6,
                     max_assignments: int = 4096) -> list:
    """All optimal integer assignments, each with one LP-optimal completion.

    Returns a list of ``(x, objective)`` pairs in lexicographic order of the
    integer assignment.  Raises :class:`BudgetExceeded` above ``budget``
    integer variables or ``max_assignments`` candidate assignments.
    """
    ints = sorted(mip.integers)
    if len(ints) > budget:
        raise BudgetExceeded(f"{len(ints)} integer variables exceed budget {budget}")
    ranges = integer_ranges(mip, arith)
    if not ranges and ints:
        return []
    total = 1
    for j in ints:
        lo, hi = ranges[j]
        total *= max(hi - lo + 1, 0)
    if total > max_assignments:
        raise BudgetExceeded(f"{total} integer assignments exceed {max_assignments}")
    maximize = mip.lp.sense == MAX
    eps = arith.tol.feasibility_eps
    found = []
    for combo in itertools.product(*(range(ranges[j][0], ranges[j][1] + 1) for j in ints)):
        fixed = {j: (arith.scalar(v), arith.scalar(v)) for j, v in zip(ints, combo)}
        sol = solve_lp(mip.lp.with_bounds(fixed), arith)
        if sol.status == OPTIMAL:
            found.append((sol.x, sol.objective))
        elif sol.status == UNBOUNDED:
            raise BudgetExceeded("relaxation is unbounded")
    if not found:
        return []
    best = max(o for _, o in found) if maximize else min(o for _, o in found)
    return [(x, o) for x, o in found if abs(o - best) <= eps]
