"""Independent certification of solver output.

Nothing here reuses the clearing or no-loss solve paths: every individual
problem is re-solved from the bid data, and the Model A oracle enumerates
accept/reject selections directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import BudgetExceeded
from .lp import EQ, GE, LE, MAX, OPTIMAL, LinearProgram, Row, solve_lp
from .mip import MixedIntegerProgram, solve_mip
from .model import (Allocation, Auction, MixedIntegerBid, arith_of, contains, decision_box, evaluate,
                    individual_optimum, quantities, valuation, value_query)
from .numeric import EXACT, Arithmetic, Scalar


@dataclass(frozen=True)
class Check:
    passed: bool
    residual: Scalar
    witness: object = None


@dataclass
class CertificationReport:
    checks: dict = field(default_factory=dict)

    def add(self, name: str, residual: Scalar, eps: Scalar, witness=None):
        self.checks[name] = Check(residual <= eps, residual, witness)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list:
        return [k for k, c in self.checks.items() if not c.passed]

    def worst(self) -> Scalar:
        return max((c.residual for c in self.checks.values()), default=0)


# -------------------------------------------------------------------- KKT

def check_kkt(lp: LinearProgram, x: Sequence[Scalar], duals: Sequence[Scalar],
              arith: Arithmetic = EXACT) -> CertificationReport:
    """Primal feasibility, multiplier signs, complementarity and stationarity.

    ``duals`` follow the sensitivity convention of :mod:`auctionclear.lp`.
    Variable bounds act as implicit constraints whose multipliers are the
    reduced costs, so stationarity only requires that a non-zero reduced
    cost be supported by an active bound of matching sign.
    """
    rep = CertificationReport()
    eps = arith.tol.complementarity_eps
    feps = arith.tol.feasibility_eps
    zero = arith.zero
    flip = arith.one if lp.sense == MAX else -arith.one

    primal = zero
    for r in lp.rows:
        act = sum((v * x[j] for j, v in r.coeffs.items()), zero)
        viol = {LE: act - r.rhs, GE: r.rhs - act, EQ: abs(act - r.rhs)}[r.rel]
        primal = max(primal, viol)
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            primal = max(primal, lo - x[j])
        if hi is not None:
            primal = max(primal, x[j] - hi)
    rep.add("primal_feasibility", primal, feps)

    sign = zero
    comp = zero
    for y, r in zip(duals, lp.rows):
        ys = flip * y  # non-negative for <= rows in the max convention
        if r.rel == LE:
            sign = max(sign, -ys)
        elif r.rel == GE:
            sign = max(sign, ys)
        if r.rel != EQ:
            act = sum((v * x[j] for j, v in r.coeffs.items()), zero)
            comp = max(comp, abs(y * (act - r.rhs)))
    rep.add("dual_sign", sign, eps)

    grad = [flip * cj for cj in lp.c]
    for y, r in zip(duals, lp.rows):
        for j, v in r.coeffs.items():
            grad[j] -= flip * y * v
    stat = zero
    for j, (lo, hi) in enumerate(lp.bounds):
        g = grad[j]
        if g > 0 and not (hi is not None and abs(x[j] - hi) <= feps):
            stat = max(stat, g)
        elif g < 0 and not (lo is not None and abs(x[j] - lo) <= feps):
            stat = max(stat, -g)
    rep.add("complementarity", comp, eps)
    rep.add("stationarity", stat, eps)
    return rep


# ------------------------------------------------------------ equilibrium

def _settlement_checks(rep: CertificationReport, auction: Auction, alloc: Allocation, pi):
    arith = auction.arith
    s = evaluate(auction, alloc, pi)
    rep.add("clearing", max((abs(r) for r in s.residual), default=arith.zero),
            arith.tol.feasibility_eps, s.residual)
    rep.add("money", abs(sum(s.transfers.values(), arith.zero)), arith.tol.feasibility_eps)
    for b in auction.bids:
        d = alloc[b.id]
        rep.add(f"feasible[{b.id}]", arith.zero if contains(b, d, arith) else arith.one,
                arith.zero, d)
    return s


def check_equilibrium(auction: Auction, alloc: Allocation, pi: Sequence[Scalar]) -> CertificationReport:
    """Every bid surplus-maximising at ``pi`` and the market clears."""
    arith = auction.arith
    pi = arith.vector(pi)
    rep = CertificationReport()
    s = _settlement_checks(rep, auction, alloc, pi)
    for b in auction.bids:
        opt = individual_optimum(b, pi, None, arith)
        rep.add(f"optimal[{b.id}]", max(opt.value - s.surplus[b.id], arith.zero),
                arith.tol.feasibility_eps, opt.delta)
    return rep


def check_model_a(auction: Auction, alloc: Allocation, pi: Sequence[Scalar]) -> CertificationReport:
    """Convex bids optimal; each mixed-integer bid optimal or rejected at zero."""
    arith = auction.arith
    pi = arith.vector(pi)
    rep = CertificationReport()
    s = _settlement_checks(rep, auction, alloc, pi)
    for b in auction.bids:
        opt = individual_optimum(b, pi, None, arith)
        res = max(opt.value - s.surplus[b.id], arith.zero)
        if isinstance(b, MixedIntegerBid) and all(arith.is_zero(v) for v in alloc[b.id]):
            res = arith.zero
        rep.add(f"optimal_or_rejected[{b.id}]", res, arith.tol.feasibility_eps, opt.delta)
    return rep


def check_noloss(auction: Auction, alloc: Allocation, pi: Sequence[Scalar]) -> CertificationReport:
    """Clearing, feasibility and non-negative surplus for every bid."""
    arith = auction.arith
    pi = arith.vector(pi)
    rep = CertificationReport()
    s = _settlement_checks(rep, auction, alloc, pi)
    for b in auction.bids:
        rep.add(f"no_loss[{b.id}]", max(-s.surplus[b.id], arith.zero), arith.tol.feasibility_eps)
    return rep


def check_welfare(auction: Auction, alloc: Allocation, welfare: Scalar) -> CertificationReport:
    """Feasibility, clearing and welfare-optimality against an independent MIP."""
    arith = auction.arith
    rep = CertificationReport()
    s = _settlement_checks(rep, auction, alloc, [arith.zero] * auction.T)
    best = _gated_problem(auction, {b.id: 1 for b in auction.mi_bids})
    sol = solve_mip(best, arith)
    opt = sol.objective if sol.optimal else s.welfare
    rep.add("welfare_optimal", max(opt - s.welfare, arith.zero), arith.tol.feasibility_eps)
    rep.add("welfare_reported", abs(s.welfare - welfare), arith.tol.feasibility_eps)
    return rep


# ------------------------------------------------------ Model A oracle

def _gated_problem(auction: Auction, lam: dict) -> MixedIntegerProgram:
    """Welfare problem with each hull scaled by its fixed gate value."""
    arith = auction.arith
    c, rows, ints = [], [], set()
    offsets = {}
    for b in auction.bids:
        offsets[b.id] = len(c)
        c.extend(b.c)
    for t in range(auction.T):
        coeffs = {}
        for b in auction.bids:
            for j, v in enumerate(b.Q[t]):
                if v:
                    coeffs[offsets[b.id] + j] = v
        rows.append(Row(coeffs, EQ, arith.zero))
    for b in auction.bids:
        off = offsets[b.id]
        scale = arith.scalar(lam[b.id]) if isinstance(b, MixedIntegerBid) else arith.one
        for g, rhs in b.rows:
            rows.append(Row({off + j: v for j, v in enumerate(g) if v}, LE, scale * rhs))
        ints.update(off + j for j in b.integer_indices)
    return MixedIntegerProgram(LinearProgram(tuple(c), tuple(rows), None, MAX), ints)


@dataclass
class BruteForceResult:
    welfare: Scalar | None
    admissible: list  # selections with a mixed-integral relaxation optimum
    table: dict  # selection -> (relaxation value, integral value)
    solutions: dict  # admissible selection -> allocation


def _split(auction: Auction, x) -> Allocation:
    out, col = {}, 0
    for b in auction.bids:
        out[b.id] = tuple(x[col:col + b.n])
        col += b.n
    return Allocation(out)


def brute_force_model_a(auction: Auction, budget: int = 4) -> BruteForceResult:
    """Model A optimum by enumerating every accept/reject selection.

    A selection is admissible when the welfare problem with those gates has
    an integral optimum, i.e. its MIP value equals its LP relaxation value.
    """
    ids = [b.id for b in auction.mi_bids]
    if len(ids) > budget:
        raise BudgetExceeded(f"{len(ids)} mixed-integer bids exceed budget {budget}")
    arith = auction.arith
    eps = arith.tol.feasibility_eps
    table, admissible, sols = {}, [], {}
    best = None
    for bits in itertools.product((0, 1), repeat=len(ids)):
        lam = dict(zip(ids, bits))
        mip = _gated_problem(auction, lam)
        relax = solve_lp(mip.lp, arith)
        if relax.status != OPTIMAL:
            table[bits] = (None, None)
            continue
        integral = solve_mip(mip, arith)
        iv = integral.objective if integral.optimal else None
        table[bits] = (relax.objective, iv)
        if iv is not None and abs(iv - relax.objective) <= eps:
            admissible.append(bits)
            sols[bits] = _split(auction, integral.x)
            if best is None or iv > best:
                best = iv
    return BruteForceResult(best, admissible, table, sols)


# ------------------------------------------------ decision-space transform

def enumerate_finite(bid: MixedIntegerBid, limit: int = 4096) -> list:
    """All points of an all-integer bid with a box-bounded hull."""
    if len(bid.integer_indices) != bid.n:
        raise ValueError("enumeration needs every coordinate integral")
    box = decision_box(bid)
    ranges = [range(int(lo), int(hi) + 1) for lo, hi in box]
    total = 1
    for r in ranges:
        total *= len(r)
    if total > limit:
        raise BudgetExceeded(f"{total} points exceed {limit}")
    arith = arith_of(bid)
    pts = []
    for p in itertools.product(*ranges):
        d = arith.vector(p)
        if contains(bid, d, arith):
            pts.append(d)
    return pts


def check_decision_space(bid: MixedIntegerBid, g: Sequence[Scalar] | None = None) -> CertificationReport:
    """Compare optimisation in decision space against quantity space.

    With ``g`` (a linear map on quantities) the objectives are
    ``v(d) - g.f(d)`` and ``Phi(q) - g.q``.  Checks that the optimal values
    agree, that ``f`` maps the decision argmax onto the quantity argmax, and
    that every value query matches brute force.
    """
    arith = arith_of(bid)
    zero = arith.zero
    gv = arith.vector(g) if g is not None else (zero,) * len(bid.Q)
    pts = enumerate_finite(bid)
    rep = CertificationReport()
    by_q = {}
    for d in pts:
        q = quantities(bid, d)
        by_q.setdefault(q, []).append(d)
    phi = {}
    worst = zero
    for q, ds in by_q.items():
        brute = max(valuation(bid, d) for d in ds)
        vq = value_query(bid, q, arith)
        phi[q] = vq.phi
        worst = max(worst, abs(vq.phi - brute))
    rep.add("value_query", worst, arith.tol.feasibility_eps)

    obj_d = {d: valuation(bid, d) - sum((gt * qt for gt, qt in zip(gv, quantities(bid, d))), zero)
             for d in pts}
    obj_q = {q: phi[q] - sum((gt * qt for gt, qt in zip(gv, q)), zero) for q in phi}
    best_d = max(obj_d.values())
    best_q = max(obj_q.values())
    rep.add("optimal_value", abs(best_d - best_q), arith.tol.feasibility_eps)
    arg_d = {quantities(bid, d) for d, v in obj_d.items() if v == best_d}
    arg_q = {q for q, v in obj_q.items() if v == best_q}
    rep.add("argmax_image", zero if arg_d == arg_q else arith.one, zero,
            (sorted(arg_d), sorted(arg_q)))
    return rep
