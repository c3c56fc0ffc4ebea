"""Model A clearing: welfare master with accept/reject gates plus a price LP.

Every mixed-integer bid ``i`` gets a binary gate ``lam_i`` and its hull rows
become ``A_i d_i <= lam_i a_i``; with the hull bounded, ``lam_i = 0`` forces
``d_i = 0``.  For a master optimum the price LP searches prices ``pi`` and
row multipliers ``mu`` that make every convex bid and every accepted hull LP
optimal; its objective ``sum mu_i (lam_i a_i - A_i d_i)`` is zero exactly
when such prices exist.  Otherwise the current selection is cut off and the
master is re-solved.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import AuctionError
from .lp import EQ, GE, LE, MAX, MIN, OPTIMAL, UNBOUNDED, LinearProgram, Row, solve_lp
from .mip import MixedIntegerProgram, solve_mip
from .model import (Allocation, Auction, ConvexBid, MixedIntegerBid, SettlementRecord, bid_rows,
                    evaluate, individual_optimum, zero_feasible)
from .numeric import Arithmetic, Scalar, dot

log = logging.getLogger(__name__)

EQUILIBRIUM = "equilibrium"
MODEL_A_OPTIMAL = "model_a_optimal"
WELFARE_ONLY = "welfare_only"
INFEASIBLE = "infeasible"

NO_GOOD = "no-good"
HEURISTIC = "heuristic"


# ------------------------------------------------------------------ types

@dataclass(frozen=True)
class LambdaSelection:
    values: tuple  # (bid id, 0 or 1) pairs in mixed-integer bid order

    @classmethod
    def of(cls, auction: Auction, mapping) -> "LambdaSelection":
        return cls(tuple((b.id, int(mapping[b.id])) for b in auction.mi_bids))

    def __getitem__(self, bid_id):
        return dict(self.values)[bid_id]

    def as_dict(self) -> dict:
        return dict(self.values)


@dataclass
class CutPool:
    no_goods: list = field(default_factory=list)
    heuristic: list = field(default_factory=list)

    def add_no_good(self, sel: LambdaSelection) -> bool:
        if sel in self.no_goods:
            return False
        self.no_goods.append(sel)
        return True

    def add_heuristic(self, ids) -> bool:
        s = frozenset(ids)
        if s in self.heuristic:
            return False
        self.heuristic.append(s)
        return True

    def __len__(self):
        return len(self.no_goods) + len(self.heuristic)


@dataclass(frozen=True)
class DualCertificate:
    pi: tuple
    mu: dict
    complementarity_gap: Scalar


@dataclass
class ClearingOutcome:
    allocation: Allocation | None
    prices: tuple | None
    price_window: tuple | None
    settlement: SettlementRecord | None
    status: str
    welfare: Scalar | None
    certificate: DualCertificate | None = None
    iterations: list = field(default_factory=list)
    selection: LambdaSelection | None = None


@dataclass(frozen=True)
class Layout:
    """Column positions of the master problem."""

    offsets: dict
    lam_cols: dict
    n: int

    def split(self, auction: Auction, x: Sequence[Scalar]) -> tuple:
        delta = {b.id: tuple(x[self.offsets[b.id]:self.offsets[b.id] + b.n]) for b in auction.bids}
        lam = {bid: int(round(x[c])) for bid, c in self.lam_cols.items()}
        return Allocation(delta), LambdaSelection.of(auction, lam)


def master_layout(auction: Auction) -> Layout:
    offsets, col = {}, 0
    for b in auction.bids:
        offsets[b.id] = col
        col += b.n
    lam_cols = {}
    for b in auction.mi_bids:
        lam_cols[b.id] = col
        col += 1
    return Layout(offsets, lam_cols, col)


# ----------------------------------------------------------------- master

def clearing_rows(auction: Auction, layout: Layout) -> list:
    rows = []
    zero = auction.arith.zero
    for t, name in enumerate(auction.space.commodities):
        coeffs = {}
        for b in auction.bids:
            off = layout.offsets[b.id]
            for j, v in enumerate(b.Q[t]):
                if v:
                    coeffs[off + j] = v
        rows.append(Row(coeffs, EQ, zero, f"clear[{name}]"))
    return rows


def cut_rows(auction: Auction, layout: Layout, cuts: CutPool) -> list:
    one = auction.arith.one
    rows = []
    for sel in cuts.no_goods:
        coeffs, ones = {}, 0
        for bid, v in sel.values:
            coeffs[layout.lam_cols[bid]] = -one if v else one
            ones += v
        rows.append(Row(coeffs, GE, one - ones, "no-good"))
    for L in cuts.heuristic:
        coeffs = {layout.lam_cols[bid]: one for bid in sorted(L)}
        rows.append(Row(coeffs, LE, auction.arith.scalar(len(L) - 1), "heuristic"))
    return rows


def build_master(auction: Auction, cuts: CutPool | None = None,
                 fixed: dict | None = None) -> MixedIntegerProgram:
    """Welfare MIP over decisions and gates; ``fixed`` pins gate values."""
    arith = auction.arith
    layout = master_layout(auction)
    c = [arith.zero] * layout.n
    bounds = [(None, None)] * layout.n
    ints = set()
    rows = clearing_rows(auction, layout)
    for b in auction.bids:
        off = layout.offsets[b.id]
        for j, v in enumerate(b.c):
            c[off + j] = v
        lam = layout.lam_cols.get(b.id)
        rows.extend(bid_rows(b, off, lam))
        ints.update(off + j for j in b.integer_indices)
    for bid, col in layout.lam_cols.items():
        ints.add(col)
        if fixed is not None and bid in fixed:
            v = arith.scalar(fixed[bid])
            bounds[col] = (v, v)
        else:
            bounds[col] = (arith.zero, arith.one)
    rows.extend(cut_rows(auction, layout, cuts or CutPool()))
    return MixedIntegerProgram(LinearProgram(tuple(c), tuple(rows), tuple(bounds), MAX), ints)


def solve_max_welfare(auction: Auction) -> ClearingOutcome:
    """Welfare optimum ignoring prices (all gates fixed open)."""
    layout = master_layout(auction)
    mip = build_master(auction, fixed={b.id: 1 for b in auction.mi_bids})
    sol = solve_mip(mip, auction.arith)
    if not sol.optimal:
        return ClearingOutcome(None, None, None, None, INFEASIBLE, None)
    alloc, sel = layout.split(auction, sol.x)
    price = price_step(auction, alloc, sel)
    settle = evaluate(auction, alloc, price.pi)
    return ClearingOutcome(alloc, price.pi, price.window, settle, WELFARE_ONLY, sol.objective,
                           price.certificate, [], sel)


# --------------------------------------------------------------- price LP

@dataclass(frozen=True)
class PriceLayout:
    pi_cols: tuple
    mu_cols: dict  # bid id -> tuple of columns, one per constraint row
    n: int


def price_layout(auction: Auction) -> PriceLayout:
    col = auction.T
    mu = {}
    for b in auction.bids:
        m = len(b.rows)
        mu[b.id] = tuple(range(col, col + m))
        col += m
    return PriceLayout(tuple(range(auction.T)), mu, col)


def build_price_lp(auction: Auction, alloc: Allocation, sel: LambdaSelection) -> LinearProgram:
    """Price LP for a fixed master point ``(alloc, sel)`` (a minimisation)."""
    arith = auction.arith
    zero = arith.zero
    lay = price_layout(auction)
    c = [zero] * lay.n
    bounds = [(None, None)] * lay.n
    rows = []
    lam = sel.as_dict()
    for b in auction.bids:
        d = alloc[b.id]
        cols = lay.mu_cols[b.id]
        gate = arith.scalar(lam[b.id]) if isinstance(b, MixedIntegerBid) else None
        for k, (g, rhs) in enumerate(b.rows):
            act = dot(g, d)
            if gate is None:
                # complementarity with fixed d: slack rows carry no multiplier
                tight = arith.is_zero(act - rhs)
                bounds[cols[k]] = (zero, None) if tight else (zero, zero)
            else:
                bounds[cols[k]] = (zero, None)
                c[cols[k]] = gate * rhs - act
        for j in range(b.n):
            coeffs = {}
            for k, (g, _) in enumerate(b.rows):
                if g[j]:
                    coeffs[cols[k]] = g[j]
            for t in range(auction.T):
                if b.Q[t][j]:
                    coeffs[t] = coeffs.get(t, zero) + b.Q[t][j]
            rows.append(Row(coeffs, EQ, b.c[j], f"stat[{b.id},{j}]"))
    return LinearProgram(tuple(c), tuple(rows), tuple(bounds), MIN)


def lex_prices(lp: LinearProgram, pi_cols: Sequence[int], arith: Arithmetic) -> tuple:
    """Deterministic price pick on the feasible set of ``lp``.

    Returns ``(pi, window, x)``.  Each price in turn is minimised (maximised
    when unbounded below, set to zero when free both ways) and then fixed.
    ``window`` holds the independent per-price ``(min, max)`` ranges over the
    original set, with ``None`` for an infinite end.  The objective of ``lp``
    is ignored.
    """
    zero = arith.zero
    window = []
    for t in pi_cols:
        e = [zero] * lp.n
        e[t] = arith.one
        ends = []
        for sense in (MIN, MAX):
            s = solve_lp(lp.with_objective(e, sense), arith)
            if s.status == OPTIMAL:
                ends.append(s.objective)
            elif s.status == UNBOUNDED:
                ends.append(None)
            else:
                raise AuctionError("price set is empty")
        window.append(tuple(ends))
    cur = lp
    pi = []
    x = None
    for t, (lo, hi) in zip(pi_cols, window):
        e = [zero] * lp.n
        e[t] = arith.one
        s = solve_lp(cur.with_objective(e, MIN), arith)
        if s.status == UNBOUNDED:
            s = solve_lp(cur.with_objective(e, MAX), arith)
        if s.status == OPTIMAL:
            v = s.objective
        else:
            v = zero
        cur = cur.with_bounds({t: (v, v)})
        pi.append(v)
    s = solve_lp(cur.with_objective([zero] * lp.n, MIN), arith)
    x = s.x
    return tuple(pi), tuple(window), x


@dataclass
class PriceStep:
    gap: Scalar
    pi: tuple
    window: tuple
    certificate: DualCertificate
    raw: tuple  # optimal point of the first price LP solve


def price_step(auction: Auction, alloc: Allocation, sel: LambdaSelection) -> PriceStep:
    """Solve the price LP, then pick reported prices on its optimal face."""
    arith = auction.arith
    lay = price_layout(auction)
    lp = build_price_lp(auction, alloc, sel)
    sol = solve_lp(lp, arith)
    if not sol.optimal:
        raise AuctionError(f"price LP is {sol.status}")
    gap = sol.objective
    coeffs = {j: v for j, v in enumerate(lp.c) if v}
    face = lp.with_rows([Row(coeffs, LE, gap + arith.tol.complementarity_eps, "gap")]) if coeffs else lp
    pi, window, x = lex_prices(face, lay.pi_cols, arith)
    mu = {bid: tuple(x[c] for c in cols) for bid, cols in lay.mu_cols.items()}
    return PriceStep(gap, pi, window, DualCertificate(pi, mu, gap), tuple(sol.x))


def losing_bids(auction: Auction, alloc: Allocation, sel: LambdaSelection,
                raw: Sequence[Scalar]) -> list:
    """Mixed-integer bids with a strictly negative gap term at ``raw``."""
    arith = auction.arith
    lay = price_layout(auction)
    lam = sel.as_dict()
    out = []
    for b in auction.mi_bids:
        term = arith.zero
        for k, (g, rhs) in enumerate(b.rows):
            term += raw[lay.mu_cols[b.id][k]] * (dot(g, alloc[b.id]) - lam[b.id] * rhs)
        if term < -arith.tol.complementarity_eps:
            out.append(b.id)
    return out


# ------------------------------------------------------------ main loops

def upgrade_status(auction: Auction, alloc: Allocation, sel: LambdaSelection,
                   pi: Sequence[Scalar]) -> str:
    """Equilibrium when every rejected bid is also optimal at zero."""
    arith = auction.arith
    lam = sel.as_dict()
    for b in auction.mi_bids:
        if lam[b.id]:
            continue
        if not zero_feasible(b):
            return MODEL_A_OPTIMAL
        if individual_optimum(b, pi, None, arith).value > arith.tol.feasibility_eps:
            return MODEL_A_OPTIMAL
    return EQUILIBRIUM


def _run(auction: Auction, heuristic: bool, max_iter: int | None,
         on_iteration: Callable[[dict], None] | None) -> ClearingOutcome:
    arith = auction.arith
    layout = master_layout(auction)
    cuts = CutPool()
    history = []
    limit = max_iter if max_iter is not None else 2 ** len(auction.mi_bids) + 1
    for it in range(1, limit + 1):
        sol = solve_mip(build_master(auction, cuts), arith)
        if not sol.optimal:
            return ClearingOutcome(None, None, None, None, INFEASIBLE, None, None, history)
        alloc, sel = layout.split(auction, sol.x)
        step = price_step(auction, alloc, sel)
        entry = {"iter": it, "lambda": sel.as_dict(), "welfare": sol.objective,
                 "gap": step.gap, "cut_added": None}
        if arith.is_zero(step.gap, arith.tol.complementarity_eps):
            history.append(entry)
            if on_iteration:
                on_iteration(entry)
            settle = evaluate(auction, alloc, step.pi)
            status = upgrade_status(auction, alloc, sel, step.pi)
            return ClearingOutcome(alloc, step.pi, step.window, settle, status, sol.objective,
                                   step.certificate, history, sel)
        L = losing_bids(auction, alloc, sel, step.raw) if heuristic else []
        if L:
            cuts.add_heuristic(L)
            entry["cut_added"] = {"type": HEURISTIC, "bids": sorted(L)}
        elif not cuts.add_no_good(sel):
            raise AuctionError("selection was not excluded by the previous cut")
        else:
            entry["cut_added"] = {"type": NO_GOOD, "lambda": sel.as_dict()}
        history.append(entry)
        if on_iteration:
            on_iteration(entry)
        log.debug("iteration %d: gap %s, cut %s", it, step.gap, entry["cut_added"])
    raise AuctionError("iteration limit reached")


def solve_model_a_exact(auction: Auction, max_iter: int | None = None,
                        on_iteration: Callable[[dict], None] | None = None) -> ClearingOutcome:
    """Exact cut loop with no-good cuts; optimal for Model A."""
    return _run(auction, False, max_iter, on_iteration)


def solve_model_a_heuristic(auction: Auction, max_iter: int | None = None,
                            on_iteration: Callable[[dict], None] | None = None) -> ClearingOutcome:
    """Cut loop that forbids the whole set of loss-making accepted bids at once."""
    return _run(auction, True, max_iter, on_iteration)


def solve_convex_equilibrium(auction: Auction) -> ClearingOutcome:
    """Competitive equilibrium of a convex-only auction from welfare LP duals."""
    if auction.mi_bids:
        raise AuctionError("solve_convex_equilibrium needs an auction without mixed-integer bids")
    arith = auction.arith
    layout = master_layout(auction)
    lp = build_master(auction).lp
    sol = solve_lp(lp, arith)
    if not sol.optimal:
        return ClearingOutcome(None, None, None, None, INFEASIBLE, None)
    alloc, sel = layout.split(auction, sol.x)
    T = auction.T
    pi = tuple(sol.duals[:T])
    mu, r = {}, T
    for b in auction.bids:
        m = len(b.rows)
        mu[b.id] = tuple(sol.duals[r:r + m])
        r += m
    window = price_step(auction, alloc, sel).window
    settle = evaluate(auction, alloc, pi)
    return ClearingOutcome(alloc, pi, window, settle, EQUILIBRIUM, sol.objective,
                           DualCertificate(pi, mu, arith.zero),
                           [{"iter": 1, "lambda": {}, "welfare": sol.objective, "gap": arith.zero,
                             "cut_added": None}], sel)
