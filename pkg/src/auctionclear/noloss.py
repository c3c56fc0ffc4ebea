"""Model B: maximise welfare subject to clearing and no participant losing money.

With prices fixed every surplus constraint is linear in the decisions, so
the problem is a MIP for each price vector.  The oracle exploits this by
solving one MIP per candidate price; the heuristic reuses the Model A
master and replaces the price LP by a direct price feasibility test.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .clearing import (HEURISTIC, NO_GOOD, CutPool, LambdaSelection, build_master, lex_prices,
                       master_layout)
from .errors import BudgetExceeded
from .lp import EQ, GE, LE, MAX, MIN, OPTIMAL, UNBOUNDED, LinearProgram, Row, solve_lp
from .mip import MixedIntegerProgram, solve_mip
from .model import (Allocation, Auction, ConvexBid, SettlementRecord, bid_rows, evaluate,
                    individual_optimum, net_values, quantities, valuation, zero_feasible)
from .numeric import Arithmetic, Scalar, dot

log = logging.getLogger(__name__)

HEURISTIC_METHOD = "heuristic"
ORACLE_METHOD = "oracle"

SOLVED = "solved"
INFEASIBLE = "infeasible"

CERTIFIED = "certified"
COUNTEREXAMPLE = "counterexample"
INCONCLUSIVE = "inconclusive"


@dataclass
class NoLossOutcome:
    allocation: Allocation | None
    prices: tuple | None
    price_window: tuple | None
    settlement: SettlementRecord | None
    welfare: Scalar | None
    method: str
    status: str = SOLVED
    efficiency_checked: bool = False
    exact: bool = False
    iterations: list = field(default_factory=list)


@dataclass(frozen=True)
class PriceCheck:
    feasible: bool
    pi: tuple | None
    window: tuple | None
    min_slack: Scalar | None
    slack_pi: tuple | None
    window_lp: LinearProgram | None = None


# -------------------------------------------------------- price feasibility

def _surplus_rows(auction: Auction, alloc: Allocation, floors: dict | None) -> list:
    """Rows ``-q_i . pi >= floor_i - v_i`` over the first T columns."""
    arith = auction.arith
    rows = []
    for b in auction.bids:
        d = alloc[b.id]
        q = quantities(b, d)
        f = arith.zero if floors is None else floors.get(b.id, arith.zero)
        coeffs = {t: -v for t, v in enumerate(q) if v}
        rows.append(Row(coeffs, GE, f - valuation(b, d), f"surplus[{b.id}]"))
    return rows


def _convex_optimality_rows(auction: Auction, alloc: Allocation, ncols: int):
    """Stationarity and complementarity rows that make convex bids optimal.

    Returns ``(rows, bounds)`` for extra multiplier columns starting at
    ``ncols``; the price columns are ``0..T-1``.
    """
    arith = auction.arith
    zero = arith.zero
    rows, bounds = [], []
    base = ncols
    for b in auction.convex_bids:
        d = alloc[b.id]
        cols = list(range(base, base + len(b.rows)))
        base += len(b.rows)
        for k, (g, rhs) in enumerate(b.rows):
            bounds.append((zero, None) if arith.is_zero(dot(g, d) - rhs) else (zero, zero))
        for j in range(b.n):
            coeffs = {cols[k]: g[j] for k, (g, _) in enumerate(b.rows) if g[j]}
            for t in range(auction.T):
                if b.Q[t][j]:
                    coeffs[t] = b.Q[t][j]
            rows.append(Row(coeffs, EQ, b.c[j], f"stat[{b.id},{j}]"))
    return rows, bounds


def price_feasibility(auction: Auction, alloc: Allocation, convex_optimal: bool = False,
                      floors: dict | None = None) -> PriceCheck:
    """Prices under which no bid of ``alloc`` loses (or falls below ``floors``).

    A max-min-slack LP decides feasibility.  When feasible the reported
    price is the lexicographic pick over the window of admissible prices.
    """
    arith = auction.arith
    T = auction.T
    zero = arith.zero
    srows = _surplus_rows(auction, alloc, floors)
    extra_rows, extra_bounds = ([], [])
    if convex_optimal:
        extra_rows, extra_bounds = _convex_optimality_rows(auction, alloc, T + 1)
    # columns: pi (T), s, multipliers
    n = T + 1 + len(extra_bounds)
    s_col = T
    slack_rows = []
    for r in srows:
        coeffs = dict(r.coeffs)
        coeffs[s_col] = -arith.one
        slack_rows.append(Row(coeffs, GE, r.rhs, r.name))
    c = [zero] * n
    c[s_col] = arith.one
    bounds = [(None, None)] * (T + 1) + list(extra_bounds)
    lp = LinearProgram(tuple(c), tuple(slack_rows) + tuple(extra_rows), tuple(bounds), MAX)
    sol = solve_lp(lp, arith)
    if sol.status == UNBOUNDED:
        min_slack, slack_pi = None, tuple(zero for _ in range(T))
        feasible = True
    elif sol.status == OPTIMAL:
        min_slack = sol.objective
        slack_pi = tuple(sol.x[:T])
        feasible = min_slack >= -arith.tol.feasibility_eps
    else:
        return PriceCheck(False, None, None, None, None)
    if not feasible:
        return PriceCheck(False, None, None, min_slack, slack_pi)
    wlp = LinearProgram((zero,) * n, tuple(srows) + tuple(extra_rows),
                        tuple([(None, None)] * T + [(zero, zero)] + list(extra_bounds)), MIN)
    pi, window, _ = lex_prices(wlp, range(T), arith)
    return PriceCheck(True, pi, window, min_slack, slack_pi, wlp)


def _outcome(auction: Auction, alloc: Allocation, check: PriceCheck, method: str,
             iterations=None, exact=False) -> NoLossOutcome:
    settle = evaluate(auction, alloc, check.pi)
    return NoLossOutcome(alloc, check.pi, check.window, settle, settle.welfare, method, SOLVED,
                         False, exact, iterations or [])


# ---------------------------------------------------------------- heuristic

def _zero_gates(auction: Auction) -> dict:
    """Gates that must stay open because zero is not a valid decision."""
    return {b.id: 1 for b in auction.mi_bids if not zero_feasible(b)}


def _shrink_rows(auction: Auction, pi: Sequence[Scalar], convex_optimal: bool) -> list:
    arith = auction.arith
    layout = master_layout(auction)
    rows = []
    for b in auction.bids:
        off = layout.offsets[b.id]
        w = net_values(b, pi)
        rhs = arith.zero
        if convex_optimal and isinstance(b, ConvexBid):
            rhs = individual_optimum(b, pi, None, arith).value
        rows.append(Row({off + j: v for j, v in enumerate(w) if v}, GE, rhs, f"shrink[{b.id}]"))
    return rows


def solve_noloss_heuristic(auction: Auction, convex_optimal: bool = False,
                           max_iter: int | None = None,
                           on_iteration: Callable[[dict], None] | None = None) -> NoLossOutcome:
    """Cut loop over the Model A master with direct price feasibility tests."""
    arith = auction.arith
    layout = master_layout(auction)
    fixed = _zero_gates(auction)
    cuts = CutPool()
    best = None  # (welfare, alloc, check)
    history = []
    limit = max_iter if max_iter is not None else 2 ** len(auction.mi_bids) + 1
    for it in range(1, limit + 1):
        mip = build_master(auction, cuts, fixed)
        sol = solve_mip(mip, arith)
        if not sol.optimal:
            break
        if best is not None and sol.objective <= best[0] + arith.tol.feasibility_eps:
            break
        alloc, sel = layout.split(auction, sol.x)
        check = price_feasibility(auction, alloc, convex_optimal)
        entry = {"iter": it, "lambda": sel.as_dict(), "welfare": sol.objective,
                 "gap": None if check.min_slack is None else -min(check.min_slack, arith.zero),
                 "cut_added": None}
        if check.feasible:
            best = (sol.objective, alloc, check)
            history.append(entry)
            if on_iteration:
                on_iteration(entry)
            break
        pi_hat = check.slack_pi
        rep = solve_mip(MixedIntegerProgram(mip.lp.with_rows(_shrink_rows(auction, pi_hat, convex_optimal)),
                                            mip.integers), arith)
        if rep.optimal and (best is None or rep.objective > best[0] + arith.tol.feasibility_eps):
            ralloc, _ = layout.split(auction, rep.x)
            rcheck = price_feasibility(auction, ralloc, convex_optimal)
            if rcheck.feasible:
                best = (rep.objective, ralloc, rcheck)
                entry["repair_welfare"] = rep.objective
        settle = evaluate(auction, alloc, pi_hat)
        lam = sel.as_dict()
        L = [b.id for b in auction.mi_bids
             if lam[b.id] and b.id not in fixed and settle.surplus[b.id] < -arith.tol.feasibility_eps]
        if L:
            cuts.add_heuristic(L)
            entry["cut_added"] = {"type": HEURISTIC, "bids": sorted(L)}
        else:
            free = {bid: v for bid, v in lam.items() if bid not in fixed}
            if not free or not cuts.add_no_good(_selection(auction, lam)):
                history.append(entry)
                if on_iteration:
                    on_iteration(entry)
                break
            entry["cut_added"] = {"type": NO_GOOD, "lambda": lam}
        history.append(entry)
        if on_iteration:
            on_iteration(entry)
    if best is None:
        if all(zero_feasible(b) for b in auction.bids):
            alloc = auction.zero_allocation()
            check = price_feasibility(auction, alloc, convex_optimal)
            if check.feasible:
                return _outcome(auction, alloc, check, HEURISTIC_METHOD, history)
        return NoLossOutcome(None, None, None, None, None, HEURISTIC_METHOD, INFEASIBLE,
                             iterations=history)
    return _outcome(auction, best[1], best[2], HEURISTIC_METHOD, history)


def _selection(auction: Auction, lam: dict) -> LambdaSelection:
    return LambdaSelection.of(auction, lam)


# ------------------------------------------------------------------- oracle

def components(auction: Auction) -> list:
    """Connected components of the bid/commodity incidence graph.

    Each component is ``(commodity indices, bids)``; bids that trade nothing
    form singleton components without commodities.
    """
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for b in auction.bids:
        find(("b", b.id))
        for t in range(auction.T):
            if any(b.Q[t]):
                union(("b", b.id), ("t", t))
    groups = {}
    for b in auction.bids:
        groups.setdefault(find(("b", b.id)), []).append(b)
    out = []
    for root, bids in groups.items():
        ts = sorted(t for t in range(auction.T) if find(("t", t)) == root and ("t", t) in parent)
        out.append((tuple(ts), tuple(bids)))
    out.sort(key=lambda cb: (cb[0], cb[1][0].id))
    return out


def _traded(b, t=None) -> list:
    return [s for s in range(len(b.Q)) if any(b.Q[s])] if t is None else [t]


def unit_value(bid, t: int):
    """``r`` with ``c = r * Q[t]`` when the bid only trades commodity ``t``."""
    if _traded(bid) != [t]:
        return None
    r = None
    for cj, qj in zip(bid.c, bid.Q[t]):
        if qj:
            ratio = cj / qj
            if r is None:
                r = ratio
            elif ratio != r:
                return None
        elif cj:
            return None
    return r


def candidate_prices(auction: Auction, bids: Sequence, t: int) -> list:
    zero = auction.arith.zero
    cand = set()
    for b in bids:
        r = unit_value(b, t)
        if r is not None:
            cand.add(r)
            continue
        for j in range(b.n):
            if b.Q[t][j] and all(not b.Q[s][j] for s in range(auction.T) if s != t):
                cand.add(b.c[j] / b.Q[t][j])
    return sorted(cand) or [zero]


def _side(auction: Auction, b, t: int) -> tuple:
    arith = auction.arith
    ends = []
    for sense in (MIN, MAX):
        lp = LinearProgram(tuple(b.Q[t]), tuple(bid_rows(b)), None, sense)
        ends.append(solve_lp(lp, arith).objective)
    return tuple(ends)


def oracle_exact(auction: Auction) -> bool:
    """Whether the candidate-price enumeration is provably exact here.

    True when every bid trades at most one commodity and, per commodity, all
    bids without a constant unit value trade on the same side of the market.
    """
    arith = auction.arith
    for t in range(auction.T):
        sides = set()
        for b in auction.bids:
            tr = _traded(b)
            if len(tr) > 1:
                return False
            if tr != [t] or unit_value(b, t) is not None:
                continue
            lo, hi = _side(auction, b, t)
            if lo < -arith.tol.feasibility_eps:
                sides.add("sell")
            if hi > arith.tol.feasibility_eps:
                sides.add("buy")
            if len(sides) > 1:
                return False
    return True


def _fixed_price_mip(auction: Auction, ts: Sequence[int], bids: Sequence, pi: dict,
                     floors: dict | None) -> MixedIntegerProgram:
    arith = auction.arith
    offsets, col = {}, 0
    for b in bids:
        offsets[b.id] = col
        col += b.n
    c = [arith.zero] * col
    rows, ints = [], set()
    for t in ts:
        coeffs = {}
        for b in bids:
            for j, v in enumerate(b.Q[t]):
                if v:
                    coeffs[offsets[b.id] + j] = v
        rows.append(Row(coeffs, EQ, arith.zero, f"clear[{t}]"))
    full_pi = [pi.get(t, arith.zero) for t in range(auction.T)]
    for b in bids:
        off = offsets[b.id]
        for j, v in enumerate(b.c):
            c[off + j] = v
        rows.extend(bid_rows(b, off))
        ints.update(off + j for j in b.integer_indices)
        w = net_values(b, full_pi)
        f = arith.zero if floors is None else floors.get(b.id, arith.zero)
        rows.append(Row({off + j: v for j, v in enumerate(w) if v}, GE, f, f"surplus[{b.id}]"))
    return MixedIntegerProgram(LinearProgram(tuple(c), tuple(rows), None, MAX), ints)


def _check_budget(auction: Auction, budget: int):
    nint = sum(len(b.integer_indices) for b in auction.bids)
    if nint > budget:
        raise BudgetExceeded(f"{nint} integer variables exceed oracle budget {budget}")


def _component_search(auction: Auction, ts, bids, floors, max_candidates: int):
    """Best (welfare, deltas, prices) over candidate prices for one component."""
    lists = [candidate_prices(auction, bids, t) for t in ts]
    total = 1
    for lst in lists:
        total *= len(lst)
    if total > max_candidates:
        raise BudgetExceeded(f"{total} candidate price vectors exceed {max_candidates}")
    best = None
    eps = auction.arith.tol.feasibility_eps
    for combo in itertools.product(*lists):
        pi = dict(zip(ts, combo))
        sol = solve_mip(_fixed_price_mip(auction, ts, bids, pi, floors), auction.arith)
        if not sol.optimal:
            continue
        if best is None or sol.objective > best[0] + eps:
            deltas, col = {}, 0
            for b in bids:
                deltas[b.id] = tuple(sol.x[col:col + b.n])
                col += b.n
            best = (sol.objective, deltas, pi)
    return best


def _oracle_search(auction: Auction, floors: dict | None, budget: int, max_candidates: int):
    _check_budget(auction, budget)
    welfare = auction.arith.zero
    delta, prices = {}, {}
    for ts, bids in components(auction):
        best = _component_search(auction, ts, bids, floors, max_candidates)
        if best is None:
            return None
        welfare += best[0]
        delta.update(best[1])
        prices.update(best[2])
    return welfare, Allocation(delta), prices


def solve_noloss_oracle(auction: Auction, budget: int = 6,
                        max_candidates: int = 4096) -> NoLossOutcome:
    """Desk-scale optimum by one fixed-price MIP per candidate price vector."""
    found = _oracle_search(auction, None, budget, max_candidates)
    exact = oracle_exact(auction)
    if found is None:
        return NoLossOutcome(None, None, None, None, None, ORACLE_METHOD, INFEASIBLE, exact=exact)
    _, alloc, _ = found
    check = price_feasibility(auction, alloc)
    if not check.feasible:
        raise AssertionError("oracle allocation failed its own price check")
    return _outcome(auction, alloc, check, ORACLE_METHOD, exact=exact)


@dataclass(frozen=True)
class GridResult:
    welfare: Scalar | None
    pitch: Scalar
    levels: int
    agreed: bool
    prices: tuple | None


def grid_cross_check(auction: Auction, margin: int = 1, max_levels: int = 8,
                     tol: float = 1e-6, budget: int = 6) -> GridResult:
    """Second oracle: fixed-price MIPs on a dyadic price grid, refined by halving.

    The grid for each commodity spans the candidate prices widened by
    ``margin`` and starts at unit pitch.  Refinement stops when two
    successive levels agree within ``tol`` welfare.
    """
    _check_budget(auction, budget)
    arith = auction.arith
    comps = components(auction)
    ranges = {}
    for ts, bids in comps:
        for t in ts:
            cand = candidate_prices(auction, bids, t)
            ranges[t] = (arith.floor(min(cand)) - margin, arith.ceil(max(cand)) + margin)
    prev = None
    pitch = arith.one
    for level in range(max_levels):
        total = arith.zero
        prices = {}
        ok = True
        for ts, bids in comps:
            axes = []
            for t in ts:
                lo, hi = ranges[t]
                k = int((hi - lo) / pitch)
                axes.append([lo + i * pitch for i in range(k + 1)])
            best = None
            for combo in itertools.product(*axes):
                pi = dict(zip(ts, combo))
                sol = solve_mip(_fixed_price_mip(auction, ts, bids, pi, None), arith)
                if sol.optimal and (best is None or sol.objective > best[0]):
                    best = (sol.objective, pi)
            if best is None:
                ok = False
                break
            total += best[0]
            prices.update(best[1])
        value = total if ok else None
        if prev is not None and (value is None) == (prev is None) and (
                value is None or abs(value - prev) <= tol):
            pv = tuple(prices.get(t, arith.zero) for t in range(auction.T)) if ok else None
            return GridResult(value, pitch, level + 1, True, pv)
        prev = value
        pitch = pitch / 2
    return GridResult(prev, pitch * 2, max_levels, False, None)


# --------------------------------------------------------------- efficiency

@dataclass(frozen=True)
class EfficiencyReport:
    verdict: str
    allocation: Allocation | None = None
    prices: tuple | None = None
    surpluses: dict | None = None
    message: str = ""


def check_efficiency(auction: Auction, outcome, budget: int = 6,
                     max_candidates: int = 4096) -> EfficiencyReport:
    """Search for a feasible point whose surpluses Pareto-dominate ``outcome``.

    Any dominating point has welfare above the outcome's (surpluses sum to
    welfare under clearing) and satisfies every no-loss row, so an exact
    oracle optimum not above the outcome's welfare certifies efficiency.
    """
    arith = auction.arith
    eps = arith.tol.feasibility_eps
    settle = evaluate(auction, outcome.allocation, outcome.prices)
    floors = dict(settle.surplus)
    best = solve_noloss_oracle(auction, budget, max_candidates)
    if best.welfare is not None and best.welfare <= settle.welfare + eps:
        if best.exact:
            if isinstance(outcome, NoLossOutcome):
                outcome.efficiency_checked = True
            return EfficiencyReport(CERTIFIED, message="no feasible point has higher welfare")
        return EfficiencyReport(INCONCLUSIVE, message="oracle is not provably exact here")
    if best.welfare is not None:
        chk = price_feasibility(auction, best.allocation, floors=floors)
        if chk.feasible:
            return _counter(auction, best.allocation, chk.pi)
    found = _oracle_search(auction, floors, budget, max_candidates)
    if found is not None and found[0] > settle.welfare + eps:
        chk = price_feasibility(auction, found[1], floors=floors)
        if chk.feasible:
            return _counter(auction, found[1], chk.pi)
    return EfficiencyReport(INCONCLUSIVE, message="higher welfare exists but no dominating point found")


def _counter(auction: Auction, alloc: Allocation, pi) -> EfficiencyReport:
    s = evaluate(auction, alloc, pi)
    return EfficiencyReport(COUNTEREXAMPLE, alloc, tuple(pi), dict(s.surplus),
                            "a feasible point dominates the outcome's surpluses")
