"""Invariant checks shared by the property tests and the acceptance suite.

Each function raises ``AssertionError`` with a seed in the message on the
first violation and returns the number of cases it examined.
"""

from fractions import Fraction

from auctionclear import clearing as C
from auctionclear import noloss as N
from auctionclear.generate import finite_bid, random_auction, random_noloss_auction
from auctionclear.mip import enumerate_optima
from auctionclear.model import (Auction, CommoditySpace, evaluate, make_convex_bid, make_mi_bid,
                                zero_feasible)
from auctionclear.verify import _gated_problem, _split, brute_force_model_a, check_decision_space

SEEDS = range(40)


def surplus_price_independence(seeds=SEEDS, prices=((0,), (3,), (-5, 2), (7, 1, Fraction(1, 3)))):
    """Summed surplus of a clearing allocation equals welfare at any price."""
    n = 0
    for seed in seeds:
        a = random_auction(seed)
        out = C.solve_max_welfare(a)
        if out.status == C.INFEASIBLE:
            continue
        for p in prices:
            pi = (list(p) * a.T)[:a.T]
            s = evaluate(a, out.allocation, pi)
            assert sum(s.surplus.values()) == out.welfare, seed
            n += 1
    return n


def money_clearing(seeds=SEEDS):
    """Transfers sum to zero whenever the market clears."""
    n = 0
    for seed in seeds:
        a = random_auction(seed)
        out = C.solve_model_a_exact(a)
        if out.status == C.INFEASIBLE:
            continue
        s = evaluate(a, out.allocation, out.prices)
        assert all(r == 0 for r in s.residual), seed
        assert sum(s.transfers.values()) == 0, seed
        n += 1
    return n


def heuristic_below_exact(seeds=SEEDS):
    n = 0
    for seed in seeds:
        a = random_auction(seed)
        ex = C.solve_model_a_exact(a)
        he = C.solve_model_a_heuristic(a)
        if ex.status == C.INFEASIBLE:
            continue
        assert he.welfare <= ex.welfare, seed
        n += 1
    return n


def oracle_above_model_a(seeds=SEEDS):
    """With 0 in every decision set the NoLoss optimum dominates Model A."""
    n = 0
    for seed in seeds:
        a = random_noloss_auction(seed)
        assert all(zero_feasible(b) for b in a.bids)
        assert N.solve_noloss_oracle(a).welfare >= C.solve_model_a_exact(a).welfare, seed
        n += 1
    return n


def tied_auction(k: int):
    """Buyer for ``k`` units facing three identical one-unit block sellers."""
    buyer = make_convex_bid("b", [5], [[1]], [[1], [-1]], [k, 0])
    sellers = [make_mi_bid(f"s{j}", [2, 0], [[1, 0]], [[1, 1], [-1, -1], [0, -1], [0, 1]],
                           [0, 0, 0, 1], 1) for j in range(3)]
    return Auction(CommoditySpace(["x"]), [buyer], sellers)


def price_lp_delta_independence(seeds=SEEDS):
    """The price-LP optimum at fixed gates is the same for every optimal allocation."""
    n = 0
    cases = [tied_auction(k) for k in (1, 2)]
    cases += [random_auction(seed, commodities=(1, 2), mixed=(1, 2)) for seed in seeds]
    for seed, a in enumerate(cases):
        ids = [b.id for b in a.mi_bids]
        lam = {i: 1 for i in ids}
        opts = enumerate_optima(_gated_problem(a, lam), a.arith)
        sel = C.LambdaSelection(tuple(sorted(lam.items())))
        gaps = {C.price_step(a, _split(a, x), sel).gap for x, _ in opts}
        assert len(gaps) <= 1, (seed, gaps)
        if seed < 2:
            assert len(opts) == 3
        n += len(opts)
    return n


def cut_validity(seeds=range(150)):
    """No-good cuts only remove selections outside the admissible set."""
    n = 0
    for seed in seeds:
        a = random_auction(seed)
        out = C.solve_model_a_exact(a)
        if out.status == C.INFEASIBLE:
            continue
        bf = brute_force_model_a(a)
        admissible = set(bf.admissible)
        ids = [b.id for b in a.mi_bids]
        for it in out.iterations:
            cut = it["cut_added"]
            if cut is None:
                continue
            assert it["gap"] > 0
            bits = tuple(cut["lambda"][i] for i in ids)
            assert bits not in admissible, (seed, bits)
            n += 1
    return n


def decision_space(count=50):
    n = 0
    for seed in range(count):
        bid = finite_bid(seed)
        g = [(seed % 5) - 2 + t for t in range(len(bid.Q))]
        for gv in (None, g):
            rep = check_decision_space(bid, gv)
            assert rep.passed, (seed, rep.failures())
        n += 1
    return n


ALL = {
    "surplus_pi_independence": surplus_price_independence,
    "money_clearing": money_clearing,
    "heuristic_le_exact": heuristic_below_exact,
    "oracle_ge_model_a": oracle_above_model_a,
    "price_lp_delta_independence": price_lp_delta_independence,
    "cut_validity": cut_validity,
    "decision_space": decision_space,
}
