from fractions import Fraction as F

from auctionclear import clearing as C
from auctionclear.model import Allocation, Auction, CommoditySpace, make_convex_bid
from auctionclear.verify import (brute_force_model_a, check_decision_space, check_equilibrium,
                                 check_model_a, check_welfare)
from auctionclear.generate import finite_bid


def test_equilibrium_fails_for_41_model_a(ex41):
    out = C.solve_model_a_exact(ex41)
    rep = check_equilibrium(ex41, out.allocation, out.prices)
    assert rep.failures() == ["optimal[seller]"]
    assert rep.checks["optimal[seller]"].residual == 2


def test_buyer_fails_below_value(ex41):
    rep = check_equilibrium(ex41, ex41.zero_allocation(), [F(7, 2)])
    c = rep.checks["optimal[buyer]"]
    assert not c.passed and c.residual == F(1, 2) and c.witness == (1,)


def test_model_a_check_42(ex42):
    welfare = C.solve_max_welfare(ex42).allocation
    for pi in ([4], [F(9, 2)], [5], [6]):
        assert not check_model_a(ex42, welfare, pi).passed


def test_zero_allocation_high_price(ex42):
    # at price 100 the buyers want nothing, so the zero allocation is admissible
    assert check_model_a(ex42, ex42.zero_allocation(), [100]).passed
    b = make_convex_bid("s", [3], [[1]], [[1], [-1]], [0, 2])
    a = Auction(CommoditySpace(["x"]), [b])
    # a convex seller at price 100 wants to sell, so zero is not optimal
    assert not check_model_a(a, a.zero_allocation(), [100]).passed


def test_brute_force_examples(ex41, ex42, ex43):
    r = brute_force_model_a(ex41)
    assert r.welfare == 0 and r.admissible == [(0,)]
    # the open gate relaxes to welfare 1 but only 0 is reachable with integers
    assert r.table[(1,)] == (1, 0)
    assert brute_force_model_a(ex42).welfare == 0
    assert brute_force_model_a(ex43).welfare == 0


def test_brute_force_convex_only():
    b = make_convex_bid("b", [4], [[1]], [[1], [-1]], [1, 0])
    s = make_convex_bid("s", [3], [[1]], [[1], [-1]], [0, 2])
    a = Auction(CommoditySpace(["x"]), [b, s])
    assert brute_force_model_a(a).welfare == C.solve_max_welfare(a).welfare == 1


def test_check_welfare(ex42):
    out = C.solve_max_welfare(ex42)
    assert check_welfare(ex42, out.allocation, out.welfare).passed
    assert not check_welfare(ex42, ex42.zero_allocation(), F(0)).passed


def test_infeasible_decision_flagged(ex41):
    bad = Allocation({"buyer": (F(1),), "seller": (F(-1), F(1, 2))})
    rep = check_model_a(ex41, bad, [4])
    assert "feasible[seller]" in rep.failures()


def test_decision_space_single():
    rep = check_decision_space(finite_bid(3), g=[1, -1][:len(finite_bid(3).Q)])
    assert rep.passed
