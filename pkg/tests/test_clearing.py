from fractions import Fraction as F

from auctionclear import clearing as C
from auctionclear.lp import EQ, GE, LE, solve_lp
from auctionclear.model import Allocation, Auction, CommoditySpace, make_convex_bid
from auctionclear.verify import check_equilibrium, check_kkt, check_model_a


def convex_pair():
    buyer = make_convex_bid("b", [4], [[1]], [[1], [-1]], [1, 0])
    seller = make_convex_bid("s", [3], [[1]], [[1], [-1]], [0, 2])
    return Auction(CommoditySpace(["x"]), [buyer, seller])


def test_max_welfare_42(ex42):
    out = C.solve_max_welfare(ex42)
    q = {k: out.allocation[k][0] for k in ("buyer1", "buyer2", "seller")}
    assert q == {"buyer1": 1, "buyer2": 2, "seller": -3}
    assert out.welfare == 1 and out.status == C.WELFARE_ONLY


def test_max_welfare_41_and_empty(ex41):
    assert C.solve_max_welfare(ex41).welfare == 0
    empty = Auction(CommoditySpace(["x"]))
    assert C.solve_max_welfare(empty).welfare == 0


def test_build_master_shape_41(ex41):
    m = C.build_master(ex41)
    names = [r.name for r in m.lp.rows]
    assert sum(n.startswith("clear") for n in names) == 1
    assert sum(n.startswith("buyer") for n in names) == 2
    assert sum(n.startswith("seller") for n in names) == 4
    lam = C.master_layout(ex41).lam_cols["seller"]
    assert lam in m.integers and m.lp.bounds[lam] == (0, 1)


def test_cut_rows(ex41):
    pool = C.CutPool()
    assert pool.add_no_good(C.LambdaSelection((("seller", 1),)))
    assert not pool.add_no_good(C.LambdaSelection((("seller", 1),)))
    pool.add_heuristic(["seller"])
    rows = C.cut_rows(ex41, C.master_layout(ex41), pool)
    col = C.master_layout(ex41).lam_cols["seller"]
    # (1 - lam) >= 1  and  lam <= 0
    assert (rows[0].coeffs, rows[0].rel, rows[0].rhs) == ({col: -1}, GE, 0)
    assert (rows[1].coeffs, rows[1].rel, rows[1].rhs) == ({col: 1}, LE, 0)


def test_price_lp_41(ex41):
    sel = C.LambdaSelection((("seller", 0),))
    step = C.price_step(ex41, ex41.zero_allocation(), sel)
    assert step.gap == 0 and step.pi == (4,)
    assert step.window == ((4, None),)


def test_price_lp_42_positive_gap(ex42):
    alloc = Allocation({"buyer1": (F(1),), "buyer2": (F(2),), "seller": (F(-3), F(1))})
    lp = C.build_price_lp(ex42, alloc, C.LambdaSelection((("seller", 1),)))
    assert solve_lp(lp).objective > 0


def test_price_lp_convex_only():
    a = convex_pair()
    out = C.solve_max_welfare(a)
    lp = C.build_price_lp(a, out.allocation, C.LambdaSelection(()))
    assert solve_lp(lp).objective == 0


def test_model_a_41(ex41):
    out = C.solve_model_a_exact(ex41)
    assert out.welfare == 0 and out.prices == (4,)
    assert out.price_window[0][0] == 4
    assert out.status == C.MODEL_A_OPTIMAL
    assert all(v == 0 for d in out.allocation.delta.values() for v in d)
    assert check_model_a(ex41, out.allocation, out.prices).passed
    assert not check_equilibrium(ex41, out.allocation, out.prices).passed


def test_model_a_42(ex42):
    out = C.solve_model_a_exact(ex42)
    assert out.welfare == 0 and out.prices == (6,)
    assert out.iterations[0]["gap"] > 0
    assert out.iterations[0]["cut_added"]["type"] == C.NO_GOOD
    h = C.solve_model_a_heuristic(ex42)
    assert h.welfare == 0


def test_model_a_43(ex43):
    assert C.solve_model_a_exact(ex43).welfare == 0


def test_heuristic_41_uses_seller_cut(ex41):
    out = C.solve_model_a_heuristic(ex41)
    assert out.welfare == 0 and out.prices == (4,)


def test_convex_equilibrium_pair():
    a = convex_pair()
    out = C.solve_convex_equilibrium(a)
    assert out.status == C.EQUILIBRIUM and out.welfare == 1
    # the seller trades strictly inside its range, pinning the price to its cost
    assert out.prices == (3,) and out.price_window == ((3, 3),)
    assert check_equilibrium(a, out.allocation, out.prices).passed
    exact = C.solve_model_a_exact(a)
    assert exact.status == C.EQUILIBRIUM and len(exact.iterations) == 1
    assert C.solve_model_a_heuristic(a).welfare == exact.welfare


def test_convex_equilibrium_kkt():
    a = convex_pair()
    lp = C.build_master(a).lp
    sol = solve_lp(lp)
    assert check_kkt(lp, sol.x, sol.duals).worst() == 0


def test_single_bid_zero_trade():
    b = make_convex_bid("b", [4], [[1]], [[1], [-1]], [1, 0])
    a = Auction(CommoditySpace(["x"]), [b])
    out = C.solve_convex_equilibrium(a)
    assert out.welfare == 0 and out.prices == (4,)


def test_infeasible_clearing():
    b1 = make_convex_bid("b1", [4], [[1]], [[1], [-1]], [2, -1])
    b2 = make_convex_bid("b2", [4], [[1]], [[1], [-1]], [2, -1])
    a = Auction(CommoditySpace(["x"]), [b1, b2])
    assert C.solve_convex_equilibrium(a).status == C.INFEASIBLE
    assert C.solve_model_a_exact(a).status == C.INFEASIBLE


def test_iteration_callback(ex42):
    seen = []
    C.solve_model_a_exact(ex42, on_iteration=seen.append)
    assert [e["iter"] for e in seen] == [1, 2]
    assert set(seen[0]) == {"iter", "lambda", "welfare", "gap", "cut_added"}
