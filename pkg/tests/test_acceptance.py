"""Acceptance suite: one PASS/FAIL line per headline criterion."""

import time
from dataclasses import replace
from fractions import Fraction as F

import pytest

import invariants as I
from auctionclear import clearing as C
from auctionclear import io
from auctionclear import noloss as N
from auctionclear.generate import random_auction, random_convex_auction, random_noloss_auction
from auctionclear.model import Allocation, Auction, CommoditySpace, evaluate
from auctionclear.verify import brute_force_model_a, check_equilibrium, check_model_a


@pytest.fixture
def criterion(capsys):
    """Run a named check, print its verdict line, and re-raise failures."""
    def run(name, body):
        t0 = time.perf_counter()
        try:
            detail = body()
        except Exception as exc:
            with capsys.disabled():
                print(f"\nACCEPTANCE FAIL {name}: {type(exc).__name__}: {exc}")
            raise
        with capsys.disabled():
            print(f"\nACCEPTANCE PASS {name}: {detail} ({time.perf_counter() - t0:.2f}s)")
    return run


def _zero(alloc):
    return all(v == 0 for d in alloc.delta.values() for v in d)


def test_fill_or_kill(criterion):
    def body():
        t0 = time.perf_counter()
        a = io.load_fixture("example_4_1")
        out = C.solve_model_a_exact(a)
        elapsed = time.perf_counter() - t0
        assert _zero(out.allocation) and out.welfare == 0
        assert out.price_window[0][0] == 4 and out.prices == (4,)
        assert check_model_a(a, out.allocation, out.prices).passed
        eq = check_equilibrium(a, out.allocation, out.prices)
        assert not eq.passed and eq.failures() == ["optimal[seller]"]
        assert elapsed < 1, elapsed
        return f"window lower bound 4, equilibrium check fails on seller, {elapsed:.3f}s"
    criterion("example_fill_or_kill", body)


def test_lumpy_seller(criterion):
    def body():
        t0 = time.perf_counter()
        a = io.load_fixture("example_4_2")
        w = C.solve_max_welfare(a)
        out = C.solve_model_a_exact(a)
        elapsed = time.perf_counter() - t0
        q = tuple(w.allocation[k][0] for k in ("buyer1", "buyer2", "seller"))
        assert q == (1, 2, -3) and w.welfare == 1
        assert out.welfare == 0 and out.price_window[0][0] == 6
        assert out.iterations[0]["gap"] > 0
        assert elapsed < 1, elapsed
        shown = ", ".join(map(str, q))
        return f"welfare-max ({shown}), Model A welfare 0 with window from 6, {elapsed:.3f}s"
    criterion("example_lumpy_seller", body)


def test_startup_costs(criterion):
    def body():
        t0 = time.perf_counter()
        a = io.load_fixture("example_4_3")
        outs = [N.solve_noloss_oracle(a), N.solve_noloss_heuristic(a)]
        ma = C.solve_model_a_exact(a)
        elapsed = time.perf_counter() - t0
        for out in outs:
            assert out.welfare == 370
            assert out.allocation["producer"] == (1, 40) and out.allocation["consumer"] == (40,)
        assert outs[0].price_window == ((F(43, 4), 20),)
        s = evaluate(a, outs[0].allocation, [15])
        assert s.surplus == {"producer": 170, "consumer": 200}
        assert ma.welfare == 0
        assert elapsed < 5, elapsed
        return f"NoLoss welfare 370 in window [43/4, 20], Model A welfare 0, {elapsed:.3f}s"
    criterion("example_startup_costs", body)


def test_oracle_equivalence(criterion):
    def body():
        t0 = time.perf_counter()
        cases = [random_auction(s) for s in range(200)]
        cases += [random_auction(10_000 + s, mixed=(2, 3)) for s in range(100)]
        bad = []
        for k, a in enumerate(cases):
            out = C.solve_model_a_exact(a)
            bf = brute_force_model_a(a)
            got = None if out.status == C.INFEASIBLE else out.welfare
            if got != bf.welfare:
                bad.append((k, got, bf.welfare))
        elapsed = time.perf_counter() - t0
        assert not bad, bad[:5]
        assert elapsed < 300, elapsed
        return f"{len(cases)} instances agree with brute force"
    criterion("oracle_equivalence", body)


def test_welfare_theorem_round_trip(criterion):
    def body():
        n = 0
        for seed in range(200):
            a = random_convex_auction(seed)
            out = C.solve_convex_equilibrium(a)
            if out.status == C.INFEASIBLE:
                continue
            rep = check_equilibrium(a, out.allocation, out.prices)
            assert rep.passed and rep.worst() == 0, (seed, rep.failures())
            n += 1
        assert n >= 200
        return f"{n} convex auctions certified with zero residuals"
    criterion("welfare_theorem_round_trip", body)


def test_invariant_suite(criterion):
    def body():
        counts = {name: f() for name, f in I.ALL.items()}
        assert all(counts.values()), counts
        assert counts["decision_space"] >= 50
        return ", ".join(f"{k}={v}" for k, v in counts.items())
    criterion("invariant_suite", body)


def _lift(auction, T, t, tag):
    bids = []
    for b in auction.bids:
        Q = tuple(b.Q[0] if s == t else tuple(0 for _ in b.Q[0]) for s in range(T))
        bids.append(replace(b, id=f"{tag}{b.id}", Q=Q))
    return bids


def paired_auction(seed):
    """Two independent single-commodity markets side by side."""
    left = _lift(random_noloss_auction(seed), 2, 0, "x")
    right = _lift(random_noloss_auction(seed + 5000), 2, 1, "y")
    convex = [b for b in left + right if not b.integer_indices]
    mixed = [b for b in left + right if b.integer_indices]
    return Auction(CommoditySpace(["x", "y"]), convex, mixed)


def _component_welfare(a, alloc, prefix):
    return sum(b.c[j] * alloc[b.id][j] for b in a.bids if b.id.startswith(prefix)
               for j in range(b.n))


def test_efficiency_certification(criterion):
    def body():
        certified = refuted = 0
        for seed in range(100):
            a = random_noloss_auction(seed)
            o = N.solve_noloss_oracle(a)
            assert N.check_efficiency(a, o).verdict == N.CERTIFIED, seed
            certified += 1
            if o.welfare > 0:
                zero = N.NoLossOutcome(a.zero_allocation(), o.prices, None, None, 0, "injected")
                assert N.check_efficiency(a, zero).verdict == N.COUNTEREXAMPLE, seed
                refuted += 1
        for seed in range(40):
            a = paired_auction(seed)
            o = N.solve_noloss_oracle(a)
            assert N.check_efficiency(a, o).verdict == N.CERTIFIED, seed
            certified += 1
            for prefix in ("x", "y"):
                if _component_welfare(a, o.allocation, prefix) <= 0:
                    continue
                delta = {k: (tuple(0 for _ in d) if k.startswith(prefix) else d)
                         for k, d in o.allocation.delta.items()}
                alloc = Allocation(delta)
                assert N.price_feasibility(a, alloc).feasible
                pt = N.NoLossOutcome(alloc, o.prices, None, None,
                                     evaluate(a, alloc, o.prices).welfare, "injected")
                rep = N.check_efficiency(a, pt)
                assert rep.verdict == N.COUNTEREXAMPLE, (seed, prefix, rep.message)
                refuted += 1
        assert refuted > 0
        return f"{certified} optima certified, {refuted} injected points refuted"
    criterion("efficiency_certification", body)
