"""Seeded random auctions built from a few bid templates.

All templates contain the zero decision, so every generated auction has
the trivial clearing as a fallback.
"""

from __future__ import annotations

import random

from .model import Auction, CommoditySpace, make_convex_bid, make_mi_bid
from .numeric import EXACT, Arithmetic


def _unit(T: int, t: int, v: int = 1) -> list:
    return [[v] if s == t else [0] for s in range(T)]


def limit_buy(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    r, cap = rng.randint(1, 10), rng.randint(1, 5)
    return make_convex_bid(bid_id, [r], _unit(T, t), [[1], [-1]], [cap, 0], arith)


def limit_sell(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    r, cap = rng.randint(1, 10), rng.randint(1, 5)
    return make_convex_bid(bid_id, [r], _unit(T, t), [[1], [-1]], [0, cap], arith)


def swap(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    """Trades ``t`` against another commodity at a fixed exchange ratio."""
    u = (t + 1 + rng.randrange(T - 1)) % T
    k = rng.randint(1, 3)
    Q = [[0] for _ in range(T)]
    Q[t] = [1]
    Q[u] = [-k]
    r = rng.randint(-10, 10)
    lo, hi = rng.randint(0, 3), rng.randint(0, 3)
    return make_convex_bid(bid_id, [r], Q, [[1], [-1]], [hi, lo], arith)


def polytope_bid(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    """Two decision variables in an integer box with one extra cutting row."""
    n = 2
    G, h = [], []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        G.append(e)
        h.append(rng.randint(0, 4))
        G.append([-v for v in e])
        h.append(rng.randint(0, 4))
    G.append([rng.randint(-3, 3) for _ in range(n)])
    h.append(rng.randint(0, 5))
    Q = [[rng.randint(-3, 3) if (s == t or rng.random() < 0.3) else 0 for _ in range(n)]
         for s in range(T)]
    c = [rng.randint(-10, 10) for _ in range(n)]
    return make_convex_bid(bid_id, c, Q, G, h, arith)


def fill_or_kill_sell(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    """Sell exactly ``k`` units or nothing; decision ``(q, x)`` with binary ``x``."""
    r, k = rng.randint(1, 10), rng.randint(1, 5)
    Q = [[1, 0] if s == t else [0, 0] for s in range(T)]
    return make_mi_bid(bid_id, [r, 0], Q, [[1, k], [-1, -k], [0, -1], [0, 1]], [0, 0, 0, 1], 1,
                       arith=arith)


def fill_or_kill_buy(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    r, k = rng.randint(1, 10), rng.randint(1, 5)
    Q = [[1, 0] if s == t else [0, 0] for s in range(T)]
    return make_mi_bid(bid_id, [r, 0], Q, [[1, -k], [-1, k], [0, -1], [0, 1]], [0, 0, 0, 1], 1,
                       arith=arith)


def startup_producer(rng: random.Random, bid_id: str, T: int, t: int, arith: Arithmetic = EXACT):
    """Fixed start-up cost plus marginal cost; output in ``[lo, cap]`` when on."""
    fixed, marginal = rng.randint(1, 10), rng.randint(1, 10)
    cap = rng.randint(1, 6)
    lo = rng.randint(0, cap)
    Q = [[0, -1] if s == t else [0, 0] for s in range(T)]
    A = [[-1, 0], [1, 0], [lo, -1], [-cap, 1]]
    return make_mi_bid(bid_id, [-fixed, -marginal], Q, A, [0, 1, 0, 0], 1, [0], arith)


CONVEX_TEMPLATES = (limit_buy, limit_sell)
MI_TEMPLATES = (fill_or_kill_sell, fill_or_kill_buy, startup_producer)


def random_auction(seed: int, commodities=(1, 3), convex=(1, 4), mixed=(0, 3),
                   general_convex: bool = True, arith: Arithmetic = EXACT) -> Auction:
    """General tiny auction for Model A and verification suites."""
    rng = random.Random(seed)
    T = rng.randint(*commodities)
    templates = list(CONVEX_TEMPLATES)
    if general_convex:
        templates.append(polytope_bid)
        if T > 1:
            templates.append(swap)
    cbids = [rng.choice(templates)(rng, f"c{k}", T, rng.randrange(T), arith)
             for k in range(rng.randint(*convex))]
    mbids = [rng.choice(MI_TEMPLATES)(rng, f"m{k}", T, rng.randrange(T), arith)
             for k in range(rng.randint(*mixed))]
    return Auction(CommoditySpace([f"t{t}" for t in range(T)]), cbids, mbids, arith)


def random_convex_auction(seed: int, arith: Arithmetic = EXACT) -> Auction:
    return random_auction(seed, mixed=(0, 0), arith=arith)


def random_noloss_auction(seed: int, arith: Arithmetic = EXACT) -> Auction:
    """Single-commodity auction on which the no-loss oracle is provably exact.

    Convex bids are limit orders and the only bids without a constant unit
    value are start-up producers, which always sell.
    """
    rng = random.Random(seed)
    cbids = [rng.choice(CONVEX_TEMPLATES)(rng, f"c{k}", 1, 0, arith)
             for k in range(rng.randint(1, 3))]
    mbids = [rng.choice(MI_TEMPLATES)(rng, f"m{k}", 1, 0, arith)
             for k in range(rng.randint(1, 3))]
    return Auction(CommoditySpace(["t0"]), cbids, mbids, arith)


def finite_bid(seed: int, arith: Arithmetic = EXACT):
    """All-integer bid over a small integer box: an explicit finite decision set."""
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    T = rng.randint(1, 2)
    A, a = [], []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        A.append(e)
        a.append(rng.randint(0, 2))
        A.append([-v for v in e])
        a.append(rng.randint(0, 2))
    Q = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(T)]
    c = [rng.randint(-5, 5) for _ in range(n)]
    return make_mi_bid(f"f{seed}", c, Q, A, a, n, arith=arith)
