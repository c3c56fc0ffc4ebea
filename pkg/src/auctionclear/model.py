"""Bid language, auction instances, settlement and per-bid queries.

Convex bids have a linear valuation ``c @ d`` over the polytope
``G d <= h``.  Mixed-integer bids declare the same data plus a hull
description ``A d <= a`` whose intersection with integrality on the
integer coordinates is the decision set.  Both trade ``Q d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (DimensionMismatch, DuplicateBidId, EmptyDecisionSet, HullMismatch,
                     InfeasibleBundle, InstanceError, UnboundedDecisionSet)
from .lp import EQ, GE, INFEASIBLE, LE, MAX, MIN, OPTIMAL, UNBOUNDED, LinearProgram, Row, solve_lp
from .mip import MixedIntegerProgram, solve_mip
from .numeric import EXACT, FLOATING, Arithmetic, Scalar, dot

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass(frozen=True)
class CommoditySpace:
    commodities: tuple

    def __post_init__(self):
        object.__setattr__(self, "commodities", tuple(self.commodities))
        if not self.commodities:
            raise InstanceError("at least one commodity is required")
        if len(set(self.commodities)) != len(self.commodities):
            raise InstanceError("commodity identifiers must be unique")

    def __len__(self):
        return len(self.commodities)


@dataclass(frozen=True)
class ConvexBid:
    """Linear valuation over ``{d | G d <= h}``, trading ``Q d``."""

    id: str
    c: tuple
    Q: tuple
    G: tuple
    h: tuple

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def integer_indices(self) -> tuple:
        return ()

    @property
    def rows(self) -> tuple:
        return tuple(zip(self.G, self.h))


@dataclass(frozen=True)
class MixedIntegerBid:
    """Valuation ``c @ d`` over ``{d | A d <= a}`` with integer coordinates.

    By default the last ``z`` coordinates are the integer ones; an explicit
    ``integer_indices`` overrides that (its length must equal ``z``).
    """

    id: str
    c: tuple
    Q: tuple
    A: tuple
    a: tuple
    z: int
    integer_indices: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.integer_indices is None:
            object.__setattr__(self, "integer_indices",
                               tuple(range(len(self.c) - self.z, len(self.c))))
        else:
            object.__setattr__(self, "integer_indices", tuple(sorted(self.integer_indices)))

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def rows(self) -> tuple:
        return tuple(zip(self.A, self.a))


Bid = ConvexBid | MixedIntegerBid


def arith_of(bid: Bid) -> Arithmetic:
    """Arithmetic mode implied by the scalar type stored in ``bid``."""
    for v in bid.c:
        return EXACT if isinstance(v, Fraction) else FLOATING
    for row in bid.Q:
        for v in row:
            return EXACT if isinstance(v, Fraction) else FLOATING
    return EXACT


def make_convex_bid(id, c, Q, G, h, arith: Arithmetic = EXACT) -> ConvexBid:
    return ConvexBid(str(id), arith.vector(c), arith.matrix(Q), arith.matrix(G), arith.vector(h))


def make_mi_bid(id, c, Q, A, a, z, integer_indices=None,
                arith: Arithmetic = EXACT) -> MixedIntegerBid:
    idx = None if integer_indices is None else tuple(int(j) for j in integer_indices)
    return MixedIntegerBid(str(id), arith.vector(c), arith.matrix(Q), arith.matrix(A),
                           arith.vector(a), int(z), idx)


@dataclass(frozen=True)
class Auction:
    space: CommoditySpace
    convex_bids: tuple = ()
    mi_bids: tuple = ()
    arith: Arithmetic = EXACT

    def __post_init__(self):
        if not isinstance(self.space, CommoditySpace):
            object.__setattr__(self, "space", CommoditySpace(self.space))
        object.__setattr__(self, "convex_bids", tuple(sorted(self.convex_bids, key=lambda b: b.id)))
        object.__setattr__(self, "mi_bids", tuple(sorted(self.mi_bids, key=lambda b: b.id)))

    @property
    def T(self) -> int:
        return len(self.space)

    @property
    def bids(self) -> tuple:
        """Convex bids followed by mixed-integer bids, each block sorted by id."""
        return self.convex_bids + self.mi_bids

    def bid(self, bid_id: str) -> Bid:
        for b in self.bids:
            if b.id == bid_id:
                return b
        raise KeyError(bid_id)

    def zero_allocation(self) -> "Allocation":
        z = self.arith.zero
        return Allocation({b.id: (z,) * b.n for b in self.bids})


@dataclass(frozen=True)
class Allocation:
    delta: Mapping[str, tuple]

    def __getitem__(self, bid_id):
        return self.delta[bid_id]

    def __iter__(self):
        return iter(self.delta)


@dataclass(frozen=True)
class SettlementRecord:
    surplus: dict
    transfers: dict
    residual: tuple
    welfare: Scalar


@dataclass(frozen=True)
class ValueQueryResult:
    phi: Scalar
    witness: tuple


@dataclass(frozen=True)
class IndividualOptimum:
    delta: tuple
    value: Scalar


@dataclass
class ValidationReport:
    zero_feasible: dict = field(default_factory=dict)
    boxes: dict = field(default_factory=dict)
    hulls: dict = field(default_factory=dict)

    @property
    def all_zero_feasible(self) -> bool:
        return all(self.zero_feasible.values())


@dataclass(frozen=True)
class HullReport:
    status: str
    witness: tuple | None = None
    message: str = ""


# ---------------------------------------------------------------- helpers

def quantities(bid: Bid, delta: Sequence[Scalar]) -> tuple:
    return tuple(dot(row, delta) for row in bid.Q)


def valuation(bid: Bid, delta: Sequence[Scalar]) -> Scalar:
    return dot(bid.c, delta)


def bid_rows(bid: Bid, offset: int = 0, lam_col: int | None = None, name: str = "") -> list:
    """Constraint rows of ``bid`` placed at column ``offset``.

    With ``lam_col`` the right-hand side is gated: ``A d - a * lam <= 0``.
    """
    rows = []
    for k, (g, rhs) in enumerate(bid.rows):
        coeffs = {offset + j: v for j, v in enumerate(g) if v}
        tag = f"{name or bid.id}[{k}]"
        if lam_col is None:
            rows.append(Row(coeffs, LE, rhs, tag))
        else:
            if rhs:
                coeffs[lam_col] = -rhs
            rows.append(Row(coeffs, LE, 0 * rhs, tag))
    return rows


def _bid_lp(bid: Bid, c: Sequence[Scalar], sense: str = MAX, gate: int | None = None,
            extra: Iterable[Row] = ()) -> LinearProgram:
    rows = []
    for g, rhs in bid.rows:
        coeffs = {j: v for j, v in enumerate(g) if v}
        rows.append(Row(coeffs, LE, rhs if gate is None else rhs * gate))
    return LinearProgram(tuple(c), tuple(rows) + tuple(extra), None, sense)


def contains(bid: Bid, delta: Sequence[Scalar], arith: Arithmetic | None = None) -> bool:
    """Whether ``delta`` lies in the bid's decision set."""
    arith = arith or arith_of(bid)
    if len(delta) != bid.n:
        return False
    for g, rhs in bid.rows:
        if not arith.leq(dot(g, delta), rhs):
            return False
    return all(arith.is_integral(delta[j]) for j in bid.integer_indices)


def zero_feasible(bid: Bid) -> bool:
    return all(rhs >= 0 for _, rhs in bid.rows)


# ------------------------------------------------------------- validation

def _check_dims(bid: Bid, T: int):
    n = bid.n
    if n == 0:
        raise DimensionMismatch("bid has no decision variables", bid.id)
    if len(bid.Q) != T:
        raise DimensionMismatch(f"Q has {len(bid.Q)} rows, expected {T}", bid.id)
    for r in bid.Q:
        if len(r) != n:
            raise DimensionMismatch("Q column count differs from len(c)", bid.id)
    mat, rhs = (bid.G, bid.h) if isinstance(bid, ConvexBid) else (bid.A, bid.a)
    if len(mat) != len(rhs):
        raise DimensionMismatch("constraint matrix and right-hand side differ in length", bid.id)
    for r in mat:
        if len(r) != n:
            raise DimensionMismatch("constraint column count differs from len(c)", bid.id)
    if isinstance(bid, MixedIntegerBid):
        if bid.z < 1:
            raise DimensionMismatch("mixed-integer bid needs z >= 1", bid.id)
        if len(bid.integer_indices) != bid.z or len(set(bid.integer_indices)) != bid.z:
            raise DimensionMismatch("integer_indices must list z distinct columns", bid.id)
        if any(not 0 <= j < n for j in bid.integer_indices):
            raise DimensionMismatch("integer index out of range", bid.id)


def decision_box(bid: Bid, arith: Arithmetic | None = None) -> tuple:
    """Per-coordinate (min, max) over the bid's (relaxed) constraint polytope."""
    arith = arith or arith_of(bid)
    box = []
    for j in range(bid.n):
        e = [arith.zero] * bid.n
        e[j] = arith.one
        ends = []
        for sense in (MIN, MAX):
            sol = solve_lp(_bid_lp(bid, e, sense), arith)
            if sol.status == INFEASIBLE:
                raise EmptyDecisionSet("decision set is empty", bid.id)
            if sol.status == UNBOUNDED:
                raise UnboundedDecisionSet(f"coordinate {j} is unbounded", bid.id)
            ends.append(sol.objective)
        box.append(tuple(ends))
    return tuple(box)


def validate_instance(auction: Auction, check_hulls: bool = False,
                      hull_limit: int = 3) -> ValidationReport:
    """Structural validation; raises an :class:`InstanceError` subclass on failure."""
    seen = set()
    for b in auction.bids:
        if b.id in seen:
            raise DuplicateBidId(f"duplicate bid id {b.id!r}", b.id)
        seen.add(b.id)
    report = ValidationReport()
    for b in auction.bids:
        _check_dims(b, auction.T)
        report.boxes[b.id] = decision_box(b, auction.arith)
        if isinstance(b, MixedIntegerBid):
            sol = solve_mip(MixedIntegerProgram(_bid_lp(b, [auction.arith.zero] * b.n),
                                                b.integer_indices), auction.arith)
            if not sol.optimal:
                raise EmptyDecisionSet("no mixed-integer point satisfies the hull", b.id)
            report.zero_feasible[b.id] = zero_feasible(b)
            if check_hulls:
                h = validate_hull(b, hull_limit)
                report.hulls[b.id] = h.status
                if h.status == FAIL:
                    raise HullMismatch(f"bid {b.id!r}: {h.message}", h.witness)
        else:
            report.zero_feasible[b.id] = zero_feasible(b)
    return report


# ------------------------------------------------------------ hull check

def _solve_square(m: list, rhs: list) -> list | None:
    """Solve ``m x = rhs`` exactly; None when singular."""
    n = len(m)
    aug = [list(r) + [v] for r, v in zip(m, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def polytope_vertices(A: Sequence[Sequence], a: Sequence, max_bases: int = 20000) -> list:
    """Vertices of ``{x | A x <= a}`` by exhaustive active-set enumeration.

    Works in exact rationals whatever the input type.  Raises ValueError when
    the number of candidate bases exceeds ``max_bases``.
    """
    A = [EXACT.vector(r) for r in A]
    a = EXACT.vector(a)
    m = len(A)
    n = len(A[0]) if A else 0
    count = 1
    for k in range(n):
        count = count * (m - k) // (k + 1)
    if count > max_bases:
        raise ValueError(f"{count} bases exceed the enumeration budget")
    seen = set()
    out = []
    for combo in itertools.combinations(range(m), n):
        x = _solve_square([A[i] for i in combo], [a[i] for i in combo])
        if x is None:
            continue
        if all(dot(A[i], x) <= a[i] for i in range(m)):
            t = tuple(x)
            if t not in seen:
                seen.add(t)
                out.append(t)
    out.sort()
    return out


def _in_convex_hull(point: Sequence[Fraction], pts: Sequence[Sequence[Fraction]]) -> bool:
    k = len(pts)
    rows = [Row({j: Fraction(1) for j in range(k)}, EQ, Fraction(1))]
    for d in range(len(point)):
        rows.append(Row({j: Fraction(p[d]) for j, p in enumerate(pts) if p[d]}, EQ, Fraction(point[d])))
    lp = LinearProgram((Fraction(0),) * k, rows, ((Fraction(0), None),) * k, MAX)
    return solve_lp(lp, EXACT).status == OPTIMAL


def validate_hull(bid: MixedIntegerBid, limit: int = 3,
                  domain: Sequence[Sequence] | None = None) -> HullReport:
    """Check that the declared hull ``A d <= a`` equals ``conv(D)``.

    Without ``domain`` the decision set is the declared one (hull plus
    integrality), so the check reduces to "every hull vertex is integral on
    the integer coordinates".  With an explicit finite or vertex point list
    ``domain`` the declared hull must equal its convex hull.
    """
    if len(bid.integer_indices) > limit:
        return HullReport(SKIPPED, message="above size budget (declared hull trusted)")
    try:
        verts = polytope_vertices(bid.A, bid.a)
    except ValueError:
        return HullReport(SKIPPED, message="too many candidate bases (declared hull trusted)")
    if domain is None:
        for v in verts:
            if any(v[j].denominator != 1 for j in bid.integer_indices):
                return HullReport(FAIL, v, f"hull vertex {_fmt_point(v)} is not mixed-integral")
        return HullReport(PASS)
    pts = [tuple(EXACT.scalar(x) for x in p) for p in domain]
    for p in pts:
        if any(dot(g, p) > EXACT.scalar(r) for g, r in zip(bid.A, bid.a)):
            return HullReport(FAIL, p, f"point {_fmt_point(p)} lies outside the declared hull")
    for v in verts:
        if not _in_convex_hull(v, pts):
            return HullReport(FAIL, v, f"hull vertex {_fmt_point(v)} is not in conv(D)")
    return HullReport(PASS)


def _fmt_point(p) -> str:
    return "(" + ", ".join(EXACT.fmt(v) for v in p) + ")"


# ------------------------------------------------------------ evaluation

def evaluate(auction: Auction, alloc: Allocation, pi: Sequence[Scalar]) -> SettlementRecord:
    """Per-bid surplus and transfer at prices ``pi`` plus the clearing residual."""
    arith = auction.arith
    pi = arith.vector(pi)
    residual = [arith.zero] * auction.T
    surplus, transfers = {}, {}
    welfare = arith.zero
    for b in auction.bids:
        d = alloc[b.id]
        q = quantities(b, d)
        pay = dot(pi, q)
        v = valuation(b, d)
        transfers[b.id] = -pay
        surplus[b.id] = v - pay
        welfare += v
        residual = [r + x for r, x in zip(residual, q)]
    return SettlementRecord(surplus, transfers, tuple(residual), welfare)


def clears(auction: Auction, alloc: Allocation) -> bool:
    res = evaluate(auction, alloc, [auction.arith.zero] * auction.T).residual
    return all(auction.arith.is_zero(r) for r in res)


def value_query(bid: Bid, q: Sequence[Scalar], arith: Arithmetic | None = None) -> ValueQueryResult:
    """``max c @ d`` over decisions in D that trade exactly ``q``."""
    arith = arith or arith_of(bid)
    q = arith.vector(q)
    if len(q) != len(bid.Q):
        raise DimensionMismatch("bundle length differs from commodity count", bid.id)
    extra = []
    eps = arith.tol.feasibility_eps
    for t, row in enumerate(bid.Q):
        coeffs = {j: v for j, v in enumerate(row) if v}
        if arith.exact:
            extra.append(Row(coeffs, LE, q[t]))
            extra.append(Row(coeffs, GE, q[t]))
        else:
            extra.append(Row(coeffs, LE, q[t] + eps))
            extra.append(Row(coeffs, GE, q[t] - eps))
    lp = _bid_lp(bid, bid.c, MAX, extra=extra)
    sol = solve_mip(MixedIntegerProgram(lp, bid.integer_indices), arith)
    if not sol.optimal:
        raise InfeasibleBundle(f"bid {bid.id!r} cannot trade the requested bundle")
    return ValueQueryResult(sol.objective, sol.x)


def net_values(bid: Bid, pi: Sequence[Scalar]) -> tuple:
    """Objective of the individual problem: ``c - Q^T pi``."""
    return tuple(bid.c[j] - sum((pi[t] * bid.Q[t][j] for t in range(len(pi))), 0 * bid.c[j])
                 for j in range(bid.n))


def individual_optimum(bid: Bid, pi: Sequence[Scalar], lam: int | None = None,
                       arith: Arithmetic | None = None) -> IndividualOptimum:
    """Surplus-maximising decision of ``bid`` at prices ``pi``.

    For a mixed-integer bid ``lam`` may gate the hull (``A d <= lam a``);
    ``lam=None`` solves over the true decision set.
    """
    arith = arith or arith_of(bid)
    pi = arith.vector(pi)
    obj = net_values(bid, pi)
    if isinstance(bid, MixedIntegerBid) and lam is None:
        sol = solve_mip(MixedIntegerProgram(_bid_lp(bid, obj), bid.integer_indices), arith)
    else:
        gate = None if lam is None else arith.scalar(lam)
        sol = solve_lp(_bid_lp(bid, obj, gate=gate), arith)
    if not sol.optimal:
        raise InstanceError(f"individual problem is {sol.status}", bid.id)
    return IndividualOptimum(tuple(sol.x), sol.objective)
