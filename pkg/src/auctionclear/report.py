"""Result documents (JSON and CSV) for solver outcomes."""

from __future__ import annotations

import csv
import io as _io
from typing import Sequence

from .model import Allocation, Auction, evaluate, quantities
from .numeric import Arithmetic


def jsonable(arith: Arithmetic, v):
    if isinstance(v, dict):
        return {str(k): jsonable(arith, x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(arith, x) for x in v]
    if v is None or isinstance(v, (str, bool, int)):
        return v
    return arith.fmt(v)


def result_to_dict(auction: Auction, outcome, model: str, extra: dict | None = None) -> dict:
    """Serialisable view of a clearing or no-loss outcome."""
    arith = auction.arith
    f = arith.fmt
    doc = {"schema": 1, "model": model, "arithmetic": arith.mode, "status": outcome.status,
           "welfare": f(outcome.welfare), "prices": None, "price_window": None,
           "allocation": None, "quantities": None, "surpluses": None, "transfers": None,
           "iterations": jsonable(arith, list(getattr(outcome, "iterations", []) or []))}
    if outcome.allocation is not None:
        alloc = outcome.allocation
        doc["allocation"] = {b.id: [f(v) for v in alloc[b.id]] for b in auction.bids}
        doc["quantities"] = {b.id: [f(v) for v in quantities(b, alloc[b.id])] for b in auction.bids}
    if outcome.prices is not None:
        doc["prices"] = dict(zip(auction.space.commodities, (f(v) for v in outcome.prices)))
        s = evaluate(auction, outcome.allocation, outcome.prices)
        doc["surpluses"] = {k: f(v) for k, v in s.surplus.items()}
        doc["transfers"] = {k: f(v) for k, v in s.transfers.items()}
    if outcome.price_window is not None:
        doc["price_window"] = {t: [f(lo), f(hi)] for t, (lo, hi)
                               in zip(auction.space.commodities, outcome.price_window)}
    cert = getattr(outcome, "certificate", None)
    if cert is not None:
        doc["certificate"] = {"complementarity_gap": f(cert.complementarity_gap),
                              "mu": {k: [f(v) for v in m] for k, m in cert.mu.items()}}
    if extra:
        doc.update(extra)
    return doc


def parse_result(auction: Auction, doc: dict) -> tuple:
    """``(allocation, prices)`` from a result document, in the auction's arithmetic."""
    arith = auction.arith
    if doc.get("allocation") is None:
        return None, None
    alloc = Allocation({b.id: arith.vector(doc["allocation"][b.id]) for b in auction.bids})
    prices = doc.get("prices")
    pi = None if prices is None else arith.vector(prices[t] for t in auction.space.commodities)
    return alloc, pi


CSV_FIELDS = ("id", "kind", "delta", "quantities", "transfer", "surplus")


def settlement_csv(auction: Auction, alloc: Allocation, pi: Sequence) -> str:
    """One row per bid; vectors are space-separated."""
    arith = auction.arith
    s = evaluate(auction, alloc, pi)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for b in auction.bids:
        kind = "mixed_integer" if b.integer_indices else "convex"
        w.writerow([b.id, kind, " ".join(str(arith.fmt(v)) for v in alloc[b.id]),
                    " ".join(str(arith.fmt(v)) for v in quantities(b, alloc[b.id])),
                    arith.fmt(s.transfers[b.id]), arith.fmt(s.surplus[b.id])])
    return buf.getvalue()


def certification_to_dict(auction: Auction, rep) -> dict:
    arith = auction.arith
    return {"passed": rep.passed,
            "checks": {name: {"pass": c.passed, "residual": arith.fmt(c.residual),
                              "witness": jsonable(arith, c.witness)}
                       for name, c in rep.checks.items()}}
