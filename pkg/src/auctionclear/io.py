"""JSON reading and writing for instances and results."""

from __future__ import annotations

import json
from decimal import Decimal
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import AuctionError
from .model import Auction, CommoditySpace, make_convex_bid, make_mi_bid
from .numeric import EXACT, Arithmetic

SCHEMA_VERSION = 1

_number = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*[-+]?[0-9.eE+\-/\s]+$"}]}
_vector = {"type": "array", "items": _number}
_matrix = {"type": "array", "items": _vector}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["commodities"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "commodities": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "convex_bids": {"type": "array", "items": {
            "type": "object", "required": ["id", "c", "Q", "G", "h"], "additionalProperties": False,
            "properties": {"id": {"type": "string"}, "c": _vector, "Q": _matrix,
                           "G": _matrix, "h": _vector}}},
        "mi_bids": {"type": "array", "items": {
            "type": "object", "required": ["id", "c", "Q", "A", "a", "z"],
            "additionalProperties": False,
            "properties": {"id": {"type": "string"}, "c": _vector, "Q": _matrix,
                           "A": _matrix, "a": _vector, "z": {"type": "integer", "minimum": 1},
                           "integer_indices": {"type": "array", "items": {"type": "integer",
                                                                           "minimum": 0}}}}},
    },
}


class ParseError(AuctionError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line, self.column = line, column


class SchemaError(AuctionError):
    def __init__(self, message: str, field: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _loads(text: str):
    try:
        return json.loads(text, parse_float=Decimal, parse_int=int)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None


def _check(data, schema):
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(data),
                    key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(e.message, where)


def auction_from_dict(data: dict, arith: Arithmetic = EXACT) -> Auction:
    _check(data, INSTANCE_SCHEMA)
    convex = [make_convex_bid(b["id"], b["c"], b["Q"], b["G"], b["h"], arith)
              for b in data.get("convex_bids", [])]
    mi = [make_mi_bid(b["id"], b["c"], b["Q"], b["A"], b["a"], b["z"],
                      b.get("integer_indices"), arith)
          for b in data.get("mi_bids", [])]
    return Auction(CommoditySpace(data["commodities"]), convex, mi, arith)


def auction_to_dict(auction: Auction) -> dict:
    f = EXACT.fmt if auction.arith.exact else float
    vec = lambda v: [f(x) for x in v]  # noqa: E731
    mat = lambda m: [vec(r) for r in m]  # noqa: E731
    out = {"schema": SCHEMA_VERSION, "commodities": list(auction.space.commodities),
           "convex_bids": [], "mi_bids": []}
    for b in auction.convex_bids:
        out["convex_bids"].append({"id": b.id, "c": vec(b.c), "Q": mat(b.Q),
                                   "G": mat(b.G), "h": vec(b.h)})
    for b in auction.mi_bids:
        d = {"id": b.id, "c": vec(b.c), "Q": mat(b.Q), "A": mat(b.A), "a": vec(b.a), "z": b.z}
        if b.integer_indices != tuple(range(b.n - b.z, b.n)):
            d["integer_indices"] = list(b.integer_indices)
        out["mi_bids"].append(d)
    return out


def loads_auction(text: str, arith: Arithmetic = EXACT) -> Auction:
    return auction_from_dict(_loads(text), arith)


def load_auction(path, arith: Arithmetic = EXACT) -> Auction:
    return loads_auction(Path(path).read_text(), arith)


def load_json(path):
    return _loads(Path(path).read_text())


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


FIXTURES = ("example_4_1", "example_4_2", "example_4_3")


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("auctionclear") / "fixtures" / f"{name}.json"))


def load_fixture(name: str, arith: Arithmetic = EXACT) -> Auction:
    return load_auction(fixture_path(name), arith)


def load_expected(name: str) -> dict:
    return json.loads(fixture_path(f"{name}.expected").read_text())
