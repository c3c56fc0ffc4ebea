"""Command-line front end.

Exit codes: 0 solved (or check passed), 1 verification failed,
2 infeasible, 3 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import clearing, noloss, verify
from .errors import AuctionError, HullMismatch, InstanceError
from .io import ParseError, SchemaError, dumps, load_auction, load_json
from .model import validate_instance
from .numeric import FLOAT, RATIONAL, Arithmetic, TolerancePolicy
from .report import (certification_to_dict, jsonable, parse_result, result_to_dict,
                     settlement_csv)

EXIT_OK, EXIT_FAILED, EXIT_INFEASIBLE, EXIT_INVALID = 0, 1, 2, 3

MODELS = ("welfare", "convex-eq", "a-exact", "a-heuristic", "b-heuristic", "b-oracle")
COMMANDS = ("validate", "solve", "verify", "report")


@dataclass
class RunConfig:
    command: str
    input: str
    model: str = "a-exact"
    arithmetic: str = RATIONAL
    feasibility_eps: float | None = None
    integrality_eps: float | None = None
    seed: int | None = None
    output: str | None = None
    log: str | None = None
    report_csv: str | None = None
    result: str | None = None
    convex: str = "feasible"
    debug_lp: bool = False

    def arith(self) -> Arithmetic:
        if self.arithmetic == RATIONAL:
            return Arithmetic(RATIONAL)
        d = TolerancePolicy()
        return Arithmetic(FLOAT, TolerancePolicy(
            d.feasibility_eps if self.feasibility_eps is None else self.feasibility_eps,
            d.integrality_eps if self.integrality_eps is None else self.integrality_eps,
            d.complementarity_eps))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="auctionclear", description="Clear auctions with "
                                "convex and mixed-integer bids under linear prices.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", help="instance JSON file")
    p.add_argument("result", nargs="?", help="result JSON (verify and report)")
    p.add_argument("--model", choices=MODELS, default="a-exact")
    p.add_argument("--arithmetic", choices=(RATIONAL, FLOAT), default=RATIONAL)
    p.add_argument("--feasibility-eps", type=float)
    p.add_argument("--integrality-eps", type=float)
    p.add_argument("--seed", type=int, help="recorded in the result; solvers are deterministic")
    p.add_argument("--output", "-o")
    p.add_argument("--log", help="write the iteration log as JSON lines")
    p.add_argument("--report-csv")
    p.add_argument("--convex", choices=("feasible", "optimal"), default="feasible",
                   help="b-heuristic: also require convex bids to be optimal")
    p.add_argument("--debug-lp", action="store_true", help="dump simplex tableaus to stderr")
    return p


def _emit(cfg: RunConfig, text: str):
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _solve(cfg: RunConfig, auction):
    log_lines = []
    on_it = log_lines.append
    m = cfg.model
    if m == "welfare":
        out = clearing.solve_max_welfare(auction)
    elif m == "convex-eq":
        out = clearing.solve_convex_equilibrium(auction)
    elif m == "a-exact":
        out = clearing.solve_model_a_exact(auction, on_iteration=on_it)
    elif m == "a-heuristic":
        out = clearing.solve_model_a_heuristic(auction, on_iteration=on_it)
    elif m == "b-heuristic":
        out = noloss.solve_noloss_heuristic(auction, cfg.convex == "optimal", on_iteration=on_it)
    else:
        out = noloss.solve_noloss_oracle(auction)
    if cfg.log:
        arith = auction.arith
        with open(cfg.log, "w") as fh:
            for e in log_lines or getattr(out, "iterations", []):
                fh.write(json.dumps(jsonable(arith, e), sort_keys=True) + "\n")
    return out


def _certify(auction, model: str, alloc, pi, doc: dict):
    if model == "welfare":
        return verify.check_welfare(auction, alloc, auction.arith.scalar(doc["welfare"]))
    if model == "convex-eq" or doc.get("status") == clearing.EQUILIBRIUM:
        return verify.check_equilibrium(auction, alloc, pi)
    if model.startswith("a-"):
        return verify.check_model_a(auction, alloc, pi)
    return verify.check_noloss(auction, alloc, pi)


def run(cfg: RunConfig) -> int:
    if cfg.debug_lp:
        logging.basicConfig(level=logging.WARNING)
        logging.getLogger("auctionclear.lp").setLevel(logging.DEBUG)
    try:
        auction = load_auction(cfg.input, cfg.arith())
        report = validate_instance(auction, check_hulls=cfg.command == "validate")
    except (ParseError, SchemaError, InstanceError, HullMismatch) as e:
        bid = getattr(e, "bid_id", None)
        msg = f"invalid instance: {e}" + (f" (bid {bid!r})" if bid else "")
        print(msg, file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_INVALID

    if cfg.command == "validate":
        doc = {"valid": True, "zero_feasible": report.zero_feasible, "hulls": report.hulls}
        _emit(cfg, dumps(doc))
        return EXIT_OK

    if cfg.command == "solve":
        try:
            out = _solve(cfg, auction)
        except AuctionError as e:
            print(f"solve failed: {e}", file=sys.stderr)
            return EXIT_INVALID
        extra = {"seed": cfg.seed} if cfg.seed is not None else None
        doc = result_to_dict(auction, out, cfg.model, extra)
        _emit(cfg, dumps(doc))
        if cfg.report_csv and out.allocation is not None:
            Path(cfg.report_csv).write_text(settlement_csv(auction, out.allocation, out.prices))
        return EXIT_INFEASIBLE if out.allocation is None else EXIT_OK

    if not cfg.result:
        print(f"{cfg.command} needs a result file", file=sys.stderr)
        return EXIT_INVALID
    try:
        doc = load_json(cfg.result)
        alloc, pi = parse_result(auction, doc)
    except (ParseError, KeyError, ValueError, TypeError) as e:
        print(f"invalid result file: {e}", file=sys.stderr)
        return EXIT_INVALID
    if alloc is None:
        print("result has no allocation", file=sys.stderr)
        return EXIT_INFEASIBLE
    if pi is None:
        pi = [auction.arith.zero] * auction.T
    if cfg.command == "verify":
        rep = _certify(auction, doc.get("model", cfg.model), alloc, pi, doc)
        _emit(cfg, dumps(certification_to_dict(auction, rep)))
        return EXIT_OK if rep.passed else EXIT_FAILED
    text = settlement_csv(auction, alloc, pi)
    if cfg.report_csv:
        Path(cfg.report_csv).write_text(text)
    _emit(cfg, text)
    return EXIT_OK


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    cfg = RunConfig(ns.command, ns.input, ns.model, ns.arithmetic, ns.feasibility_eps,
                    ns.integrality_eps, ns.seed, ns.output, ns.log, ns.report_csv, ns.result,
                    ns.convex, ns.debug_lp)
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
