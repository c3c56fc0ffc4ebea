"""Auction clearing with convex and mixed-integer bids under linear prices."""

from .clearing import (ClearingOutcome, CutPool, DualCertificate, LambdaSelection, build_master,
                       build_price_lp, solve_convex_equilibrium, solve_max_welfare,
                       solve_model_a_exact, solve_model_a_heuristic)
from .lp import LinearProgram, LpSolution, Row, dual_certificate, solve_lp
from .mip import MipSolution, MixedIntegerProgram, enumerate_optima, solve_mip
from .model import (Allocation, Auction, CommoditySpace, ConvexBid, MixedIntegerBid, evaluate,
                    individual_optimum, validate_hull, validate_instance, value_query)
from .noloss import (NoLossOutcome, check_efficiency, price_feasibility, solve_noloss_heuristic,
                     solve_noloss_oracle)
from .numeric import EXACT, FLOATING, Arithmetic, TolerancePolicy, compare
from .verify import (brute_force_model_a, check_equilibrium, check_kkt, check_model_a,
                     check_noloss)

__version__ = "0.1.0"
