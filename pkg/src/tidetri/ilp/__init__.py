from .bnb import PROVEN_OPTIMAL, IlpSolution, SolveStats, solve
from .lp import LPRelaxation, LPResult, solve_lp
from .model import Constraint, IlpModel, InfeasibleModelError, build_model
from .mps import export_mps, mps_text

__all__ = [
    "Constraint", "IlpModel", "IlpSolution", "InfeasibleModelError", "LPRelaxation", "LPResult",
    "PROVEN_OPTIMAL", "SolveStats", "build_model", "export_mps", "mps_text", "solve",
    "solve_lp",
]
