"""Branch-and-bound over the LP relaxation of an :class:`IlpModel`."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..delaunay import Triangulation, validate_triangulation
from .lp import INFEASIBLE, OPTIMAL, LPRelaxation
from .model import IlpModel, InfeasibleModelError

PROVEN_OPTIMAL = "ProvenOptimal"
INT_TOL = 1e-6


@dataclass
class SolveStats:
    nodes: int = 0
    lp_iterations: int = 0
    wall_time: float = 0.0


@dataclass
class IlpSolution:
    columns: tuple[int, ...]
    triangles: tuple[tuple[int, int, int], ...]
    objective: float
    status: str = PROVEN_OPTIMAL
    stats: SolveStats = field(default_factory=SolveStats)

    def triangulation(self) -> Triangulation:
        return Triangulation.from_triangles(self.triangles)


@dataclass
class _Node:
    lo: np.ndarray
    hi: np.ndarray
    bound: float
    seq: int
    basis: object = None


def _better(obj, tris, best_obj, best_tris) -> bool:
    if best_tris is None or obj < best_obj:
        return True
    return obj == best_obj and tris < best_tris


def solve(model: IlpModel, points=None) -> IlpSolution:
    """Proven-optimal selection of candidate triangles.

    Depth-first search (the x=1 child first) branching on the most fractional
    variable; whenever the incumbent improves, the open node with the best
    bound is explored next. Among integer solutions with exactly equal
    objective, the lexicographically smaller triangle list is kept.
    When ``points`` is given the result is checked geometrically.
    """
    start = time.perf_counter()
    A, b = model.matrix()
    c = model.costs
    n = model.n_vars
    stats = SolveStats()
    seq = 0
    hint = np.zeros(n)
    hint[list(model.start)] = 1.0
    relax = LPRelaxation(c, A, b, np.zeros(n), np.ones(n), hint=hint)
    stack = [_Node(np.zeros(n), np.ones(n), -np.inf, seq)]
    best_obj, best_cols, best_tris = np.inf, None, None
    if model.start and model.is_feasible(model.start):
        best_cols = tuple(model.start)
        best_obj = model.objective(best_cols)
        best_tris = tuple(sorted(model.triangles[v] for v in best_cols))

    def pruned(bound):
        return best_tris is not None and bound >= best_obj - 1e-9 * max(1.0, abs(best_obj))

    while stack:
        node = stack.pop()
        if pruned(node.bound):
            continue
        lp = relax.root if node.basis is None else relax.resolve(node.lo, node.hi, node.basis)
        stats.nodes += 1
        stats.lp_iterations += lp.iterations
        if lp.status == INFEASIBLE:
            continue
        if lp.status != OPTIMAL:
            raise RuntimeError(f"LP relaxation ended with status {lp.status}")
        if pruned(lp.objective):
            continue
        x = lp.x
        frac = np.minimum(x, 1.0 - x)
        j = int(np.argmax(frac))
        if frac[j] <= INT_TOL:
            cols = tuple(int(v) for v in np.nonzero(x > 0.5)[0])
            if not model.is_feasible(cols):
                raise RuntimeError("rounded LP solution violates the model")
            obj = model.objective(cols)
            tris = tuple(sorted(model.triangles[v] for v in cols))
            if _better(obj, tris, best_obj, best_tris):
                best_obj, best_cols, best_tris = obj, cols, tris
                # restart from the most promising open node
                stack.sort(key=lambda nd: (-nd.bound, nd.seq))
            continue
        basis = relax.state()
        lo0, hi0 = node.lo.copy(), node.hi.copy()
        hi0[j] = 0.0
        lo1, hi1 = node.lo.copy(), node.hi.copy()
        lo1[j] = 1.0
        seq += 1
        stack.append(_Node(lo0, hi0, lp.objective, seq, basis))
        seq += 1
        stack.append(_Node(lo1, hi1, lp.objective, seq, basis))

    stats.wall_time = time.perf_counter() - start
    if best_tris is None:
        raise InfeasibleModelError("no triangulation satisfies the model")
    sol = IlpSolution(best_cols, best_tris, best_obj, PROVEN_OPTIMAL, stats)
    if points is not None:
        problems = validate_triangulation(points, sol.triangulation())
        if problems:
            raise RuntimeError("solver returned an invalid triangulation: " + "; ".join(problems))
    return sol
