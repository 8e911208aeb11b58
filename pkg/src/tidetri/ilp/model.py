"""Binary program over candidate triangles with cocircuit equations."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..candidates import CandidateSet
from ..cost import CostTable
from ..delaunay import Tri, Triangulation, delaunay, euler_triangle_count
from ..geometry import hull_edges, orient2d


class InfeasibleModelError(RuntimeError):
    pass


@dataclass(frozen=True)
class Constraint:
    """``sum(coef * x[col]) == rhs`` for the edge ``(u, v)``, u < v."""

    name: str
    kind: str  # "boundary" or "interior"
    edge: tuple[int, int]
    columns: tuple[int, ...]
    coefs: tuple[int, ...]
    rhs: int


@dataclass(frozen=True)
class IlpModel:
    triangles: tuple[Tri, ...]
    costs: np.ndarray
    constraints: tuple[Constraint, ...]
    start: tuple[int, ...] = ()  # a known feasible selection, if any

    @property
    def n_vars(self) -> int:
        return len(self.triangles)

    @property
    def n_rows(self) -> int:
        return len(self.constraints)

    def column_name(self, j: int) -> str:
        return f"X{j + 1:07d}"

    def row_name(self, r: int) -> str:
        return f"R{r + 1:07d}"

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.zeros((self.n_rows, self.n_vars))
        b = np.zeros(self.n_rows)
        for r, con in enumerate(self.constraints):
            A[r, list(con.columns)] = con.coefs
            b[r] = con.rhs
        return A, b

    def objective(self, columns: Sequence[int]) -> float:
        return math.fsum(float(self.costs[j]) for j in sorted(columns))

    def is_feasible(self, columns: Sequence[int]) -> bool:
        chosen = set(columns)
        return all(sum(c for j, c in zip(con.columns, con.coefs) if j in chosen) == con.rhs
                   for con in self.constraints)

    def triangulation(self, columns: Sequence[int]) -> Triangulation:
        return Triangulation.from_triangles(self.triangles[j] for j in columns)


def build_model(cands: CandidateSet, costs: CostTable | np.ndarray, points) -> IlpModel:
    """One boundary equation per (split) hull edge, one interior equation per
    other edge spanned by a candidate."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    cost_values = np.asarray(costs.costs if isinstance(costs, CostTable) else costs, dtype=float)
    if len(cands) == 0:
        raise InfeasibleModelError("empty candidate set")
    if len(cost_values) != len(cands):
        raise ValueError("cost table does not cover the candidate set")
    incident: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for col, (a, b, c) in enumerate(cands.triangles):
        for u, v, w in ((a, b, c), (a, c, b), (b, c, a)):
            side = orient2d(*pts[u], *pts[v], *pts[w])
            incident[(u, v)].append((col, side))
    hull = {tuple(sorted(e)) for e in hull_edges(pts)}
    for e in sorted(hull):
        if e not in incident:
            raise InfeasibleModelError(f"hull edge {e} has no incident candidate")
    rows = []
    for e in sorted(set(incident) | hull):
        inc = sorted(incident[e])
        if e in hull:
            rows.append(Constraint("", "boundary", e, tuple(c for c, _ in inc),
                                   tuple(1 for _ in inc), 1))
        else:
            rows.append(Constraint("", "interior", e, tuple(c for c, _ in inc),
                                   tuple(s for _, s in inc), 0))
    rows = tuple(Constraint(f"R{r + 1:07d}", con.kind, con.edge, con.columns, con.coefs, con.rhs)
                 for r, con in enumerate(rows))
    # the Delaunay triangulation uses only empty triangles, so it is always
    # available among the candidates and gives the solver a feasible start
    index = cands.index()
    start = tuple(sorted(index[t] for t in delaunay(pts).triangles if t in index))
    if len(start) != euler_triangle_count(pts):
        start = ()
    return IlpModel(cands.triangles, cost_values, rows, start)
