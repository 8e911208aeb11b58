"""Per-triangle misfit against a reference raster.

Cell centres are assigned to triangles by a fixed infinitesimal shift of
the query point, q -> q + (eps, eps**2): a centre belongs to a triangle when
the shifted point lies in its open interior. The rule is local to each
triangle, so costs can be precomputed per candidate, and in any
triangulation every centre strictly inside the hull lands in exactly one
triangle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .delaunay import Tri, canonical
from .geometry import DegenerateTriangleError, orient2d, orient2d_many, strictly_inside_hull_many
from .ingest import LambertConformalConic, ProjectionSpec, RasterGrid


@dataclass(frozen=True)
class ErrorMetric:
    name: str
    rate: Callable[[np.ndarray], np.ndarray]

    def __call__(self, delta):
        return self.rate(delta)


SQUARED = ErrorMetric("squared", lambda d: d * d)
ABSOLUTE = ErrorMetric("absolute", np.abs)
METRICS = {m.name: m for m in (SQUARED, ABSOLUTE)}


def get_metric(name: str | ErrorMetric) -> ErrorMetric:
    if isinstance(name, ErrorMetric):
        return name
    try:
        return METRICS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


@dataclass(frozen=True)
class RegionMask:
    """Area of interest over grid cells.

    ``include`` optionally restricts the flattened cells further; cells must
    always hold data and lie strictly inside the hull of the stations used.
    """

    include: np.ndarray | None = None

    def cells(self, grid: RasterGrid, points, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
        ok = grid.valid.copy()
        if self.include is not None:
            ok &= np.asarray(self.include, dtype=bool).ravel()
        idx = np.nonzero(ok)[0]
        inside = strictly_inside_hull_many(points, cx[idx], cy[idx])
        return idx[inside]


def project_cell_centers(grid: RasterGrid, spec: ProjectionSpec) -> tuple[np.ndarray, np.ndarray]:
    lon, lat = grid.cell_centers()
    x, y = LambertConformalConic(spec).forward(lon, lat)
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _ccw(pts, tri: Tri) -> tuple[int, int, int]:
    a, b, c = tri
    o = orient2d(*pts[a], *pts[b], *pts[c])
    if o == 0:
        raise DegenerateTriangleError(f"triangle {tri} is degenerate")
    return (a, b, c) if o > 0 else (a, c, b)


def _shift_is_left(u, v) -> bool:
    """Whether q + (eps, eps^2) is left of the line u->v when q is on it."""
    dx, dy = v[0] - u[0], v[1] - u[1]
    return dy < 0 or (dy == 0 and dx > 0)


class CellAssigner:
    """Maps triangles over ``points`` to the masked-in cell centres they own."""

    def __init__(self, points, cx: np.ndarray, cy: np.ndarray, cells: np.ndarray):
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.cx = cx
        self.cy = cy
        self.cells = np.asarray(cells, dtype=np.int64)
        self._qx = cx[self.cells]
        self._qy = cy[self.cells]
        self._cache: dict[Tri, np.ndarray] = {}

    @classmethod
    def for_grid(cls, points, grid: RasterGrid, cx, cy, mask: RegionMask | None = None):
        mask = mask or RegionMask()
        return cls(points, cx, cy, mask.cells(grid, points, cx, cy))

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def cells_of(self, tri: Tri) -> np.ndarray:
        """Flat grid indices owned by ``tri``, ascending."""
        tri = canonical(tri)
        hit = self._cache.get(tri)
        if hit is not None:
            return hit
        pts = self.points
        a, b, c = _ccw(pts, tri)
        xs = pts[[a, b, c], 0]
        ys = pts[[a, b, c], 1]
        qx, qy = self._qx, self._qy
        sel = np.nonzero((qx >= xs.min()) & (qx <= xs.max())
                         & (qy >= ys.min()) & (qy <= ys.max()))[0]
        for u, v in ((a, b), (b, c), (c, a)):
            if not sel.size:
                break
            pu, pv = pts[u], pts[v]
            s = orient2d_many(pu[0], pu[1], pv[0], pv[1], qx[sel], qy[sel])
            ok = (s > 0) | ((s == 0) & _shift_is_left(pu, pv))
            sel = sel[ok]
        out = self.cells[sel]
        self._cache[tri] = out
        return out


def plane_value(tri_xy, tri_h, x, y):
    """Linear interpolation of vertex values over a triangle (barycentric)."""
    (ax, ay), (bx, by), (cx, cy) = np.asarray(tri_xy, dtype=float)
    ha, hb, hc = (float(v) for v in tri_h)
    if any(math.isnan(v) for v in (ha, hb, hc)):
        raise ValueError("vertex value missing")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def area(px, py, qx, qy, rx, ry):
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    whole = area(ax, ay, bx, by, cx, cy)
    if whole == 0:
        raise DegenerateTriangleError("collinear triangle")
    la = area(x, y, bx, by, cx, cy) / whole
    lb = area(ax, ay, x, y, cx, cy) / whole
    lc = area(ax, ay, bx, by, x, y) / whole
    return la * ha + lb * hb + lc * hc


def triangle_residuals(tri: Tri, h: np.ndarray, grid: RasterGrid,
                       assigner: CellAssigner) -> tuple[np.ndarray, np.ndarray]:
    """(cell indices, interpolated minus reference) for the cells ``tri`` owns."""
    tri = canonical(tri)
    cells = assigner.cells_of(tri)
    pts = assigner.points
    s = plane_value(pts[list(tri)], np.asarray(h, dtype=float)[list(tri)],
                    assigner.cx[cells], assigner.cy[cells])
    return cells, s - grid.flat[cells]


def triangle_cost(tri: Tri, h: np.ndarray, grid: RasterGrid, metric: ErrorMetric,
                  assigner: CellAssigner) -> tuple[float, int]:
    """Summed rated misfit and cell count of one triangle."""
    cells, resid = triangle_residuals(tri, h, grid, assigner)
    if not len(cells):
        return 0.0, 0
    return float(np.sum(metric(resid))), int(len(cells))


@dataclass(frozen=True)
class CostTable:
    costs: np.ndarray
    cells: np.ndarray

    def total(self, columns: Sequence[int]) -> float:
        """Correctly rounded sum of the costs of ``columns``."""
        return math.fsum(float(self.costs[c]) for c in columns)


def cost_table(triangles: Sequence[Tri], h, grid: RasterGrid, metric: ErrorMetric,
               assigner: CellAssigner) -> CostTable:
    costs = np.empty(len(triangles))
    cells = np.empty(len(triangles), dtype=np.int64)
    for i, t in enumerate(triangles):
        costs[i], cells[i] = triangle_cost(t, h, grid, metric, assigner)
    return CostTable(costs, cells)


def write_cost_table(triangles: Sequence[Tri], table: CostTable, path,
                     labels: Sequence[int] | None = None) -> None:
    """CSV ``triangle,i,j,k,cost,cells``; ``labels`` maps local to station indices."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["triangle", "i", "j", "k", "cost", "cells"])
        for n, t in enumerate(triangles):
            a, b, c = (labels[v] for v in t) if labels is not None else t
            w.writerow([n, a, b, c, repr(float(table.costs[n])), int(table.cells[n])])
