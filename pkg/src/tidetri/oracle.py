"""Synthetic scenarios and brute-force references for testing.

The enumerator and the order computation here use exact rational
arithmetic on their own, independent of the fast predicates elsewhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .candidates import UNBOUNDED
from .cost import SQUARED, CellAssigner, ErrorMetric, RegionMask, triangle_cost
from .delaunay import Tri, Triangulation
from .ingest import (GaugeRecord, ProjectionSpec, RasterGrid, StationSet, default_projection,
                     epoch_to_month, make_stations, month_to_epoch, project)


@dataclass(frozen=True)
class SyntheticScenario:
    """Seeded synthetic stations, gauges and grids.

    The surface (cm) is defined in normalised projected coordinates: a
    plane drifting with a linear trend, Gaussian bumps whose centres circle
    with a 12-epoch period, and a slower interannual bump. Because the bumps
    move rather than flip sign, the surface six months on has a different
    shape, not just the opposite one. Noise and gaps apply to gauges only.
    """

    n_stations: int = 20
    n_epochs: int = 60
    seed: int = 0
    region: tuple[float, float, float, float] = (-4.0, 9.0, 50.0, 60.0)  # lon0, lon1, lat0, lat1
    margin: float = 0.1
    grid_cols: int = 60
    grid_rows: int = 50
    grid_start: int = 0
    start_epoch: str = "1993-01"
    base_cm: float = 0.0
    gradient_cm: tuple[float, float] = (3.0, -2.0)
    trend_cm_per_year: float = 0.2
    n_bumps: int = 3
    bump_cm: float = 10.0
    bump_width: float = 0.25
    orbit_radius: float = 0.35
    interannual_cm: float = 2.0
    interannual_period: float = 43.0
    gap_probability: float = 0.0
    noise_cm: float = 0.0

    def __post_init__(self):
        lon0, lon1, lat0, lat1 = self.region
        if not (lon0 < lon1 and lat0 < lat1 and -90 < lat0 and lat1 < 90 and lon1 - lon0 < 180):
            raise ValueError(f"degenerate region box {self.region}")
        if self.n_stations < 3 or self.n_epochs < 1:
            raise ValueError("need at least 3 stations and 1 epoch")
        if not 0 <= self.margin < 0.5:
            raise ValueError("margin must lie in [0, 0.5)")
        if not 0 <= self.gap_probability < 1:
            raise ValueError("gap probability must lie in [0, 1)")
        if self.noise_cm < 0:
            raise ValueError("noise must be non-negative")
        if self.grid_cols < 1 or self.grid_rows < 1:
            raise ValueError("grid needs at least one cell")
        epoch_to_month(self.start_epoch)

    @property
    def epochs(self) -> tuple[str, ...]:
        m0 = epoch_to_month(self.start_epoch)
        return tuple(month_to_epoch(m0 + t) for t in range(self.n_epochs))


class SyntheticData(NamedTuple):
    stations: StationSet
    gauges: GaugeRecord
    grids: list[RasterGrid]
    projection: ProjectionSpec


class _Surface:
    def __init__(self, sc: SyntheticScenario, rng: np.random.Generator,
                 centre: tuple[float, float], half: float):
        self.sc = sc
        self.centre = centre
        self.half = half
        self.bump_centres = rng.uniform(-0.4, 0.4, size=(sc.n_bumps, 2))
        self.bump_phase = rng.uniform(0.0, 2 * math.pi, size=sc.n_bumps)
        self.bump_sign = rng.choice([-1.0, 1.0], size=sc.n_bumps)
        self.inter_centre = rng.uniform(-0.3, 0.3, size=2)
        self.inter_phase = rng.uniform(0.0, 2 * math.pi)

    def __call__(self, x, y, t: int) -> np.ndarray:
        sc = self.sc
        u = (np.asarray(x, dtype=float) - self.centre[0]) / self.half
        v = (np.asarray(y, dtype=float) - self.centre[1]) / self.half
        f = sc.base_cm + sc.gradient_cm[0] * u + sc.gradient_cm[1] * v
        f = f + sc.trend_cm_per_year * t / 12.0
        w2 = 2.0 * sc.bump_width ** 2
        for (bu, bv), ph, sg in zip(self.bump_centres, self.bump_phase, self.bump_sign):
            a = 2 * math.pi * t / 12.0 + ph
            cu = bu + sc.orbit_radius * math.cos(a)
            cv = bv + sc.orbit_radius * math.sin(a)
            f = f + sg * sc.bump_cm * np.exp(-((u - cu) ** 2 + (v - cv) ** 2) / w2)
        if sc.interannual_cm:
            amp = sc.interannual_cm * math.sin(2 * math.pi * t / sc.interannual_period
                                               + self.inter_phase)
            cu, cv = self.inter_centre
            f = f + amp * np.exp(-((u - cu) ** 2 + (v - cv) ** 2) / (4.0 * w2))
        return f


def generate(scenario: SyntheticScenario) -> SyntheticData:
    """Stations, gauge record and grids for ``scenario``; fully seeded."""
    sc = scenario
    rng = np.random.default_rng(sc.seed)
    lon0, lon1, lat0, lat1 = sc.region
    spec = default_projection([lon0, lon1], [lat0, lat1])
    mx = sc.margin * (lon1 - lon0)
    my = sc.margin * (lat1 - lat0)
    lon = rng.uniform(lon0 + mx, lon1 - mx, size=sc.n_stations)
    lat = rng.uniform(lat0 + my, lat1 - my, size=sc.n_stations)
    width = len(str(sc.n_stations))
    ids = [f"S{k + 1:0{width}d}" for k in range(sc.n_stations)]
    stations = make_stations(ids, lon, lat, spec)

    corners_x, corners_y = project(spec, np.array([lon0, lon1, lon0, lon1]),
                                   np.array([lat0, lat0, lat1, lat1]))
    centre = (float(np.mean(corners_x)), float(np.mean(corners_y)))
    half = 0.5 * max(np.ptp(corners_x), np.ptp(corners_y))
    surface = _Surface(sc, rng, centre, half)

    epochs = sc.epochs
    values = np.empty((sc.n_stations, sc.n_epochs))
    for t in range(sc.n_epochs):
        values[:, t] = surface(stations.x, stations.y, t)
    if sc.noise_cm:
        values += rng.normal(0.0, sc.noise_cm, size=values.shape)
    if sc.gap_probability:
        values[rng.random(values.shape) < sc.gap_probability] = np.nan
    gauges = GaugeRecord(tuple(ids), epochs, values)

    dlon = (lon1 - lon0) / sc.grid_cols
    dlat = (lat1 - lat0) / sc.grid_rows
    template = RasterGrid(lon0, lat0, dlon, dlat, np.zeros((sc.grid_rows, sc.grid_cols)))
    clon, clat = template.cell_centers()
    cx, cy = project(spec, clon, clat)
    grids = [template.with_values(surface(cx, cy, t), epochs[t])
             for t in range(sc.grid_start, sc.n_epochs)]
    return SyntheticData(stations, gauges, grids, spec)


# ---------------------------------------------------------------- exact geometry

def _exact(points) -> list[tuple[Fraction, Fraction]]:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return [(Fraction(float(x)), Fraction(float(y))) for x, y in pts]


def _orient(p, q, r) -> int:
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (d > 0) - (d < 0)


def _incircle(a, b, c, d) -> int:
    """Positive when d is inside the circle through a, b, c (counter-clockwise)."""
    rows = [(p[0] - d[0], p[1] - d[1]) for p in (a, b, c)]
    m = [(x, y, x * x + y * y) for x, y in rows]
    det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
           - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    return (det > 0) - (det < 0)


def _empty(P, a, b, c) -> bool:
    """Non-degenerate and no other point in the closed triangle."""
    o = _orient(P[a], P[b], P[c])
    if o == 0:
        return False
    if o < 0:
        b, c = c, b
    for k, q in enumerate(P):
        if k in (a, b, c):
            continue
        if (_orient(P[a], P[b], q) >= 0 and _orient(P[b], P[c], q) >= 0
                and _orient(P[c], P[a], q) >= 0):
            return False
    return True


def _hull_edges(P) -> list[tuple[int, int]]:
    """Directed boundary edges with the point set on their left, split at
    collinear boundary points."""
    n = len(P)
    out = []
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            sides = [_orient(P[u], P[v], q) for q in P]
            if any(s < 0 for s in sides):
                continue
            if all(s == 0 for s in sides):
                continue
            between = False
            for k, q in enumerate(P):
                if k in (u, v) or sides[k] != 0:
                    continue
                t_num = (q[0] - P[u][0]) * (P[v][0] - P[u][0]) + (q[1] - P[u][1]) * (P[v][1] - P[u][1])
                t_den = (P[v][0] - P[u][0]) ** 2 + (P[v][1] - P[u][1]) ** 2
                if 0 < t_num < t_den:
                    between = True
                    break
            if not between:
                out.append((u, v))
    return out


def _ccw(P, t) -> tuple[int, int, int]:
    a, b, c = t
    return (a, b, c) if _orient(P[a], P[b], P[c]) > 0 else (a, c, b)


def _overlap(P, s, t) -> bool:
    """Whether the open interiors of two counter-clockwise triangles meet."""
    for tri, other in ((s, t), (t, s)):
        for e in range(3):
            u, v = tri[e], tri[(e + 1) % 3]
            if all(_orient(P[u], P[v], P[w]) <= 0 for w in other):
                return False
    return True


def enumerate_all_triangulations(points) -> list[Triangulation]:
    """Every triangulation of 3 to 9 points, each exactly once.

    Backtracking keeps a frontier of directed edges whose left side is still
    uncovered and always fills the smallest one, so each triangulation is
    reached along a single path.
    """
    P = _exact(points)
    n = len(P)
    if not 3 <= n <= 9:
        raise ValueError(f"enumeration supports 3 to 9 points, got {n}")
    if len(set(P)) != n:
        raise ValueError("duplicate points")
    tris = [_ccw(P, t) for t in itertools.combinations(range(n), 3) if _empty(P, *t)]
    if not tris:
        raise ValueError("points are collinear")
    left: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for a, b, c in tris:
        for e in ((a, b), (b, c), (c, a)):
            left.setdefault(e, []).append((a, b, c))
    hull = _hull_edges(P)
    results: list[Triangulation] = []
    chosen: list[tuple[int, int, int]] = []

    def recurse(frontier: frozenset):
        if not frontier:
            results.append(Triangulation.from_triangles(chosen))
            return
        e = min(frontier)
        for t in left.get(e, ()):
            if any(_overlap(P, t, s) for s in chosen):
                continue
            nxt = set(frontier)
            ok = True
            a, b, c = t
            for u, v in ((a, b), (b, c), (c, a)):
                if (u, v) in nxt:
                    nxt.discard((u, v))
                elif (u, v) in hull_set:
                    ok = False
                    break
                else:
                    nxt.add((v, u))
            if not ok:
                continue
            chosen.append(t)
            recurse(frozenset(nxt))
            chosen.pop()

    hull_set = set(hull)
    recurse(frozenset(hull))
    return results


def triangle_order(P, t) -> int:
    """Number of points strictly inside the circumcircle of ``t``."""
    a, b, c = _ccw(P, t)
    return sum(1 for k, q in enumerate(P) if k not in t and _incircle(P[a], P[b], P[c], q) > 0)


class BruteForceResult(NamedTuple):
    triangulation: Triangulation
    cost: float
    n_optimal: int
    n_feasible: int


def brute_force_min_error(points, h, grid: RasterGrid, cx, cy, bound: float = UNBOUNDED,
                          metric: ErrorMetric | None = None,
                          mask: RegionMask | None = None) -> BruteForceResult:
    """Cheapest triangulation whose triangles all have order at most ``bound``.

    Costs are per-triangle sums combined with ``math.fsum``, the same
    arithmetic the solver's objective uses. Ties on cost go to the
    lexicographically smallest sorted triangle list.
    """
    metric = metric or SQUARED
    P = _exact(points)
    assigner = CellAssigner.for_grid(points, grid, cx, cy, mask)
    best = None
    feasible = 0
    n_best = 0
    orders: dict[Tri, int] = {}
    costs: dict[Tri, float] = {}
    for tri in enumerate_all_triangulations(points):
        for t in tri.triangles:
            if t not in orders:
                orders[t] = triangle_order(P, t)
        if any(orders[t] > bound for t in tri.triangles):
            continue
        feasible += 1
        for t in tri.triangles:
            if t not in costs:
                costs[t] = triangle_cost(t, h, grid, metric, assigner)[0]
        total = math.fsum(costs[t] for t in tri.triangles)
        key = (total, tri.triangles)
        if best is None or key < best:
            if best is None or total != best[0]:
                n_best = 0
            best = key
        if total == best[0]:
            n_best += 1
    if best is None:
        raise ValueError("no triangulation satisfies the order bound")
    return BruteForceResult(Triangulation(best[1]), best[0], n_best, feasible)
