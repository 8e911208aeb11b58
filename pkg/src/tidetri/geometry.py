"""Exact planar predicates.

Every predicate first evaluates the determinant in double precision and
accepts the sign when it clears a forward error bound (Shewchuk's stage-A
bounds). Otherwise the determinant is recomputed with Python integers after
scaling all coordinates by a common power of two, which is exact for any
finite double input.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

_EPS = 2.0 ** -53
_CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_ERRBOUND = (10.0 + 96.0 * _EPS) * _EPS
# below this magnitude products may have lost bits to underflow
_TINY = 1e-280


class DegenerateTriangleError(ValueError):
    pass


class PlanePoint(NamedTuple):
    x: float
    y: float


class Orientation(enum.IntEnum):
    CLOCKWISE = -1
    COLLINEAR = 0
    COUNTERCLOCKWISE = 1


class CirclePosition(enum.Enum):
    INSIDE = 1
    ON_CIRCLE = 0
    OUTSIDE = -1


class TrianglePosition(enum.Enum):
    STRICT_INTERIOR = 1
    ON_BOUNDARY = 0
    OUTSIDE = -1


def _as_integers(values: Sequence[float]) -> list[int]:
    """Scale doubles by a common power of two so they become exact integers."""
    ratios = [float(v).as_integer_ratio() for v in values]
    den = max(d for _, d in ratios)
    return [n * (den // d) for n, d in ratios]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def orient2d_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = _as_integers((ax, ay, bx, by, cx, cy))
    return _sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def orient2d(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the determinant of (b - a, c - a): +1 left turn, -1 right, 0 collinear."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > _CCW_ERRBOUND * detsum and detsum > _TINY:
        return 1 if det > 0 else -1
    return orient2d_exact(ax, ay, bx, by, cx, cy)


def incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = _as_integers((ax, ay, bx, by, cx, cy, dx, dy))
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return _sign(det)


def incircle(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    """Positive iff d lies inside the circle through a, b, c when a, b, c are CCW."""
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    if abs(det) > _ICC_ERRBOUND * permanent and permanent > _TINY:
        return 1 if det > 0 else -1
    return incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def orient2d_many(ax, ay, bx, by, cx, cy) -> np.ndarray:
    """Vectorised :func:`orient2d` over broadcast arrays; returns int8 signs."""
    ax, ay, bx, by, cx, cy = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (ax, ay, bx, by, cx, cy)))
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    detsum = np.abs(detleft) + np.abs(detright)
    out = np.sign(det).astype(np.int8)
    unsure = ~((np.abs(det) > _CCW_ERRBOUND * detsum) & (detsum > _TINY))
    for idx in zip(*np.nonzero(unsure)):
        out[idx] = orient2d_exact(ax[idx], ay[idx], bx[idx], by[idx], cx[idx], cy[idx])
    return out


def incircle_many(ax, ay, bx, by, cx, cy, dx, dy) -> np.ndarray:
    """Vectorised :func:`incircle` over broadcast arrays; returns int8 signs."""
    ax, ay, bx, by, cx, cy, dx, dy = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (ax, ay, bx, by, cx, cy, dx, dy)))
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((np.abs(bdxcdy) + np.abs(cdxbdy)) * alift
                 + (np.abs(cdxady) + np.abs(adxcdy)) * blift
                 + (np.abs(adxbdy) + np.abs(bdxady)) * clift)
    out = np.sign(det).astype(np.int8)
    unsure = ~((np.abs(det) > _ICC_ERRBOUND * permanent) & (permanent > _TINY))
    for idx in zip(*np.nonzero(unsure)):
        out[idx] = incircle_exact(ax[idx], ay[idx], bx[idx], by[idx],
                                  cx[idx], cy[idx], dx[idx], dy[idx])
    return out


def orientation(p, q, r) -> Orientation:
    return Orientation(orient2d(p[0], p[1], q[0], q[1], r[0], r[1]))


def in_circumcircle(tri, q) -> CirclePosition:
    """Classify q against the circle through the three vertices of ``tri``.

    The vertex order of ``tri`` does not matter.
    """
    a, b, c = tri
    o = orient2d(a[0], a[1], b[0], b[1], c[0], c[1])
    if o == 0:
        raise DegenerateTriangleError("collinear triangle has no circumcircle")
    s = incircle(a[0], a[1], b[0], b[1], c[0], c[1], q[0], q[1]) * o
    return CirclePosition(s)


def point_in_triangle(tri, q) -> TrianglePosition:
    a, b, c = tri
    if orient2d(a[0], a[1], b[0], b[1], c[0], c[1]) == 0:
        raise DegenerateTriangleError("collinear triangle")
    signs = [orient2d(u[0], u[1], v[0], v[1], q[0], q[1])
             for u, v in ((a, b), (b, c), (c, a))]
    if all(s > 0 for s in signs) or all(s < 0 for s in signs):
        return TrianglePosition.STRICT_INTERIOR
    nonzero = [s for s in signs if s != 0]
    if len(nonzero) < 3 and (all(s > 0 for s in nonzero) or all(s < 0 for s in nonzero)):
        # one or two zero tests with the rest agreeing means q is on an edge
        # segment or at a vertex
        return TrianglePosition.ON_BOUNDARY
    return TrianglePosition.OUTSIDE


def _monotone_chain(pts: np.ndarray, keep_collinear: bool) -> list[int]:
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))

    def turn(i, j, k):
        return orient2d(pts[i, 0], pts[i, 1], pts[j, 0], pts[j, 1], pts[k, 0], pts[k, 1])

    def half(seq):
        chain: list[int] = []
        for i in seq:
            while len(chain) >= 2:
                t = turn(chain[-2], chain[-1], i)
                if t < 0 or (t == 0 and not keep_collinear):
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(reversed(order))
    return lower[:-1] + upper[:-1]


def _check_hull_input(pts: np.ndarray) -> None:
    if len(pts) < 3:
        raise DegenerateTriangleError("convex hull needs at least 3 points")


def convex_hull(points) -> list[int]:
    """Counterclockwise hull vertex indices, collinear boundary points excluded.

    Starts at the lexicographically smallest point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    _check_hull_input(pts)
    hull = _monotone_chain(pts, keep_collinear=False)
    if len(hull) < 3:
        raise DegenerateTriangleError("all points are collinear")
    return hull


def hull_boundary(points) -> list[int]:
    """Counterclockwise cycle of every input point lying on the hull boundary.

    Points strictly inside a hull edge appear as vertices in their order
    along that edge, which splits the edge.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    hull = convex_hull(pts)
    m = len(hull)
    cycle: list[int] = []
    for t in range(m):
        u, v = hull[t], hull[(t + 1) % m]
        ux, uy, vx, vy = pts[u, 0], pts[u, 1], pts[v, 0], pts[v, 1]
        on_edge = []
        for i in range(len(pts)):
            if i in (u, v):
                continue
            if orient2d(ux, uy, vx, vy, pts[i, 0], pts[i, 1]) == 0 and _strictly_between(
                    pts[u], pts[v], pts[i]):
                on_edge.append(i)
        # exact parameter along the edge for ordering
        dx, dy = Fraction(vx) - Fraction(ux), Fraction(vy) - Fraction(uy)
        on_edge.sort(key=lambda i: (Fraction(pts[i, 0]) - Fraction(ux)) * dx
                     + (Fraction(pts[i, 1]) - Fraction(uy)) * dy)
        cycle.append(u)
        cycle.extend(on_edge)
    return cycle


def _strictly_between(u, v, q) -> bool:
    """q collinear with u, v assumed; true iff q lies strictly inside segment uv."""
    if u[0] != v[0]:
        lo, hi = sorted((u[0], v[0]))
        return lo < q[0] < hi
    lo, hi = sorted((u[1], v[1]))
    return lo < q[1] < hi


def hull_edges(points) -> list[tuple[int, int]]:
    """Directed CCW hull edges after splitting at collinear boundary points."""
    cycle = hull_boundary(points)
    return [(cycle[t], cycle[(t + 1) % len(cycle)]) for t in range(len(cycle))]


def strictly_inside_hull_many(points, qx, qy) -> np.ndarray:
    """Boolean mask of query points strictly inside conv(points)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    hull = convex_hull(pts)
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    inside = np.ones(qx.shape, dtype=bool)
    m = len(hull)
    for t in range(m):
        u, v = pts[hull[t]], pts[hull[(t + 1) % m]]
        cand = np.nonzero(inside)
        if not cand[0].size:
            break
        s = orient2d_many(u[0], u[1], v[0], v[1], qx[cand], qy[cand])
        inside[cand] = s > 0
    return inside
