"""Candidate triangles of min-error k-order Delaunay triangulations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .delaunay import Tri
from .geometry import (CirclePosition, DegenerateTriangleError, in_circumcircle,
                       incircle_many, orient2d_many)

UNBOUNDED = math.inf


def parse_order(text: str | int | float) -> float:
    """``'inf'`` (or inf) means unbounded; otherwise a non-negative integer."""
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "unbounded"):
        return UNBOUNDED
    value = float(text)
    if value == UNBOUNDED:
        return UNBOUNDED
    if value < 0 or not value.is_integer():
        raise ValueError(f"order bound must be a non-negative integer or 'inf', got {text!r}")
    return int(value)


def order_label(k: float) -> str:
    return "inf" if k == UNBOUNDED else str(int(k))


@dataclass(frozen=True)
class CandidateSet:
    triangles: tuple[Tri, ...]
    orders: np.ndarray

    def __len__(self):
        return len(self.triangles)

    def index(self) -> dict[Tri, int]:
        return {t: i for i, t in enumerate(self.triangles)}

    def restrict(self, k: float) -> "CandidateSet":
        keep = [i for i, o in enumerate(self.orders) if o <= k]
        return CandidateSet(tuple(self.triangles[i] for i in keep), self.orders[keep])


def order_of(tri: Tri, points) -> int:
    """Number of points strictly inside the circumcircle of ``tri``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    corners = tuple(pts[v] for v in tri)
    count = 0
    for v in range(len(pts)):
        if v in tri:
            continue
        if in_circumcircle(corners, pts[v]) == CirclePosition.INSIDE:
            count += 1
    return count


def _triples_info(pts: np.ndarray, triples: np.ndarray):
    """Return (keep mask, orders) for a block of vertex triples."""
    n = len(pts)
    A, B, C = (pts[triples[:, s]] for s in range(3))
    o = orient2d_many(A[:, 0], A[:, 1], B[:, 0], B[:, 1], C[:, 0], C[:, 1])
    keep = o != 0
    # orient every triangle counterclockwise
    swap = o < 0
    B2 = np.where(swap[:, None], C, B)
    C2 = np.where(swap[:, None], B, C)
    qx, qy = pts[None, :, 0], pts[None, :, 1]
    is_vertex = np.zeros((len(triples), n), dtype=bool)
    rows = np.arange(len(triples))
    for s in range(3):
        is_vertex[rows, triples[:, s]] = True

    def side(U, V):
        return orient2d_many(U[:, 0:1], U[:, 1:2], V[:, 0:1], V[:, 1:2], qx, qy)

    s1, s2, s3 = side(A, B2), side(B2, C2), side(C2, A)
    closed = (s1 >= 0) & (s2 >= 0) & (s3 >= 0) & ~is_vertex
    keep &= ~closed.any(axis=1)
    ic = incircle_many(A[:, 0:1], A[:, 1:2], B2[:, 0:1], B2[:, 1:2],
                       C2[:, 0:1], C2[:, 1:2], qx, qy)
    orders = ((ic > 0) & ~is_vertex).sum(axis=1)
    return keep, orders


def enumerate_candidates(points, bound: float = UNBOUNDED, block: int = 4096) -> CandidateSet:
    """All empty, non-degenerate vertex triples whose order is at most ``bound``.

    A triple is empty when no other point lies in its closed triangle, which
    excludes points strictly inside an edge as well.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 3:
        raise DegenerateTriangleError("need at least 3 points")
    all_triples = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    tris, orders = [], []
    for start in range(0, len(all_triples), block):
        chunk = all_triples[start:start + block]
        keep, ords = _triples_info(pts, chunk)
        keep &= ords <= bound
        tris.extend(tuple(int(v) for v in t) for t in chunk[keep])
        orders.extend(int(v) for v in ords[keep])
    if not tris and bound == UNBOUNDED:
        raise DegenerateTriangleError("all points are collinear")
    return CandidateSet(tuple(tris), np.array(orders, dtype=np.int64))

