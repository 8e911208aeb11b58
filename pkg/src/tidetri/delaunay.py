"""Delaunay triangulation and the shared :class:`Triangulation` container."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import (DegenerateTriangleError, TrianglePosition, convex_hull,
                       hull_boundary, hull_edges, incircle, orient2d, point_in_triangle)

Tri = tuple[int, int, int]


def canonical(tri: Iterable[int]) -> Tri:
    a, b, c = sorted(int(v) for v in tri)
    if a == b or b == c:
        raise ValueError(f"triangle {tri} repeats a vertex")
    return (a, b, c)


@dataclass(frozen=True)
class Triangulation:
    """Canonical triangle triples over the rows of a point array."""

    triangles: tuple[Tri, ...]

    @classmethod
    def from_triangles(cls, tris: Iterable[Iterable[int]]) -> "Triangulation":
        return cls(tuple(sorted({canonical(t) for t in tris})))

    def __len__(self):
        return len(self.triangles)

    def __iter__(self):
        return iter(self.triangles)

    def edge_map(self) -> dict[tuple[int, int], list[Tri]]:
        edges: dict[tuple[int, int], list[Tri]] = defaultdict(list)
        for t in self.triangles:
            a, b, c = t
            for e in ((a, b), (a, c), (b, c)):
                edges[e].append(t)
        return dict(edges)

    def relabel(self, mapping: Sequence[int]) -> "Triangulation":
        """Map local vertex indices through ``mapping`` (e.g. to station indices)."""
        return Triangulation.from_triangles(
            tuple(mapping[v] for v in t) for t in self.triangles)


def _area2(p, q, r) -> Fraction:
    p = [Fraction(v) for v in p]
    q = [Fraction(v) for v in q]
    r = [Fraction(v) for v in r]
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def validate_triangulation(points, tri: Triangulation | Iterable[Tri]) -> list[str]:
    """Return violated triangulation invariants (empty list when valid).

    Checks use exact arithmetic: each hull edge bounds one triangle, each
    other edge two triangles on opposite sides, no point lies inside a
    triangle or edge, and the triangle areas sum to the hull area.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not isinstance(tri, Triangulation):
        tri = Triangulation.from_triangles(tri)
    problems = []
    for t in tri.triangles:
        a, b, c = (pts[v] for v in t)
        if orient2d(*a, *b, *c) == 0:
            problems.append(f"triangle {t} is degenerate")
            continue
        for v in range(len(pts)):
            if v in t:
                continue
            if point_in_triangle((a, b, c), pts[v]) != TrianglePosition.OUTSIDE:
                problems.append(f"point {v} lies in the closed triangle {t}")
    if problems:
        return problems
    hull_set = {tuple(sorted(e)) for e in hull_edges(pts)}
    for (u, v), inc in tri.edge_map().items():
        if (u, v) in hull_set:
            if len(inc) != 1:
                problems.append(f"hull edge {(u, v)} has {len(inc)} triangles")
        else:
            if len(inc) != 2:
                problems.append(f"interior edge {(u, v)} has {len(inc)} triangles")
                continue
            w1 = [w for w in inc[0] if w not in (u, v)][0]
            w2 = [w for w in inc[1] if w not in (u, v)][0]
            s1 = orient2d(*pts[u], *pts[v], *pts[w1])
            s2 = orient2d(*pts[u], *pts[v], *pts[w2])
            if s1 == s2:
                problems.append(f"edge {(u, v)} has both triangles on one side")
    covered = {tuple(sorted(e)) for e in tri.edge_map()}
    for e in hull_set - covered:
        problems.append(f"hull edge {e} is not covered")
    hull = convex_hull(pts)
    hull_area = sum(_area2(pts[hull[0]], pts[hull[t]], pts[hull[t + 1]])
                    for t in range(1, len(hull) - 1))
    tri_area = sum(abs(_area2(*(pts[v] for v in t))) for t in tri.triangles)
    if hull_area != tri_area:
        problems.append("triangle areas do not sum to the hull area")
    return problems


# ---------------------------------------------------------------- construction

class _Mesh:
    """Directed-edge map: (u, v) -> third vertex w of the CCW triangle (u, v, w)."""

    def __init__(self, pts: np.ndarray):
        self.pts = pts
        self.left: dict[tuple[int, int], int] = {}

    def add(self, a, b, c):
        if orient2d(*self.pts[a], *self.pts[b], *self.pts[c]) < 0:
            b, c = c, b
        self.left[(a, b)] = c
        self.left[(b, c)] = a
        self.left[(c, a)] = b

    def remove(self, a, b, c):
        for e in ((a, b), (b, c), (c, a)):
            del self.left[e]

    def triangles(self) -> set[Tri]:
        return {canonical((u, v, w)) for (u, v), w in self.left.items()}


def _sweep_triangulation(pts: np.ndarray) -> _Mesh:
    n = len(pts)
    order = sorted(range(n), key=lambda i: (pts[i, 0], pts[i, 1]))
    a, b = order[0], order[1]
    k = 2
    while k < n and orient2d(*pts[a], *pts[b], *pts[order[k]]) == 0:
        k += 1
    if k == n:
        raise DegenerateTriangleError("all points are collinear")
    chain, c = order[:k], order[k]
    mesh = _Mesh(pts)
    for u, v in zip(chain, chain[1:]):
        mesh.add(u, v, c)
    if orient2d(*pts[a], *pts[b], *pts[c]) > 0:
        hull = chain + [c]
    else:
        hull = [a, c] + chain[:0:-1]
    for p in order[k + 1:]:
        m = len(hull)
        vis = [orient2d(*pts[hull[t]], *pts[hull[(t + 1) % m]], *pts[p]) < 0 for t in range(m)]
        t0 = next(t for t in range(m) if vis[t] and not vis[t - 1])
        h = hull[t0:] + hull[:t0]
        vis = vis[t0:] + vis[:t0]
        r = 0
        while r < m and vis[r]:
            r += 1
        for t in range(r):
            mesh.add(h[t + 1], h[t], p)
        hull = [h[0], p] + h[r:]
    return mesh


def _lawson_flip(mesh: _Mesh) -> None:
    pts = mesh.pts
    stack = list(mesh.left)
    while stack:
        u, v = stack.pop()
        if (u, v) not in mesh.left or (v, u) not in mesh.left:
            continue
        w, z = mesh.left[(u, v)], mesh.left[(v, u)]
        if incircle(*pts[u], *pts[v], *pts[w], *pts[z]) > 0:
            mesh.remove(u, v, w)
            mesh.remove(v, u, z)
            mesh.add(u, z, w)
            mesh.add(z, v, w)
            stack.extend([(u, z), (z, v), (v, w), (w, u)])


def _canonical_cocircular(mesh: _Mesh) -> set[Tri]:
    """Refan every cocircular face from its lowest-index vertex."""
    pts = mesh.pts
    tris = sorted(mesh.triangles())
    parent = {t: t for t in tris}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for (u, v), w in mesh.left.items():
        if u < v and (v, u) in mesh.left:
            z = mesh.left[(v, u)]
            if incircle(*pts[u], *pts[v], *pts[w], *pts[z]) == 0:
                a, b = find(canonical((u, v, w))), find(canonical((v, u, z)))
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[Tri, list[Tri]] = defaultdict(list)
    for t in tris:
        groups[find(t)].append(t)
    out: set[Tri] = set()
    for members in groups.values():
        if len(members) == 1:
            out.add(members[0])
            continue
        directed = set()
        for t in members:
            a, b, c = t
            if orient2d(*pts[a], *pts[b], *pts[c]) < 0:
                b, c = c, b
            directed |= {(a, b), (b, c), (c, a)}
        boundary = {u: v for (u, v) in directed if (v, u) not in directed}
        start = min(boundary)
        cycle = [start]
        while boundary[cycle[-1]] != start:
            cycle.append(boundary[cycle[-1]])
        for s in range(1, len(cycle) - 1):
            out.add(canonical((start, cycle[s], cycle[s + 1])))
    return out


def delaunay(points) -> Triangulation:
    """Delaunay triangulation of an (n, 2) point array.

    Faces with four or more cocircular vertices are fanned from their
    lowest-index vertex, so the output is unique for any input.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateTriangleError("need at least 3 points")
    if len({(float(x), float(y)) for x, y in pts}) != len(pts):
        raise ValueError("duplicate points")
    mesh = _sweep_triangulation(pts)
    _lawson_flip(mesh)
    return Triangulation.from_triangles(_canonical_cocircular(mesh))


# ---------------------------------------------------------------- file format

def write_triangulation(tri: Triangulation, path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(f"n_triangles {len(tri)}")
    lines.extend(f"{a} {b} {c}" for a, b, c in tri.triangles)
    Path(path).write_text("\n".join(lines) + "\n")


def read_triangulation(path) -> tuple[Triangulation, dict[str, str]]:
    """Return the triangulation and any ``# key value`` comment fields."""
    meta: dict[str, str] = {}
    tris = []
    count = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            meta[key] = value.strip()
            continue
        if count is None:
            key, value = line.split()
            if key != "n_triangles":
                raise ValueError(f"{path}: expected 'n_triangles' header")
            count = int(value)
            continue
        tris.append(tuple(int(v) for v in line.split()))
    if count is None or count != len(tris):
        raise ValueError(f"{path}: triangle count does not match header")
    return Triangulation.from_triangles(tris), meta


def euler_triangle_count(points) -> int:
    """2(n - 1) - h, h counting every point on the hull boundary."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return 2 * (len(pts) - 1) - len(hull_boundary(pts))

