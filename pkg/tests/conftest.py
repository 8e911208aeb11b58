"""Shared fixture builders: small planar instances on a synthetic raster."""

import math
from pathlib import Path

import numpy as np
import pytest

from tidetri.candidates import enumerate_candidates
from tidetri.cost import SQUARED, CellAssigner, cost_table
from tidetri.ilp import build_model, solve
from tidetri.ingest import RasterGrid

DATA = Path(__file__).parent / "data"

# raster over [0, 1] x [0, 1] in "degrees"; planar tests scale centres to metres
GRID_CELLS = 40
SCALE = 1000.0


def planar_grid(values=None, cells=GRID_CELLS):
    """Raster plus its cell centres scaled to [0, SCALE]^2 planar coordinates."""
    g = RasterGrid(0.0, 0.0, 1.0 / cells, 1.0 / cells, np.zeros((cells, cells)))
    lon, lat = g.cell_centers()
    cx, cy = lon * SCALE, lat * SCALE
    if values is not None:
        g = g.with_values(values(cx, cy))
    return g, cx, cy


def bump_surface(rng):
    """Random plane plus one Gaussian bump, as a vectorised function of (x, y)."""
    gx, gy = rng.normal(0, 0.02, size=2)
    bx, by = rng.random(2) * SCALE
    amp = rng.uniform(10, 40)

    def f(x, y):
        return gx * x + gy * y + amp * np.exp(-((x - bx) ** 2 + (y - by) ** 2) / 2e4)
    return f


class Instance:
    """Points, station values and reference grid for one planar fixture."""

    def __init__(self, points, h, grid, cx, cy):
        self.points = points
        self.h = h
        self.grid = grid
        self.cx = cx
        self.cy = cy
        self.assigner = CellAssigner.for_grid(points, grid, cx, cy)

    def solve(self, k=math.inf, metric=SQUARED):
        cands = enumerate_candidates(self.points, k)
        table = cost_table(cands.triangles, self.h, self.grid, metric, self.assigner)
        model = build_model(cands, table, self.points)
        return model, solve(model, self.points)


def random_instance(rng, n, noise=1.0, cells=GRID_CELLS):
    f = bump_surface(rng)
    grid, cx, cy = planar_grid(f, cells)
    pts = rng.random((n, 2)) * SCALE
    h = f(pts[:, 0], pts[:, 1]) + rng.normal(0, noise, n)
    return Instance(pts, h, grid, cx, cy)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
