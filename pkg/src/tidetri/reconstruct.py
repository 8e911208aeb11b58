"""Evaluate a triangulated surface at another epoch and rasterize it."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .candidates import order_label
from .cost import CellAssigner, plane_value
from .delaunay import Triangulation
from .ingest import RasterGrid, fmt_num, write_grid


@dataclass(frozen=True)
class ReconstructionGrid:
    """Interpolated surface on the template geometry, with its provenance."""

    grid: RasterGrid
    training_epoch: str
    epoch: str
    k: float
    method: str = "min-error"
    objective: float | None = None
    triangulation_path: str | None = None

    def metadata(self) -> list[tuple[str, str]]:
        rows = [("training_epoch", self.training_epoch), ("epoch", self.epoch),
                ("k", order_label(self.k)), ("method", self.method)]
        if self.objective is not None:
            rows.append(("objective", fmt_num(self.objective)))
        if self.triangulation_path is not None:
            rows.append(("triangulation", self.triangulation_path))
        return rows


def rasterize(tri: Triangulation, h, assigner: CellAssigner, size: int) -> np.ndarray:
    """Flat array of interpolated values; NaN on cells no triangle owns."""
    h = np.asarray(h, dtype=float)
    used = sorted({v for t in tri.triangles for v in t})
    missing = [v for v in used if np.isnan(h[v])]
    if missing:
        raise ValueError(f"triangulation vertices {missing} have no value at this epoch")
    out = np.full(size, np.nan)
    pts = assigner.points
    for t in tri.triangles:
        cells = assigner.cells_of(t)
        if len(cells):
            out[cells] = plane_value(pts[list(t)], h[list(t)],
                                     assigner.cx[cells], assigner.cy[cells])
    return out


def transfer_and_rasterize(tri: Triangulation, h, template: RasterGrid, assigner: CellAssigner,
                           training_epoch: str, epoch: str, k: float, **info) -> ReconstructionGrid:
    """Rebuild the surface at ``epoch`` from station values ``h`` (indexed like
    the assigner's points) using a triangulation learned at ``training_epoch``."""
    flat = rasterize(tri, h, assigner, template.size)
    return ReconstructionGrid(template.with_values(flat, epoch), training_epoch, epoch, k, **info)


def write_reconstruction(rec: ReconstructionGrid, path) -> Path:
    """Write the grid and a ``.meta`` sidecar of ``key = value`` lines."""
    path = Path(path)
    write_grid(rec.grid, path)
    meta = path.with_suffix(".meta")
    meta.write_text("".join(f"{k} = {v}\n" for k, v in rec.metadata()))
    return meta
