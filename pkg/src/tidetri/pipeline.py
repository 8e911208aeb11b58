"""Learning triangulations on common-station subsets and evaluating them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .candidates import UNBOUNDED, CandidateSet, enumerate_candidates
from .cost import (SQUARED, CellAssigner, CostTable, ErrorMetric, RegionMask, cost_table,
                   get_metric, project_cell_centers)
from .delaunay import Triangulation, delaunay
from .evaluate import PairResult, variance
from .ilp import IlpModel, IlpSolution, build_model, solve
from .ingest import (GaugeRecord, ProjectionSpec, RasterGrid, StationSet, anchor_gauges,
                     availability_filter, common_stations, default_projection, epoch_range,
                     epoch_to_month, make_stations, month_to_epoch, read_gauges, read_grids,
                     read_projection, read_station_table)
from .reconstruct import ReconstructionGrid, transfer_and_rasterize

log = logging.getLogger(__name__)

MIN_ERROR = "min-error"
DELAUNAY = "delaunay"


@dataclass(frozen=True)
class Dataset:
    """Stations, gauge record (rows follow ``stations.ids``) and grids by epoch."""

    stations: StationSet
    gauges: GaugeRecord
    grids: dict[str, RasterGrid]
    projection: ProjectionSpec
    mask: RegionMask = field(default_factory=RegionMask)

    def __post_init__(self):
        if tuple(self.gauges.station_ids) != tuple(self.stations.ids):
            raise ValueError("gauge rows must follow the station order")
        grids = list(self.grids.values())
        for g in grids[1:]:
            if not g.same_geometry(grids[0]):
                raise ValueError("all grids must share one geometry")
        for e in self.grids:
            if e not in self.gauges.epochs:
                raise ValueError(f"grid epoch {e} lies outside the gauge epoch axis")

    @property
    def epochs(self) -> tuple[str, ...]:
        return self.gauges.epochs

    def grid_at(self, e: int) -> RasterGrid | None:
        return self.grids.get(self.epochs[e])

    def grid_indices(self) -> list[int]:
        return [self.gauges.epoch_index(e) for e in self.grids]


def load_dataset(stations_path, gauges_path, grids_dir, projection_path=None,
                 threshold: float = 0.7, anchor: bool = True) -> Dataset:
    """Read the input files and apply the availability filter and anchoring.

    The epoch axis spans both the gauge file and the grids.
    """
    ids, lon, lat = read_station_table(stations_path)
    spec = read_projection(projection_path) if projection_path else default_projection(lon, lat)
    grids = read_grids(grids_dir) if grids_dir else {}
    probe = read_gauges(gauges_path, station_ids=ids)
    months = [epoch_to_month(e) for e in (*probe.epochs, *grids)]
    axis = epoch_range(month_to_epoch(min(months)), month_to_epoch(max(months)))
    rec = read_gauges(gauges_path, station_ids=ids, epochs=axis)
    keep = availability_filter(rec, threshold)
    dropped = len(ids) - len(keep)
    if dropped:
        log.info("availability filter removed %d of %d stations", dropped, len(ids))
    rec = rec.select(keep)
    stations = make_stations(ids, lon, lat, spec)
    if anchor and grids:
        rec = anchor_gauges(rec, grids, stations, spec)
    stations = stations.subset([stations.index(s) for s in rec.station_ids])
    return Dataset(stations, rec, grids, spec)


@dataclass
class Learned:
    """Optimal and Delaunay triangulations of one station subset at one epoch.

    Triangulations use local indices into ``subset``; :meth:`global_` maps
    them to station indices.
    """

    epoch: int
    subset: tuple[int, ...]
    candidates: CandidateSet
    costs: CostTable
    model: IlpModel
    solution: IlpSolution
    delaunay: Triangulation
    delaunay_cost: float

    @property
    def min_error(self) -> Triangulation:
        return self.solution.triangulation()

    @property
    def objective(self) -> float:
        return self.solution.objective

    def global_(self, tri: Triangulation) -> Triangulation:
        return tri.relabel(self.subset)


class Pipeline:
    """Caches candidate sets, costs and solutions per (epoch, station subset)."""

    def __init__(self, data: Dataset, k: float = UNBOUNDED, metric: ErrorMetric | str = SQUARED):
        self.data = data
        self.k = k
        self.metric = get_metric(metric)
        self._centres = None
        self._learned: dict[tuple[int, tuple[int, ...]], Learned] = {}
        self._assigners: dict[tuple[tuple[int, ...], bytes], CellAssigner] = {}
        self._candidates: dict[tuple[int, ...], CandidateSet] = {}

    def centres(self) -> tuple[np.ndarray, np.ndarray]:
        if self._centres is None:
            if not self.data.grids:
                raise ValueError("no grids loaded")
            template = next(iter(self.data.grids.values()))
            self._centres = project_cell_centers(template, self.data.projection)
        return self._centres

    def template(self) -> RasterGrid:
        return next(iter(self.data.grids.values()))

    def points(self, subset) -> np.ndarray:
        return self.data.stations.xy[list(subset)]

    def subset(self, i: int, j: int) -> tuple[int, ...]:
        return common_stations(self.data.gauges, i, j)

    def assigner(self, subset, grid: RasterGrid) -> CellAssigner:
        key = (tuple(subset), np.packbits(grid.valid).tobytes())
        hit = self._assigners.get(key)
        if hit is None:
            cx, cy = self.centres()
            hit = CellAssigner.for_grid(self.points(subset), grid, cx, cy, self.data.mask)
            self._assigners[key] = hit
        return hit

    def values(self, subset, e: int) -> np.ndarray:
        return self.data.gauges.at(e)[list(subset)]

    def learn(self, i: int, subset) -> Learned:
        subset = tuple(subset)
        key = (i, subset)
        hit = self._learned.get(key)
        if hit is not None:
            return hit
        grid = self.data.grid_at(i)
        if grid is None:
            raise ValueError(f"no grid for training epoch {self.data.epochs[i]}")
        pts = self.points(subset)
        cands = self._candidates.get(subset)
        if cands is None:
            cands = self._candidates[subset] = enumerate_candidates(pts, self.k)
        assigner = self.assigner(subset, grid)
        table = cost_table(cands.triangles, self.values(subset, i), grid, self.metric, assigner)
        model = build_model(cands, table, pts)
        sol = solve(model, pts)
        tri_d = delaunay(pts)
        d_cost = model.objective(model.start) if model.start else table.total(
            [cands.index()[t] for t in tri_d.triangles])
        hit = Learned(i, subset, cands, table, model, sol, tri_d, d_cost)
        self._learned[key] = hit
        return hit

    def evaluate_pair(self, i: int, j: int) -> PairResult:
        """Variances at ``j`` of both triangulations learned at ``i`` on P_ij."""
        grid = self.data.grid_at(j)
        if grid is None:
            raise ValueError(f"no grid for reconstruction epoch {self.data.epochs[j]}")
        subset = self.subset(i, j)
        lrn = self.learn(i, subset)
        assigner = self.assigner(subset, grid)
        h = self.values(subset, j)
        v_me = variance(lrn.min_error, h, grid, self.metric, assigner)
        v_d = variance(lrn.delaunay, h, grid, self.metric, assigner)
        return PairResult(i, j, self.k, v_me.value, v_d.value, v_me.count)

    def reconstruct(self, i: int, j: int, method: str = MIN_ERROR,
                    triangulation_path: str | None = None) -> ReconstructionGrid:
        subset = self.subset(i, j)
        lrn = self.learn(i, subset)
        tri = lrn.min_error if method == MIN_ERROR else lrn.delaunay
        obj = lrn.objective if method == MIN_ERROR else lrn.delaunay_cost
        # before the grid record starts, the training grid supplies the data mask
        template = self.data.grid_at(j)
        if template is None:
            template = self.data.grid_at(i)
        assigner = self.assigner(subset, template)
        return transfer_and_rasterize(tri, self.values(subset, j), template, assigner,
                                      self.data.epochs[i], self.data.epochs[j], self.k,
                                      method=method, objective=obj,
                                      triangulation_path=triangulation_path)


def training_epoch(data: Dataset, j: int, min_lag: int = 0) -> int | None:
    """Whole-year training epoch for ``j``: the nearest later grid epoch
    ``j + 12K`` (K >= min_lag), else the nearest earlier one."""
    have = set(data.grid_indices())
    later = [j + 12 * K for K in range(min_lag, len(data.epochs) // 12 + 1)]
    for i in later:
        if i in have and _enough(data, i, j):
            return i
    for K in range(max(min_lag, 1), len(data.epochs) // 12 + 1):
        i = j - 12 * K
        if i in have and _enough(data, i, j):
            return i
    return None


def _enough(data: Dataset, i: int, j: int) -> bool:
    both = data.gauges.observed(i) & data.gauges.observed(j)
    return int(both.sum()) >= 3

