"""Station, tide-gauge and raster loading, preprocessing and projection."""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563

_EPOCH_RE = re.compile(r"(\d{4})-(\d{2})")


class InsufficientStationsError(ValueError):
    pass


# ---------------------------------------------------------------- epochs

def epoch_to_month(label: str) -> int:
    m = _EPOCH_RE.fullmatch(label.strip())
    if not m:
        raise ValueError(f"bad epoch label {label!r}, expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise ValueError(f"bad month in epoch label {label!r}")
    return year * 12 + month - 1


def month_to_epoch(month: int) -> str:
    return f"{month // 12:04d}-{month % 12 + 1:02d}"


def epoch_range(first: str, last: str) -> list[str]:
    a, b = epoch_to_month(first), epoch_to_month(last)
    if b < a:
        raise ValueError(f"epoch range {first}..{last} is empty")
    return [month_to_epoch(m) for m in range(a, b + 1)]


def decimal_year(label: str) -> float:
    """Mid-month time stamp in years."""
    m = epoch_to_month(label)
    return m // 12 + (m % 12 + 0.5) / 12.0


def fmt_num(v: float) -> str:
    """Shortest text that parses back to the same double; integral values lose the '.0'."""
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


# ---------------------------------------------------------------- projection

@dataclass(frozen=True)
class ProjectionSpec:
    standard_parallel_1: float
    standard_parallel_2: float
    reference_lon: float
    reference_lat: float
    semi_major_axis: float = WGS84_A
    flattening: float = WGS84_F

    def __post_init__(self):
        p1, p2 = self.standard_parallel_1, self.standard_parallel_2
        if p1 == p2:
            raise ValueError("standard parallels must be distinct")
        for p in (p1, p2):
            if not -90.0 < p < 90.0:
                raise ValueError(f"standard parallel {p} outside (-90, 90)")
        if p1 == -p2:
            raise ValueError("standard parallels symmetric about the equator give no cone")


_PROJ_KEYS = ("standard_parallel_1", "standard_parallel_2", "reference_lon",
              "reference_lat", "semi_major_axis", "flattening")


def read_projection(path) -> ProjectionSpec:
    """Read ``key = value`` lines; '#' starts a comment."""
    kv = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _PROJ_KEYS:
            raise ValueError(f"unknown projection key {key!r}")
        kv[key] = float(value)
    return ProjectionSpec(**kv)


def write_projection(spec: ProjectionSpec, path) -> None:
    lines = [f"{k} = {fmt_num(getattr(spec, k))}" for k in _PROJ_KEYS]
    Path(path).write_text("\n".join(lines) + "\n")


def default_projection(lon: Sequence[float], lat: Sequence[float]) -> ProjectionSpec:
    """Parallels at the quarter and three-quarter latitudes of the bounding box,
    reference at its centre."""
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    lat_lo, lat_hi = float(lat.min()), float(lat.max())
    span = lat_hi - lat_lo
    if span < 1e-6:
        p1, p2 = lat_lo - 1.0, lat_lo + 1.0
    else:
        p1, p2 = lat_lo + 0.25 * span, lat_lo + 0.75 * span
    if p1 == -p2:
        p2 += 1e-3
    return ProjectionSpec(p1, p2, 0.5 * (float(lon.min()) + float(lon.max())),
                          0.5 * (lat_lo + lat_hi))


class LambertConformalConic:
    """Two-parallel ellipsoidal Lambert Conformal Conic (Snyder, USGS PP 1395)."""

    def __init__(self, spec: ProjectionSpec):
        self.spec = spec
        self.a = spec.semi_major_axis
        f = spec.flattening
        self.e = math.sqrt(f * (2.0 - f))
        phi1 = math.radians(spec.standard_parallel_1)
        phi2 = math.radians(spec.standard_parallel_2)
        phi0 = math.radians(spec.reference_lat)
        self.lam0 = math.radians(spec.reference_lon)
        m1, m2 = self._m(phi1), self._m(phi2)
        t1, t2, t0 = self._t(phi1), self._t(phi2), self._t(phi0)
        self.n = (math.log(m1) - math.log(m2)) / (math.log(t1) - math.log(t2))
        self.F = m1 / (self.n * t1 ** self.n)
        self.rho0 = self.a * self.F * t0 ** self.n

    def _m(self, phi):
        s = np.sin(phi)
        return np.cos(phi) / np.sqrt(1.0 - self.e ** 2 * s * s)

    def _t(self, phi):
        s = np.sin(phi)
        e = self.e
        return np.tan(np.pi / 4 - phi / 2) / ((1 - e * s) / (1 + e * s)) ** (e / 2)

    def forward(self, lon, lat):
        lon = np.asarray(lon, dtype=float)
        lat = np.asarray(lat, dtype=float)
        if np.any(np.abs(lat) >= 90.0):
            raise ValueError("latitude at or beyond a pole cannot be projected")
        phi = np.radians(lat)
        rho = self.a * self.F * self._t(phi) ** self.n
        dlam = np.radians(lon) - self.lam0
        dlam = (dlam + np.pi) % (2 * np.pi) - np.pi
        theta = self.n * dlam
        x = rho * np.sin(theta)
        y = self.rho0 - rho * np.cos(theta)
        return x, y

    def inverse(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sgn = 1.0 if self.n > 0 else -1.0
        dy = self.rho0 - y
        rho = sgn * np.hypot(x, dy)
        t = (rho / (self.a * self.F)) ** (1.0 / self.n)
        theta = np.arctan2(sgn * x, sgn * dy)
        lon = np.degrees(theta / self.n + self.lam0)
        e = self.e
        phi = np.pi / 2 - 2 * np.arctan(t)
        for _ in range(50):
            s = np.sin(phi)
            nxt = np.pi / 2 - 2 * np.arctan(t * ((1 - e * s) / (1 + e * s)) ** (e / 2))
            done = np.max(np.abs(nxt - phi)) < 1e-15
            phi = nxt
            if done:
                break
        lon = (lon + 180.0) % 360.0 - 180.0
        return lon, np.degrees(phi)


def project(spec: ProjectionSpec, lon, lat):
    """Forward LCC mapping of degrees to metres; scalars give a (x, y) pair of floats."""
    x, y = LambertConformalConic(spec).forward(lon, lat)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


# ---------------------------------------------------------------- stations

@dataclass(frozen=True)
class StationSet:
    ids: tuple[str, ...]
    lon: np.ndarray
    lat: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("station ids must be unique")
        pairs = set(zip(self.x.tolist(), self.y.tolist()))
        if len(pairs) != len(self.ids):
            raise ValueError("two stations share identical projected coordinates")

    def __len__(self):
        return len(self.ids)

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def subset(self, indices: Iterable[int]) -> "StationSet":
        idx = list(indices)
        return StationSet(tuple(self.ids[i] for i in idx), self.lon[idx], self.lat[idx],
                          self.x[idx], self.y[idx])

    def index(self, station_id: str) -> int:
        return self.ids.index(station_id)


def make_stations(ids, lon, lat, spec: ProjectionSpec | None = None) -> StationSet:
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    if spec is None:
        spec = default_projection(lon, lat)
    x, y = LambertConformalConic(spec).forward(lon, lat)
    return StationSet(tuple(ids), lon, lat, np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def read_station_table(path) -> tuple[list[str], list[float], list[float]]:
    ids, lon, lat = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["id", "lon", "lat"]:
            raise ValueError(f"{path}: expected header id,lon,lat")
        for row in reader:
            ids.append(row["id"])
            lon.append(float(row["lon"]))
            lat.append(float(row["lat"]))
    return ids, lon, lat


def load_stations(path, spec: ProjectionSpec | None = None) -> StationSet:
    ids, lon, lat = read_station_table(path)
    return make_stations(ids, lon, lat, spec)


def write_stations(stations: StationSet, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("id,lon,lat\n")
        for sid, lo, la in zip(stations.ids, stations.lon, stations.lat):
            fh.write(f"{sid},{fmt_num(lo)},{fmt_num(la)}\n")


# ---------------------------------------------------------------- gauges

@dataclass(frozen=True)
class GaugeRecord:
    """Monthly station values in cm; NaN marks a missing month.

    ``values`` has one row per station (in ``station_ids`` order) and one
    column per epoch of the contiguous monthly axis ``epochs``.
    """

    station_ids: tuple[str, ...]
    epochs: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.station_ids), len(self.epochs)):
            raise ValueError("value matrix does not match stations x epochs")

    @property
    def n_epochs(self) -> int:
        return len(self.epochs)

    def epoch_index(self, label: str) -> int:
        return self.epochs.index(label)

    def observed(self, epoch: int) -> np.ndarray:
        return ~np.isnan(self.values[:, epoch])

    def at(self, epoch: int) -> np.ndarray:
        return self.values[:, epoch]

    def select(self, station_ids: Sequence[str]) -> "GaugeRecord":
        rows = [self.station_ids.index(s) for s in station_ids]
        return replace(self, station_ids=tuple(station_ids), values=self.values[rows])


def read_gauges(path, station_ids: Sequence[str] | None = None,
                epochs: Sequence[str] | None = None) -> GaugeRecord:
    """Read ``station_id,epoch,value_cm`` rows.

    The epoch axis is the contiguous monthly span of the file unless given.
    When ``station_ids`` is given the record rows follow that order and
    stations without rows are entirely missing.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["station_id", "epoch", "value_cm"]:
            raise ValueError(f"{path}: expected header station_id,epoch,value_cm")
        for row in reader:
            rows.append((row["station_id"], row["epoch"].strip(), float(row["value_cm"])))
    if station_ids is None:
        station_ids = list(dict.fromkeys(r[0] for r in rows))
    if epochs is None:
        months = [epoch_to_month(r[1]) for r in rows]
        if not months:
            raise ValueError(f"{path}: no gauge rows")
        epochs = [month_to_epoch(m) for m in range(min(months), max(months) + 1)]
    sidx = {s: i for i, s in enumerate(station_ids)}
    eidx = {e: j for j, e in enumerate(epochs)}
    values = np.full((len(station_ids), len(epochs)), np.nan)
    for sid, ep, v in rows:
        if sid not in sidx:
            raise ValueError(f"{path}: gauge row for unknown station {sid!r}")
        if ep in eidx:
            values[sidx[sid], eidx[ep]] = v
    return GaugeRecord(tuple(station_ids), tuple(epochs), values)


def write_gauges(rec: GaugeRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("station_id,epoch,value_cm\n")
        for s, sid in enumerate(rec.station_ids):
            for j, ep in enumerate(rec.epochs):
                fh.write(f"{sid},{ep},{fmt_num(rec.values[s, j])}\n")


# ---------------------------------------------------------------- grids

_GRID_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize_lon",
              "cellsize_lat", "nodata_value")


@dataclass(frozen=True)
class RasterGrid:
    """Regular lon/lat raster. ``values[0]`` is the northernmost row."""

    xllcorner: float
    yllcorner: float
    cellsize_lon: float
    cellsize_lat: float
    values: np.ndarray
    nodata_value: float = -9999.0
    epoch: str | None = None

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("grid values must be 2-D")
        if self.cellsize_lon <= 0 or self.cellsize_lat <= 0:
            raise ValueError("cell sizes must be positive")

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    @property
    def size(self) -> int:
        return self.values.size

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened row-major (north row first) centre longitudes and latitudes."""
        cols = np.arange(self.ncols)
        rows = np.arange(self.nrows)
        lon = self.xllcorner + (cols + 0.5) * self.cellsize_lon
        lat = self.yllcorner + (self.nrows - 1 - rows + 0.5) * self.cellsize_lat
        lon2, lat2 = np.meshgrid(lon, lat)
        return lon2.ravel(), lat2.ravel()

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @property
    def valid(self) -> np.ndarray:
        """Flattened mask of cells holding data."""
        v = self.flat
        return (v != self.nodata_value) & ~np.isnan(v)

    def same_geometry(self, other: "RasterGrid") -> bool:
        return (self.values.shape == other.values.shape
                and self.xllcorner == other.xllcorner and self.yllcorner == other.yllcorner
                and self.cellsize_lon == other.cellsize_lon
                and self.cellsize_lat == other.cellsize_lat)

    def with_values(self, flat_values: np.ndarray, epoch: str | None = None) -> "RasterGrid":
        vals = np.asarray(flat_values, dtype=float).reshape(self.values.shape)
        vals = np.where(np.isnan(vals), self.nodata_value, vals)
        return replace(self, values=vals, epoch=self.epoch if epoch is None else epoch)


def read_grid(path, epoch: str | None = None) -> RasterGrid:
    lines = Path(path).read_text().splitlines()
    header = {}
    for key, line in zip(_GRID_KEYS, lines):
        k, v = line.split()
        if k.lower() != key:
            raise ValueError(f"{path}: expected header key {key!r}, got {k!r}")
        header[key] = v
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    body = [ln for ln in lines[len(_GRID_KEYS):] if ln.strip()]
    if len(body) != nrows:
        raise ValueError(f"{path}: expected {nrows} data rows, found {len(body)}")
    values = np.array([[float(t) for t in ln.split()] for ln in body], dtype=float)
    if values.shape != (nrows, ncols):
        raise ValueError(f"{path}: data block is not {nrows}x{ncols}")
    if epoch is None:
        m = _EPOCH_RE.search(Path(path).stem)
        epoch = m.group(0) if m else None
    return RasterGrid(float(header["xllcorner"]), float(header["yllcorner"]),
                      float(header["cellsize_lon"]), float(header["cellsize_lat"]),
                      values, float(header["nodata_value"]), epoch)


def write_grid(grid: RasterGrid, path) -> None:
    out = [f"ncols {grid.ncols}", f"nrows {grid.nrows}",
           f"xllcorner {fmt_num(grid.xllcorner)}", f"yllcorner {fmt_num(grid.yllcorner)}",
           f"cellsize_lon {fmt_num(grid.cellsize_lon)}",
           f"cellsize_lat {fmt_num(grid.cellsize_lat)}",
           f"nodata_value {fmt_num(grid.nodata_value)}"]
    for row in grid.values:
        out.append(" ".join(fmt_num(v) for v in row))
    Path(path).write_text("\n".join(out) + "\n")


def grid_filename(epoch: str, prefix: str = "grid") -> str:
    return f"{prefix}_{epoch}.asc"


def read_grids(directory) -> dict[str, RasterGrid]:
    """All ``*.asc`` files in a directory keyed by the YYYY-MM in their names."""
    grids = {}
    for p in sorted(Path(directory).glob("*.asc")):
        g = read_grid(p)
        if g.epoch is None:
            raise ValueError(f"{p}: no YYYY-MM epoch in file name")
        if g.epoch in grids:
            raise ValueError(f"duplicate grid for epoch {g.epoch}")
        grids[g.epoch] = g
    return dict(sorted(grids.items(), key=lambda kv: epoch_to_month(kv[0])))


# ---------------------------------------------------------------- preprocessing

def availability_filter(rec: GaugeRecord, threshold: float = 0.7) -> tuple[str, ...]:
    """Ids of stations observed in strictly more than ``threshold`` of all epochs."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    counts = (~np.isnan(rec.values)).sum(axis=1)
    limit = threshold * rec.n_epochs
    return tuple(sid for sid, c in zip(rec.station_ids, counts) if c > limit)


def common_stations(rec: GaugeRecord, i: int, j: int) -> tuple[int, ...]:
    """Indices of stations observed at both epochs ``i`` and ``j``."""
    for e in (i, j):
        if not 0 <= e < rec.n_epochs:
            raise IndexError(f"epoch index {e} out of range")
    both = rec.observed(i) & rec.observed(j)
    idx = tuple(int(s) for s in np.nonzero(both)[0])
    if len(idx) < 3:
        raise InsufficientStationsError(
            f"only {len(idx)} stations observed at both {rec.epochs[i]} and {rec.epochs[j]}")
    return idx


def anchor_gauges(rec: GaugeRecord, grids: dict[str, RasterGrid] | Sequence[RasterGrid],
                  stations: StationSet, spec: ProjectionSpec) -> GaugeRecord:
    """Shift each gauge record onto the grid's reference surface.

    Over the grid epochs the station mean is removed and the temporal mean of
    the nearest grid cell (projected distance, data present in all months the
    station uses) is added. Stations without data in the overlap are dropped
    with a warning.
    """
    if not isinstance(grids, dict):
        grids = {g.epoch: g for g in grids}
    overlap = [e for e in grids if e in rec.epochs]
    if not overlap:
        raise ValueError("gauge record and grids share no epoch")
    ref = grids[overlap[0]]
    for e in overlap[1:]:
        if not grids[e].same_geometry(ref):
            raise ValueError("grids in the overlap period differ in geometry")
    cols = [rec.epoch_index(e) for e in overlap]
    stack = np.stack([grids[e].flat for e in overlap])          # (months, cells)
    valid = np.stack([grids[e].valid for e in overlap])
    clon, clat = ref.cell_centers()
    cx, cy = LambertConformalConic(spec).forward(clon, clat)

    pos = {sid: k for k, sid in enumerate(stations.ids)}
    keep, new_rows = [], []
    for s, sid in enumerate(rec.station_ids):
        series = rec.values[s, cols]
        have = ~np.isnan(series)
        if not have.any():
            log.warning("station %s has no data in the grid period; excluded", sid)
            continue
        usable = valid[have].all(axis=0)
        if not usable.any():
            raise ValueError(f"no grid cell holds data in every month used by station {sid}")
        k = pos[sid]
        d2 = (cx - stations.x[k]) ** 2 + (cy - stations.y[k]) ** 2
        d2 = np.where(usable, d2, np.inf)
        cell = int(np.argmin(d2))
        offset = stack[have, cell].mean() - series[have].mean()
        keep.append(sid)
        new_rows.append(rec.values[s] + offset)
    values = np.array(new_rows).reshape(len(keep), rec.n_epochs)
    return GaugeRecord(tuple(keep), rec.epochs, values)
