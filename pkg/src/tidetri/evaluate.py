"""Reconstruction quality: residual variances, variance reductions, quality
curves, climatological pairing and area-mean time series."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .candidates import order_label
from .cost import CellAssigner, ErrorMetric, triangle_cost
from .delaunay import Triangulation
from .ingest import RasterGrid, decimal_year, fmt_num

UNIFORM = "uniform"
COSLAT = "coslat"
WEIGHTINGS = (UNIFORM, COSLAT)


@dataclass(frozen=True)
class Variance:
    """Summed rated residual over ``count`` cells and its empirical variance."""

    total: float
    count: int

    @property
    def value(self) -> float:
        return self.total / (self.count - 1)


def residual_sum(tri: Triangulation, h, grid: RasterGrid, metric: ErrorMetric,
                 assigner: CellAssigner) -> Variance:
    """Per-triangle sums combined with a correctly rounded sum.

    The per-triangle terms are computed exactly as the cost table does, so
    for the training epoch the total equals the solver objective bit for bit.
    """
    parts, count = [], 0
    for t in tri.triangles:
        c, m = triangle_cost(t, h, grid, metric, assigner)
        parts.append(c)
        count += m
    return Variance(math.fsum(parts), count)


def variance(tri: Triangulation, h, grid: RasterGrid, metric: ErrorMetric,
             assigner: CellAssigner) -> Variance:
    v = residual_sum(tri, h, grid, metric, assigner)
    if v.count < 2:
        raise ValueError(f"variance needs at least two residual cells, got {v.count}")
    return v


@dataclass(frozen=True)
class PairResult:
    """One training/reconstruction pair of the sweep (epoch indices)."""

    i: int
    j: int
    k: float
    var_me: float
    var_delaunay: float
    cells: int

    @property
    def delta_d(self) -> int:
        return abs(self.i - self.j)

    @property
    def var_reduction(self) -> float:
        return self.var_me - self.var_delaunay


@dataclass(frozen=True)
class EvaluationReport:
    pairs: tuple[PairResult, ...]
    k: float
    metric: str
    epochs: tuple[str, ...]

    def curve(self, climatological: bool = False) -> dict[int, tuple[float, int]]:
        return quality_curve(self.pairs, climatological)


def quality_curve(pairs: Iterable[PairResult],
                  climatological: bool = False) -> dict[int, tuple[float, int]]:
    """Mean variance reduction per epoch distance, with the pair count.

    With ``climatological`` only distances that are whole years are kept.
    """
    groups: dict[int, list[float]] = defaultdict(list)
    for p in pairs:
        if climatological and p.delta_d % 12:
            continue
        groups[p.delta_d].append(p.var_reduction)
    return {d: (math.fsum(v) / len(v), len(v)) for d, v in sorted(groups.items())}


def climatological_pairs(n_epochs: int, j: int) -> list[int]:
    """Training epochs whole years away from ``j`` on a monthly axis (``j`` included)."""
    if not 0 <= j < n_epochs:
        raise IndexError(f"epoch {j} outside 0..{n_epochs - 1}")
    return list(range(j % 12, n_epochs, 12))


def area_mean(grid: RasterGrid, weighting: str = COSLAT) -> float:
    """Mean over cells holding data, optionally weighted by cos(latitude)."""
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}; choose from {WEIGHTINGS}")
    ok = grid.valid
    if not ok.any():
        raise ValueError("grid holds no data")
    vals = grid.flat[ok]
    if weighting == UNIFORM:
        return float(np.mean(vals))
    _, lat = grid.cell_centers()
    w = np.cos(np.radians(lat[ok]))
    return float(np.sum(w * vals) / np.sum(w))


@dataclass(frozen=True)
class SsaSeries:
    """Monthly values on a contiguous epoch axis; NaN where undefined."""

    epochs: tuple[str, ...]
    values: np.ndarray
    weighting: str = COSLAT

    def __post_init__(self):
        if len(self.epochs) != len(self.values):
            raise ValueError("series epochs and values differ in length")

    def defined(self) -> list[tuple[str, float]]:
        return [(e, float(v)) for e, v in zip(self.epochs, self.values) if not np.isnan(v)]


def moving_average(series: SsaSeries, window: int) -> SsaSeries:
    """Centred running mean; missing months are left out of the average.

    Output exists only where the whole window fits on the axis, so it is
    ``window - 1`` epochs shorter. For an even window the value is labelled
    with the earlier of the two middle months.
    """
    n = len(series.values)
    if window < 1:
        raise ValueError("window must be positive")
    if window > n:
        raise ValueError(f"window {window} longer than the series ({n})")
    v = np.asarray(series.values, dtype=float)
    out = np.full(n - window + 1, np.nan)
    for s in range(len(out)):
        seg = v[s:s + window]
        seg = seg[~np.isnan(seg)]
        if seg.size:
            out[s] = math.fsum(seg) / seg.size
    half = (window - 1) // 2
    return SsaSeries(series.epochs[half:half + n - window + 1], out, series.weighting)


def linear_trend(series: SsaSeries, start: str | None = None, end: str | None = None) -> float:
    """Least-squares slope in mm/yr over the defined months in ``[start, end]``."""
    t, y = [], []
    for e, v in series.defined():
        if (start is None or e >= start) and (end is None or e <= end):
            t.append(decimal_year(e))
            y.append(v)
    if len(t) < 2:
        raise ValueError("trend needs at least two defined months")
    t = np.array(t)
    y = np.array(y)
    tc = t - t.mean()
    sxx = float(np.dot(tc, tc))
    if sxx == 0:
        raise ValueError("degenerate time axis")
    return float(np.dot(tc, y - y.mean()) / sxx) * 10.0


# ---------------------------------------------------------------- output

def write_sweep(pairs: Sequence[PairResult], epochs: Sequence[str], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "delta_d", "k", "var_me", "var_delaunay", "var_reduction", "cells"])
        for p in pairs:
            w.writerow([epochs[p.i], epochs[p.j], p.delta_d, order_label(p.k),
                        fmt_num(p.var_me), fmt_num(p.var_delaunay),
                        fmt_num(p.var_reduction), p.cells])


def write_quality_curve(curve: dict[int, tuple[float, int]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta_d", "q", "count"])
        for d, (q, n) in sorted(curve.items()):
            w.writerow([d, fmt_num(q), n])


def write_series(series: SsaSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "value_cm"])
        for e, v in series.defined():
            w.writerow([e, fmt_num(v)])
