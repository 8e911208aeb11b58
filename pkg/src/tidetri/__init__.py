"""Optimal data-dependent triangulations of tide-gauge networks learned
against gridded reference surfaces, with reconstruction and evaluation."""

from .candidates import UNBOUNDED, CandidateSet, enumerate_candidates, parse_order
from .cost import ABSOLUTE, SQUARED, CellAssigner, RegionMask, cost_table, get_metric
from .delaunay import Triangulation, delaunay, read_triangulation, write_triangulation
from .evaluate import (PairResult, SsaSeries, area_mean, climatological_pairs, linear_trend,
                       moving_average, quality_curve, variance)
from .ilp import IlpModel, IlpSolution, build_model, export_mps, solve
from .ingest import GaugeRecord, ProjectionSpec, RasterGrid, StationSet
from .pipeline import Dataset, Pipeline, load_dataset
from .reconstruct import ReconstructionGrid, transfer_and_rasterize

__version__ = "0.1.0"

__all__ = [
    "ABSOLUTE", "SQUARED", "UNBOUNDED", "CandidateSet", "CellAssigner", "Dataset",
    "GaugeRecord", "IlpModel", "IlpSolution", "PairResult", "Pipeline", "ProjectionSpec",
    "RasterGrid", "ReconstructionGrid", "RegionMask", "SsaSeries", "StationSet",
    "Triangulation", "area_mean", "build_model", "climatological_pairs", "cost_table",
    "delaunay", "enumerate_candidates", "export_mps", "get_metric", "linear_trend",
    "load_dataset", "moving_average", "parse_order", "quality_curve", "read_triangulation",
    "solve", "transfer_and_rasterize", "variance", "write_triangulation",
]
