import math

import numpy as np
import pytest

from tidetri import cli
from tidetri.delaunay import validate_triangulation
from tidetri.ingest import GaugeRecord
from tidetri.oracle import SyntheticScenario, generate
from tidetri.pipeline import DELAUNAY, MIN_ERROR, Dataset, Pipeline, load_dataset, training_epoch

SMALL = dict(n_stations=8, n_epochs=30, grid_cols=20, grid_rows=16, noise_cm=0.5, seed=3)


def as_dataset(data):
    st, g, grids, spec = data
    return Dataset(st, g, {x.epoch: x for x in grids}, spec)


@pytest.fixture(scope="module")
def small():
    return as_dataset(generate(SyntheticScenario(**SMALL)))


@pytest.fixture(scope="module")
def late_grids():
    return as_dataset(generate(SyntheticScenario(**SMALL, grid_start=12)))


def _write(tmp_path, *extra):
    args = ["synth", "--out", str(tmp_path), "--seed", "3", "--n-stations", "8",
            "--n-epochs", "30", "--cols", "20", "--rows", "16", "--noise", "0.5", *extra]
    assert cli.main(args) == 0
    return tmp_path / "stations.csv", tmp_path / "gauges.csv", tmp_path / "grids"


def test_load_dataset_round_trip(tmp_path, small):
    st, ga, gr = _write(tmp_path)
    raw = load_dataset(st, ga, gr, tmp_path / "projection.txt", anchor=False)
    assert raw.stations.ids == small.stations.ids and raw.epochs == small.epochs
    np.testing.assert_allclose(raw.gauges.values, small.gauges.values, rtol=0, atol=1e-12)
    np.testing.assert_allclose(raw.stations.xy, small.stations.xy, rtol=0, atol=1e-6)
    assert sorted(raw.grids) == sorted(small.grids)
    anchored = load_dataset(st, ga, gr, tmp_path / "projection.txt")
    shift = anchored.gauges.values - raw.gauges.values
    # one constant shift per station
    np.testing.assert_allclose(shift, np.broadcast_to(shift[:, :1], shift.shape),
                               rtol=0, atol=1e-9)


def test_epoch_axis_spans_grids(tmp_path):
    st, ga, gr = _write(tmp_path, "--grid-start", "5")
    data = load_dataset(st, ga, gr)
    assert data.epochs[0] == "1993-01" and len(data.epochs) == 30
    assert data.grid_indices() == list(range(5, 30))


def test_availability_filter_drops_sparse_stations(tmp_path):
    st, ga, gr = _write(tmp_path, "--gaps", "0.4")
    full = load_dataset(st, ga, gr, threshold=0.0)
    strict = load_dataset(st, ga, gr, threshold=0.7)
    assert len(strict.stations) < len(full.stations) == 8
    frac = np.mean(~np.isnan(full.gauges.values), axis=1)
    kept = [s for s, f in zip(full.stations.ids, frac) if f >= 0.7]
    assert list(strict.stations.ids) == kept


def test_dataset_validation(small):
    g = small.gauges
    flipped = GaugeRecord(tuple(reversed(g.station_ids)), g.epochs, g.values[::-1])
    with pytest.raises(ValueError):
        Dataset(small.stations, flipped, small.grids, small.projection)


def test_training_epoch_rule(small, late_grids):
    assert training_epoch(small, 3) == 3
    assert training_epoch(small, 3, min_lag=1) == 15
    assert training_epoch(small, 3, min_lag=2) == 27
    # no later epoch in range: fall back to the nearest earlier one
    assert training_epoch(small, 20, min_lag=1) == 8
    assert training_epoch(late_grids, 2) == 14
    assert training_epoch(late_grids, 20) == 20
    assert training_epoch(late_grids, 5, min_lag=2) == 29


def test_learn_is_cached_and_valid(small):
    pipe = Pipeline(small, 2)
    subset = pipe.subset(4, 4)
    a = pipe.learn(4, subset)
    assert pipe.learn(4, subset) is a
    pts = pipe.points(subset)
    assert validate_triangulation(pts, a.min_error) == []
    assert a.objective <= a.delaunay_cost
    assert a.global_(a.min_error).triangles == a.min_error.relabel(subset).triangles


@pytest.mark.parametrize("k", [0, 1, math.inf])
def test_evaluate_pair(small, k):
    pipe = Pipeline(small, k)
    same = pipe.evaluate_pair(6, 6)
    assert same.var_me <= same.var_delaunay + 1e-12
    if k == 0:
        assert same.var_me == same.var_delaunay
    other = pipe.evaluate_pair(6, 18)
    assert other.delta_d == 12 and other.cells > 0


def test_evaluate_pair_needs_grid(late_grids):
    with pytest.raises(ValueError, match="no grid"):
        Pipeline(late_grids).evaluate_pair(12, 0)


def test_reconstruct_before_grid_record(late_grids):
    pipe = Pipeline(late_grids)
    me = pipe.reconstruct(12, 0)
    dt = pipe.reconstruct(12, 0, DELAUNAY)
    assert me.grid.epoch == "1993-01" and me.training_epoch == "1994-01"
    assert me.method == MIN_ERROR and dt.method == DELAUNAY
    assert me.grid.same_geometry(late_grids.grid_at(12))
    assert me.grid.valid.sum() == pipe.assigner(pipe.subset(12, 0),
                                                late_grids.grid_at(12)).n_cells
