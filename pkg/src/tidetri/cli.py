"""Command-line entry point: ``tidetri <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .candidates import order_label, parse_order
from .cost import METRICS, write_cost_table
from .delaunay import write_triangulation
from .evaluate import (COSLAT, WEIGHTINGS, SsaSeries, area_mean, linear_trend, moving_average,
                       quality_curve, write_quality_curve, write_series, write_sweep)
from .ilp import export_mps
from .ingest import (epoch_to_month, fmt_num, grid_filename, write_gauges, write_grid,
                     write_projection, write_stations)
from .oracle import SyntheticScenario, generate
from .pipeline import DELAUNAY, MIN_ERROR, Pipeline, load_dataset, training_epoch
from .reconstruct import write_reconstruction

log = logging.getLogger("tidetri")


def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--log-level", default="WARNING")
    if not data:
        return
    p.add_argument("--stations", type=Path, required=True, help="CSV id,lon,lat")
    p.add_argument("--gauges", type=Path, required=True, help="CSV station_id,epoch,value_cm")
    p.add_argument("--grids", type=Path, required=True, help="directory of grid_YYYY-MM.asc")
    p.add_argument("--projection", type=Path, help="projection file (default: fitted to stations)")
    p.add_argument("--k", type=parse_order, default=parse_order("inf"),
                   help="order bound, integer or 'inf' (default inf)")
    p.add_argument("--metric", choices=sorted(METRICS), default="squared")
    p.add_argument("--threshold", type=float, default=0.7,
                   help="minimum fraction of months a station must be observed")
    p.add_argument("--no-anchor", action="store_true",
                   help="use gauge values as given instead of shifting them onto the grids")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tidetri", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    _common(p, data=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-stations", type=int, default=20)
    p.add_argument("--n-epochs", type=int, default=60)
    p.add_argument("--start-epoch", default="1993-01")
    p.add_argument("--grid-start", type=int, default=0,
                   help="index of the first epoch that has a grid")
    p.add_argument("--cols", type=int, default=60)
    p.add_argument("--rows", type=int, default=50)
    p.add_argument("--noise", type=float, default=1.0, help="gauge noise (cm)")
    p.add_argument("--gaps", type=float, default=0.0, help="probability of a missing month")
    p.add_argument("--trend", type=float, default=0.2, help="cm per year")

    p = sub.add_parser("triangulate", help="optimal and Delaunay triangulations at one epoch")
    _common(p)
    p.add_argument("--epoch", required=True, help="training epoch YYYY-MM")
    p.add_argument("--with-epoch", help="also require stations observed at this epoch")
    p.add_argument("--costs", action="store_true", help="write the candidate cost table")

    p = sub.add_parser("reconstruct", help="transfer a triangulation and rasterize")
    _common(p)
    p.add_argument("--train", required=True, help="training epoch YYYY-MM")
    p.add_argument("--epoch", required=True, help="reconstruction epoch YYYY-MM")

    p = sub.add_parser("sweep", help="all training/reconstruction pairs with grids")
    _common(p)
    p.add_argument("--first", help="first epoch of the sweep")
    p.add_argument("--last", help="last epoch of the sweep")

    p = sub.add_parser("series", help="area-mean series of gauges, grids and reconstructions")
    _common(p)
    p.add_argument("--weighting", choices=WEIGHTINGS, default=COSLAT)
    p.add_argument("--window", type=int, help="moving-average window in months, e.g. 228")
    p.add_argument("--trend", action="append", default=[], metavar="START:END",
                   help="report the linear trend over this epoch range (repeatable)")
    p.add_argument("--min-lag", type=int, default=0,
                   help="smallest whole-year distance allowed between training and target")

    p = sub.add_parser("export-mps", help="write the integer program as an MPS file")
    _common(p)
    p.add_argument("--epoch", required=True)
    p.add_argument("--with-epoch")
    return ap


def _pipeline(args) -> Pipeline:
    data = load_dataset(args.stations, args.gauges, args.grids, args.projection,
                        args.threshold, anchor=not args.no_anchor)
    return Pipeline(data, args.k, args.metric)


def _epoch(pipe: Pipeline, label: str) -> int:
    epoch_to_month(label)
    try:
        return pipe.data.epochs.index(label)
    except ValueError:
        raise ValueError(f"epoch {label} is outside the data") from None


def _stem(pipe: Pipeline, i: int, j: int) -> str:
    ep = pipe.data.epochs
    return ep[i] if i == j else f"{ep[i]}_{ep[j]}"


def cmd_synth(args) -> None:
    sc = SyntheticScenario(n_stations=args.n_stations, n_epochs=args.n_epochs, seed=args.seed,
                           grid_cols=args.cols, grid_rows=args.rows, grid_start=args.grid_start,
                           start_epoch=args.start_epoch, noise_cm=args.noise,
                           gap_probability=args.gaps, trend_cm_per_year=args.trend)
    stations, gauges, grids, spec = generate(sc)
    out = args.out
    (out / "grids").mkdir(parents=True, exist_ok=True)
    write_stations(stations, out / "stations.csv")
    write_gauges(gauges, out / "gauges.csv")
    write_projection(spec, out / "projection.txt")
    for g in grids:
        write_grid(g, out / "grids" / grid_filename(g.epoch))
    print(f"wrote {len(stations)} stations, {gauges.n_epochs} epochs, {len(grids)} grids to {out}")


def _write_pair(pipe: Pipeline, i: int, j: int, out: Path, costs: bool = False) -> dict:
    t0 = time.perf_counter()
    subset = pipe.subset(i, j)
    lrn = pipe.learn(i, subset)
    elapsed = time.perf_counter() - t0
    ep = pipe.data.epochs
    k = order_label(pipe.k)
    stem = f"{_stem(pipe, i, j)}_k{k}"
    ids = pipe.data.stations.ids
    head = [f"training_epoch {ep[i]}", f"subset_epoch {ep[j]}", f"k {k}",
            f"metric {pipe.metric.name}", "stations " + " ".join(ids)]
    paths = {}
    for method, tri, obj in ((MIN_ERROR, lrn.min_error, lrn.objective),
                             (DELAUNAY, lrn.delaunay, lrn.delaunay_cost)):
        path = out / f"tri_{stem}_{'me' if method == MIN_ERROR else 'delaunay'}.tri"
        write_triangulation(lrn.global_(tri), path, head + [f"objective {fmt_num(obj)}"])
        paths[method] = path
    sol = lrn.solution
    meta = [("training_epoch", ep[i]), ("subset_epoch", ep[j]), ("k", k),
            ("metric", pipe.metric.name), ("stations", len(subset)),
            ("candidates", lrn.model.n_vars), ("constraints", lrn.model.n_rows),
            ("objective", fmt_num(lrn.objective)), ("delaunay_cost", fmt_num(lrn.delaunay_cost)),
            ("status", sol.status), ("nodes", sol.stats.nodes)]
    (out / f"triangulate_{stem}.txt").write_text("".join(f"{a} = {b}\n" for a, b in meta))
    if costs:
        write_cost_table(lrn.candidates.triangles, lrn.costs, out / f"costs_{stem}.csv",
                         labels=subset)
    print(f"{ep[i]} k={k}: objective {lrn.objective!r}, delaunay {lrn.delaunay_cost!r}, "
          f"{len(subset)} stations, {lrn.model.n_vars} candidates, {elapsed:.3f} s")
    return paths


def cmd_triangulate(args) -> None:
    pipe = _pipeline(args)
    i = _epoch(pipe, args.epoch)
    j = _epoch(pipe, args.with_epoch) if args.with_epoch else i
    args.out.mkdir(parents=True, exist_ok=True)
    _write_pair(pipe, i, j, args.out, args.costs)


def cmd_reconstruct(args) -> None:
    pipe = _pipeline(args)
    i, j = _epoch(pipe, args.train), _epoch(pipe, args.epoch)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    tri_paths = _write_pair(pipe, i, j, out)
    ep = pipe.data.epochs
    k = order_label(pipe.k)
    tag = f"{ep[j]}_from_{ep[i]}_k{k}"
    recon = {}
    for method, short in ((MIN_ERROR, "me"), (DELAUNAY, "delaunay")):
        rec = pipe.reconstruct(i, j, method, tri_paths[method].name)
        write_reconstruction(rec, out / f"recon_{short}_{tag}.asc")
        recon[short] = rec.grid
    ref = pipe.data.grid_at(j)
    if ref is None:
        log.warning("no grid for %s; residual grids skipped", ep[j])
        return
    sq = {}
    for short, g in recon.items():
        ok = g.valid & ref.valid
        res = np.where(ok, g.flat - ref.flat, np.nan)
        write_grid(g.with_values(res), out / f"residual_{short}_{tag}.asc")
        sq[short] = res * res
        write_grid(g.with_values(sq[short]), out / f"sqres_{short}_{tag}.asc")
    write_grid(recon["me"].with_values(sq["me"] - sq["delaunay"]), out / f"sqres_diff_{tag}.asc")


def cmd_sweep(args) -> None:
    pipe = _pipeline(args)
    ep = pipe.data.epochs
    idx = pipe.data.grid_indices()
    if args.first:
        idx = [e for e in idx if ep[e] >= args.first]
    if args.last:
        idx = [e for e in idx if ep[e] <= args.last]
    if len(idx) < 2:
        raise ValueError("the sweep needs at least two epochs with grids")
    pairs = []
    t0 = time.perf_counter()
    for i in idx:
        for j in idx:
            pairs.append(pipe.evaluate_pair(i, j))
    k = order_label(pipe.k)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_sweep(pairs, ep, out / f"sweep_k{k}.csv")
    write_quality_curve(quality_curve(pairs), out / f"quality_k{k}.csv")
    write_quality_curve(quality_curve(pairs, climatological=True), out / f"quality_clim_k{k}.csv")
    print(f"{len(pairs)} pairs over {len(idx)} epochs in {time.perf_counter() - t0:.1f} s")


def _gauge_mean(pipe: Pipeline, e: int, weighting: str) -> float:
    v = pipe.data.gauges.at(e)
    ok = ~np.isnan(v)
    if not ok.any():
        return np.nan
    if weighting == COSLAT:
        w = np.cos(np.radians(pipe.data.stations.lat[ok]))
        return float(np.sum(w * v[ok]) / np.sum(w))
    return float(np.mean(v[ok]))


def cmd_series(args) -> None:
    pipe = _pipeline(args)
    data = pipe.data
    ep = data.epochs
    n = len(ep)
    gauges = np.array([_gauge_mean(pipe, e, args.weighting) for e in range(n)])
    grids = np.full(n, np.nan)
    for e in data.grid_indices():
        grids[e] = area_mean(data.grid_at(e), args.weighting)
    recon = np.full(n, np.nan)
    plan = []
    for j in range(n):
        i = training_epoch(data, j, args.min_lag)
        if i is None:
            log.warning("no training epoch for %s", ep[j])
            continue
        rec = pipe.reconstruct(i, j)
        recon[j] = area_mean(rec.grid, args.weighting)
        plan.append((ep[j], ep[i]))
    k = order_label(pipe.k)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    series = {"gauges": SsaSeries(ep, gauges, args.weighting),
              "grids": SsaSeries(ep, grids, args.weighting),
              f"recon_k{k}": SsaSeries(ep, recon, args.weighting)}
    for name, s in series.items():
        write_series(s, out / f"series_{name}.csv")
        if args.window:
            write_series(moving_average(s, args.window), out / f"series_{name}_ma{args.window}.csv")
    with open(out / f"plan_k{k}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "training_epoch"])
        w.writerows(plan)
    if args.trend:
        with open(out / f"trends_k{k}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["series", "start", "end", "mm_per_yr"])
            for spec in args.trend:
                start, _, end = spec.partition(":")
                epoch_to_month(start)
                epoch_to_month(end)
                for name, s in series.items():
                    try:
                        rate = fmt_num(linear_trend(s, start, end))
                    except ValueError:
                        rate = "NaN"
                    w.writerow([name, start, end, rate])
    print(f"series over {n} epochs, {len(plan)} reconstructed")


def cmd_export_mps(args) -> None:
    pipe = _pipeline(args)
    i = _epoch(pipe, args.epoch)
    j = _epoch(pipe, args.with_epoch) if args.with_epoch else i
    lrn = pipe.learn(i, pipe.subset(i, j))
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"model_{_stem(pipe, i, j)}_k{order_label(pipe.k)}.mps"
    export_mps(lrn.model, path)
    print(f"wrote {path} ({lrn.model.n_vars} columns, {lrn.model.n_rows} rows), "
          f"embedded optimum {lrn.objective!r}")


COMMANDS = {"synth": cmd_synth, "triangulate": cmd_triangulate, "reconstruct": cmd_reconstruct,
            "sweep": cmd_sweep, "series": cmd_series, "export-mps": cmd_export_mps}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
