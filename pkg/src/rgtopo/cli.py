"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import components as comp
from . import harness, spectra
from .errors import InvariantViolation, MultiplicityMismatch, RgTopoError
from .pointproc import Manifold, PointCloud, Seed, sample_poisson, sample_uniform
from .proximity import GeometricGraph, build_cech
from .recognition import is_unit_interval

EXIT_OK, EXIT_INVALID, EXIT_INVARIANT = 0, 2, 3


def _manifold(args) -> Manifold:
    if args.manifold == "torus":
        return Manifold.torus(args.m)
    if args.manifold == "sphere":
        return Manifold.sphere()
    if args.manifold == "ball":
        return Manifold.ball(args.m, args.R)
    return Manifold.box(args.m, args.side if args.side is not None else 2 * args.R)


def _out(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _load_cloud(path) -> PointCloud:
    return PointCloud.from_json(json.loads(Path(path).read_text()))


def _load_graph(args) -> GeometricGraph:
    if args.points:
        return build_cech(_load_cloud(args.points), 1).base
    with open(args.edges, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and not rows[0][0].lstrip("-").isdigit():
        rows = rows[1:]
    edges = np.array([[int(a), int(b)] for a, b in rows], dtype=np.int64).reshape(-1, 2)
    n = args.n if args.n is not None else (int(edges.max()) + 1 if len(edges) else 0)
    return GeometricGraph.from_edges(n, edges)


def cmd_sample(args) -> int:
    man = _manifold(args)
    seed = Seed(args.seed, args.trial, 0)
    if args.model == "poisson":
        cloud = sample_poisson(man, args.alpha, seed)
    else:
        cloud = sample_uniform(man, args.n, args.alpha, seed)
    out = _out(args)
    cloud.write_csv(out / "points.csv")
    cloud.write_json(out / "cloud.json")
    _emit({"points": len(cloud), "r": cloud.r, "out": str(out / "cloud.json")})
    return EXIT_OK


def cmd_graph(args) -> int:
    cloud = _load_cloud(args.points)
    g = build_cech(cloud, 1).base
    out = _out(args)
    g.write_edges_csv(out / "edges.csv")
    dec = comp.decompose(g)
    _emit({"vertices": g.n_vertices, "edges": g.n_edges, "b0": dec.b0,
           "out": str(out / "edges.csv")})
    return EXIT_OK


def cmd_cech(args) -> int:
    cloud = _load_cloud(args.points)
    sk = build_cech(cloud, args.k_max)
    out = _out(args)
    sk.write_json(out / "skeleton.json")
    _emit({"counts": {d: sk.count(d) for d in range(args.k_max + 1)},
           "out": str(out / "skeleton.json")})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g = _load_graph(args)
    dec = comp.decompose(g)
    mu = spectra.spectral_measure(g, dec=dec)
    spectra.zero_mass(mu, g, dec=dec)
    out = _out(args)
    (out / "spectrum.json").write_text(mu.dumps())
    mu.write_histogram_csv(out / "spectrum_hist.csv", args.bins)
    _emit({"vertices": g.n_vertices, "atoms": len(mu.masses), "zero_mass": mu.mass_at(0.0),
           "b0": dec.b0, "out": str(out / "spectrum.json")})
    return EXIT_OK


def cmd_types(args) -> int:
    cloud = _load_cloud(args.points)
    if cloud.manifold.is_euclidean and cloud.model == "poisson":
        tm = comp.poisson_component_measure(cloud, args.k, args.size_cap)
    else:
        tm = comp.type_measure(build_cech(cloud, max(args.k, 1)), args.k, args.size_cap)
    out = _out(args)
    (out / "types.json").write_text(json.dumps(tm.to_json(), indent=2))
    _emit({"components": tm.b0, "types": len(tm.masses), "approximate": tm.has_approximate,
           "out": str(out / "types.json")})
    return EXIT_OK


def cmd_recognize(args) -> int:
    g = _load_graph(args)
    dec = comp.decompose(g)
    results = []
    for c, mem in enumerate(dec.members):
        res = is_unit_interval(g.induced(mem))
        d = res.to_json()
        if d["witness"]:
            d["witness"]["vertices"] = [int(mem[v]) for v in d["witness"]["vertices"]]
        results.append({"component": c, "size": len(mem), **d})
    _emit({"components": len(results),
           "unit_interval": sum(r["is_unit_interval"] for r in results),
           "rejected": [r for r in results if not r["is_unit_interval"]]})
    return EXIT_OK


def cmd_experiment_run(args) -> int:
    cfg = harness.ExperimentConfig.load(args.config)
    if args.out_dir_given:
        cfg.out_dir = args.out_dir
    if args.seed_given:
        cfg.seed = args.seed
    if not cfg.out_dir:
        cfg.out_dir = args.out_dir
    report = harness.run(cfg, threads=args.threads)
    _emit({"out": cfg.out_dir, "provenance": report.provenance,
           "levels": [{"value": lv.value, "n_ok": lv.n_ok, "beta_mean": lv.beta_mean,
                       "beta_se": lv.beta_se, **lv.extra} for lv in report.levels],
           "consecutive": report.consecutive})
    return EXIT_OK


def cmd_experiment_compare(args) -> int:
    a = harness.RunReport.load(args.report_a)
    b = harness.RunReport.load(args.report_b)
    metrics = harness.METRICS if args.metric == "all" else [args.metric]
    _emit({m: harness.compare(a, b, m) for m in metrics})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rgtopo", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--threads", type=int, default=1, help="worker processes for trials")
    p.add_argument("--out-dir", default=None, help="output directory (default: out)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a point cloud")
    s.add_argument("--model", choices=("uniform", "poisson"), default="uniform")
    s.add_argument("--manifold", choices=("torus", "sphere", "ball", "box"), default="torus")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--R", type=float, default=6.0, help="ball radius or half box side")
    s.add_argument("--side", type=float, default=None)
    s.add_argument("--trial", type=int, default=0)
    s.set_defaults(func=cmd_sample)

    for name, fn, helptext in (("graph", cmd_graph, "build the geometric graph"),
                               ("cech", cmd_cech, "build the Cech k-skeleton"),
                               ("types", cmd_types, "component type measure")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("points", help="cloud JSON written by `sample`")
        if name == "cech":
            s.add_argument("--k-max", type=int, default=2)
        if name == "types":
            s.add_argument("--k", type=int, default=1)
            s.add_argument("--size-cap", type=int, default=comp.DEFAULT_SIZE_CAP)
        s.set_defaults(func=fn)

    for name, fn, helptext in (("spectrum", cmd_spectrum, "normalised-Laplacian spectral measure"),
                               ("recognize", cmd_recognize, "unit interval recognition")):
        s = sub.add_parser(name, help=helptext)
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--points", help="cloud JSON")
        src.add_argument("--edges", help="edge list CSV (i,j)")
        s.add_argument("--n", type=int, default=None, help="vertex count for --edges")
        if name == "spectrum":
            s.add_argument("--bins", type=int, default=400)
        s.set_defaults(func=fn)

    e = sub.add_parser("experiment", help="multi-trial experiments")
    esub = e.add_subparsers(dest="action", required=True)
    r = esub.add_parser("run", help="run a config")
    r.add_argument("config")
    r.set_defaults(func=cmd_experiment_run)
    c = esub.add_parser("compare", help="compare two report directories")
    c.add_argument("report_a")
    c.add_argument("report_b")
    c.add_argument("--metric", choices=harness.METRICS + ("all",), default="all")
    c.set_defaults(func=cmd_experiment_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    args.seed_given = args.seed is not None
    args.out_dir_given = args.out_dir is not None
    if args.seed is None:
        args.seed = 0
    if args.out_dir is None:
        args.out_dir = "out"
    try:
        return args.func(args)
    except (InvariantViolation, MultiplicityMismatch) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (RgTopoError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
