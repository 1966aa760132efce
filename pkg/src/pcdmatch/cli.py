"""Command-line entry points: basis, match, bench, sweep, metrics."""

import argparse
import json
import os
import sys

import numpy as np

from . import fileio, metrics
from .fmap import PointwiseMap
from .harness import (
    ExperimentConfig,
    MeshBundle,
    PairSpec,
    build_basis,
    compare_bases,
    run_bench,
    run_pair,
    run_sweep,
    sample_pairs_from_manifest,
)

BASIS_CHOICES = ["lb", "pcgau", "adapt", "heat", "spec", "wks", "wksgau", "wave"]
PIPELINE_CHOICES = ["gt", "no17", "zoomout"]


def _add_basis_flags(p):
    p.add_argument("--basis", choices=BASIS_CHOICES, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def _basis_spec(args, base=None):
    spec = dict(base or {"kind": "pcgau"})
    if args.basis:
        spec["kind"] = args.basis
    if args.sigma is not None:
        spec["sigma"] = args.sigma
    if args.q is not None:
        spec["q"] = args.q
    return spec


def _config_from_args(args, pairs=None):
    """CLI flags take precedence over config-file fields."""
    overrides = {}
    if getattr(args, "pipeline", None):
        overrides["pipeline"] = args.pipeline
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if args.config:
        cfg = ExperimentConfig.from_json(args.config, **overrides)
    else:
        cfg = ExperimentConfig(pairs=[], **overrides)
    if pairs is not None:
        cfg.pairs = pairs
    spec = _basis_spec(args, cfg.basis)
    cfg.basis = spec
    if args.k is not None:
        cfg.k = args.k
    if getattr(args, "one_based", False):
        cfg.one_based_maps = True
    return cfg


def cmd_basis(args):
    bundle = MeshBundle.load(args.mesh, seed=args.seed or 0)
    spec = _basis_spec(args)
    k = args.k or 60
    b = build_basis(bundle, spec, k)
    fileio.save_basis(args.out, b)
    print(f"wrote {args.out}.fbm (n={b.n}, k={b.k}, source={b.source})")
    return 0


def cmd_match(args):
    pair = PairSpec(
        mesh_m=args.mesh_m, mesh_n=args.mesh_n, gt_map=args.gt, landmarks=args.landmarks
    )
    cfg = _config_from_args(args, pairs=[pair])
    report, pred, _ = run_pair(cfg, cfg.pairs[0])
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    fileio.write_pointwise_map(os.path.join(out, "predicted.map"), pred.assignment)
    if report is not None:
        metrics.export_csv(report, os.path.join(out, "errors.csv"))
        metrics.export_json_summary(report, os.path.join(out, "summary.json"))
        if cfg.emit_ply or args.ply:
            bundle_n = MeshBundle.load(pair.mesh_n)
            fileio.write_vertex_quality_ply(
                os.path.join(out, "error.ply"), bundle_n.mesh, report.per_vertex_error
            )
        print(f"AGE = {report.age:.6g}")
    else:
        print("no ground truth given; wrote predicted map only")
    return 0


def cmd_bench(args):
    pairs = None
    if args.manifest:
        pairs = sample_pairs_from_manifest(args.manifest, args.n_pairs, args.seed or 0)
    cfg = _config_from_args(args, pairs=pairs)
    if args.compare:
        kinds = args.compare.split(",")
        specs = [dict(cfg.basis, kind=kind) for kind in kinds]
        comparison = compare_bases(cfg, specs)
        for kind in kinds:
            ages = [a for a in comparison["ages"][kind] if a is not None]
            mre = comparison["mre"].get(kind)
            line = f"{kind}: mean AGE = {np.mean(ages):.6g}" if ages else f"{kind}: no scores"
            if mre is not None:
                line += f", MRE vs lb = {mre:+.3%}"
            print(line)
        return 0
    results, failures = run_bench(cfg)
    ages = [r.age for _, _, r, _ in results if r is not None]
    if ages:
        print(f"{len(results)} pair(s), mean AGE = {np.mean(ages):.6g}")
    if failures:
        print(f"{len(failures)} pair(s) failed; see errors.json", file=sys.stderr)
    return 0 if not failures else 1


def cmd_sweep(args):
    cfg = _config_from_args(args)
    grid = [float(x) for x in args.grid.split(",")] if args.grid else (
        cfg.sigma_grid if args.param == "sigma" else cfg.q_grid
    )
    sweep = run_sweep(cfg, args.param, grid)
    for row in sweep["rows"]:
        age_txt = "-" if row["age"] is None else f"{row['age']:.6g}"
        print(f"{args.param}={row['value']:g}: AGE={age_txt} MGD={row['mgd']:.6g}")
    print(f"selected {args.param} = {sweep['selected_value']:g} (min MGD)")
    return 0


def cmd_metrics(args):
    bundle_m = MeshBundle.load(args.mesh_m)
    pred = PointwiseMap(
        assignment=fileio.read_pointwise_map(args.map, one_based=args.one_based),
        n_target=bundle_m.n,
    )
    gt = PointwiseMap(
        assignment=fileio.read_pointwise_map(args.gt, one_based=args.one_based),
        n_target=bundle_m.n,
    )
    report = metrics.evaluate_map(pred, gt, bundle_m.mesh, DEFAULT_THRESHOLDS)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    metrics.export_csv(report, os.path.join(out, "errors.csv"))
    metrics.export_json_summary(report, os.path.join(out, "summary.json"))
    if args.ply and args.mesh_n:
        bundle_n = MeshBundle.load(args.mesh_n)
        fileio.write_vertex_quality_ply(
            os.path.join(out, "error.ply"), bundle_n.mesh, report.per_vertex_error
        )
    print(f"AGE = {report.age:.6g}")
    return 0


DEFAULT_THRESHOLDS = np.linspace(0.0, 0.25, 51)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="pcdmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="build and export a basis")
    p.add_argument("--mesh", required=True)
    p.add_argument("--out", required=True, help="output prefix")
    _add_basis_flags(p)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("match", help="run one pipeline on one mesh pair")
    p.add_argument("--mesh-m", required=True)
    p.add_argument("--mesh-n", required=True)
    p.add_argument("--gt", default=None)
    p.add_argument("--landmarks", default=None)
    p.add_argument("--pipeline", choices=PIPELINE_CHOICES, default="gt")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--one-based", action="store_true")
    p.add_argument("--ply", action="store_true")
    _add_basis_flags(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("bench", help="run a config over a pair list")
    p.add_argument("--config", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--n-pairs", type=int, default=10)
    p.add_argument("--pipeline", choices=PIPELINE_CHOICES, default=None)
    p.add_argument("--compare", default=None, help="comma list of basis kinds")
    p.add_argument("--out", default=None)
    _add_basis_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="sweep sigma or q")
    p.add_argument("--config", required=True)
    p.add_argument("--param", choices=["sigma", "q"], required=True)
    p.add_argument("--grid", default=None, help="comma list of values")
    p.add_argument("--out", default=None)
    _add_basis_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="score an existing map")
    p.add_argument("--mesh-m", required=True)
    p.add_argument("--mesh-n", default=None)
    p.add_argument("--map", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--one-based", action="store_true")
    p.add_argument("--ply", action="store_true")
    p.set_defaults(func=cmd_metrics)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
