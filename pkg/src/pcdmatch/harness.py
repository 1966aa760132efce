"""Config-driven experiment runner: build bases, run matching pipelines
over mesh pairs, sweep parameters, emit reports."""

import csv
import json
import os
import traceback
from dataclasses import dataclass, field

import numpy as np

from . import basis as basis_mod
from . import dictionaries as dict_mod
from . import fileio, metrics
from .fmap import (
    FunctionalMap,
    Landmarks,
    PointwiseMap,
    estimate_fmap_product_preservation,
    fmap_from_pointwise,
    pointwise_from_fmap,
    zoomout_refine,
)
from .mesh import lumped_mass, normalize_to_unit_area
from .sampling import farthest_point_sampling, random_sampling
from .spectral import cotangent_laplacian, eigenbasis

PIPELINES = ("gt", "no17", "zoomout")
BASIS_KINDS = ("lb", "pcgau", "adapt", "heat", "spec", "wks", "wksgau", "wave")

DEFAULT_CURVE_THRESHOLDS = np.linspace(0.0, 0.25, 51)


@dataclass
class PairSpec:
    mesh_m: str
    mesh_n: str
    gt_map: str | None = None
    landmarks: str | None = None
    name: str = ""

    def __post_init__(self):
        if not self.name:
            self.name = (
                os.path.splitext(os.path.basename(self.mesh_n))[0]
                + "__"
                + os.path.splitext(os.path.basename(self.mesh_m))[0]
            )


@dataclass
class ExperimentConfig:
    """Everything a run needs; see README for the JSON schema."""

    pairs: list = field(default_factory=list)
    basis: dict = field(default_factory=lambda: {"kind": "pcgau"})
    pipeline: str = "gt"
    k: int = 60
    k_ini: int = 16
    step: int = 2
    sigma_grid: list = field(default_factory=list)
    q_grid: list = field(default_factory=list)
    seed: int = 0
    out_dir: str | None = None
    one_based_maps: bool = False
    wks_scales: int = 100
    w_prod: float = 1.0
    landmark_sigma: float = 0.01
    curve_thresholds: list = field(default_factory=lambda: DEFAULT_CURVE_THRESHOLDS.tolist())
    emit_ply: bool = False

    def __post_init__(self):
        self.pairs = [p if isinstance(p, PairSpec) else PairSpec(**p) for p in self.pairs]
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        if self.basis.get("kind", "pcgau") not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.basis.get('kind')!r}")
        if self.pipeline == "zoomout" and self.k_ini > self.k:
            raise ValueError(f"k_ini={self.k_ini} exceeds k={self.k}")
        for p in self.pairs:
            for path in (p.mesh_m, p.mesh_n, p.gt_map, p.landmarks):
                if path is not None and not os.path.exists(path):
                    raise FileNotFoundError(path)

    @classmethod
    def from_json(cls, path, **overrides):
        with open(path) as f:
            data = json.load(f)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


class MeshBundle:
    """A loaded, unit-area mesh with its operators and cached spectra."""

    def __init__(self, mesh, seed=0):
        self.mesh = normalize_to_unit_area(mesh)
        self.mass = lumped_mass(self.mesh)
        self.lap = cotangent_laplacian(self.mesh, self.mass)
        self.seed = seed
        self._eigen = None
        self._samples = {}
        self._geo = None

    @classmethod
    def load(cls, path, seed=0):
        return cls(fileio.load_mesh(path), seed=seed)

    @property
    def n(self):
        return self.mesh.n_vertices

    def eigen(self, k):
        if self._eigen is None or self._eigen.k < k:
            self._eigen = eigenbasis(self.lap, k)
        return self._eigen.truncated(k)

    def samples(self, q, method="fps", seed=None):
        q = min(q, self.n)
        key = (q, method, seed)
        if key not in self._samples:
            if method == "fps":
                self._samples[key] = farthest_point_sampling(self.mesh, q)
            elif method == "random":
                self._samples[key] = random_sampling(
                    self.mesh, q, self.seed if seed is None else seed
                )
            else:
                raise ValueError(f"unknown sampling method {method!r}")
        return self._samples[key]

    def geodesics(self):
        if self._geo is None:
            from .sampling import all_pairs_geodesic

            self._geo = all_pairs_geodesic(self.mesh)
        return self._geo


def build_basis(bundle, spec, k):
    """Construct the requested basis on a mesh bundle.

    ``spec`` keys: kind (lb|pcgau|adapt|heat|spec|wks|wksgau|wave), sigma,
    q, t, alpha, wks_scales, sampling (fps|random), normalize.
    """
    kind = spec.get("kind", "pcgau")
    if kind == "lb":
        return basis_mod.Basis.from_eigen(bundle.eigen(k))
    sigma = spec.get("sigma", dict_mod.DEFAULT_SIGMA)
    q = spec.get("q", dict_mod.DEFAULT_Q)
    sampling = spec.get("sampling", "fps")
    normalize = spec.get("normalize", True)
    # Spectral recipes follow their stated defaults: k atoms in the sums,
    # 60 for the width-adaptation error, a taller basis for wave-kernel
    # scales so the products stay informative.
    if kind in ("pcgau", "wksgau"):
        samples = bundle.samples(q, sampling, spec.get("sample_seed"))
        d = dict_mod.gaussian_dictionary(bundle.mesh, samples, sigma)
        if kind == "wksgau":
            wks = dict_mod.wks_dictionary(
                bundle.mesh,
                bundle.eigen(_wks_depth(bundle, spec)),
                dict_mod.WksParams(spec.get("wks_scales", 100)),
            )
            d = dict_mod.concat_dictionaries(d, wks)
    elif kind == "wks":
        # A WKS-only dictionary needs a denser energy sampling and a taller
        # spectrum than the descriptor defaults: 100 broad scales have
        # numerical rank well below k=60.
        d = dict_mod.wks_dictionary(
            bundle.mesh,
            bundle.eigen(_wks_depth(bundle, spec)),
            dict_mod.WksParams(spec.get("wks_basis_scales", 500)),
        )
    elif kind == "adapt":
        samples = bundle.samples(q, sampling, spec.get("sample_seed"))
        d = dict_mod.adaptive_gaussian_dictionary(
            bundle.mesh, samples, sigma, bundle.eigen(min(60, bundle.n - 1)), bundle.mass
        )
    elif kind == "heat":
        samples = bundle.samples(q, sampling, spec.get("sample_seed"))
        d = dict_mod.heat_dictionary(
            bundle.mesh, samples, _kernel_eigen(bundle, spec, k),
            spec.get("t", dict_mod.DEFAULT_HEAT_TIME)
        )
    elif kind == "spec":
        samples = bundle.samples(q, sampling, spec.get("sample_seed"))
        d = dict_mod.spec_dictionary(
            bundle.mesh, samples, _kernel_eigen(bundle, spec, k),
            spec.get("alpha", dict_mod.DEFAULT_SPEC_ALPHA)
        )
    elif kind == "wave":
        samples = bundle.samples(q, sampling, spec.get("sample_seed"))
        d = dict_mod.wave_dictionary(
            bundle.mesh, samples, _kernel_eigen(bundle, spec, k),
            spec.get("t", dict_mod.DEFAULT_WAVE_TIME)
        )
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    return basis_mod.pcd(d, bundle.mass, k=k, normalize=normalize)


def _wks_depth(bundle, spec):
    return min(spec.get("wks_eigen", 250), bundle.n - 1)


def _kernel_eigen(bundle, spec, k):
    """Spectral depth for kernel dictionaries: deeper than k, so the
    dictionary's span comfortably exceeds the requested basis size."""
    depth = spec.get("kernel_eigen", max(100, k + 40))
    return bundle.eigen(min(depth, bundle.n - 1))


def wks_descriptor(bundle, scales, k_eigen=150):
    eig = bundle.eigen(min(k_eigen, bundle.n - 1))
    d = dict_mod.wks_dictionary(bundle.mesh, eig, dict_mod.WksParams(scales))
    return d.atoms


def run_pipeline(config, bundle_m, bundle_n, basis_m, basis_n, gt=None, landmarks=None):
    """Produce a point-wise map N -> M with the configured pipeline."""
    if config.pipeline == "gt":
        if gt is None:
            raise ValueError("gt pipeline requires a ground-truth map")
        fmap = fmap_from_pointwise(gt, basis_m, basis_n, bundle_n.mass)
        return pointwise_from_fmap(fmap), fmap

    if landmarks is None:
        raise ValueError(f"{config.pipeline} pipeline requires landmarks")
    desc_m = wks_descriptor(bundle_m, config.wks_scales)
    desc_n = wks_descriptor(bundle_n, config.wks_scales)
    k_est = config.k_ini if config.pipeline == "zoomout" else config.k
    fmap = estimate_fmap_product_preservation(
        bundle_m.mesh,
        bundle_n.mesh,
        desc_m,
        desc_n,
        landmarks,
        basis_m.truncated(k_est),
        basis_n.truncated(k_est),
        bundle_m.mass,
        bundle_n.mass,
        w_prod=config.w_prod,
        landmark_sigma=config.landmark_sigma,
    )
    if config.pipeline == "no17":
        return pointwise_from_fmap(fmap), fmap
    fmap, pmap = zoomout_refine(
        fmap, basis_m, basis_n, bundle_n.mass, k_final=config.k, step=config.step
    )
    return pmap, fmap


def run_pair(config, pair, bundles=None):
    """End-to-end evaluation of one mesh pair; deterministic given the seed."""
    if bundles is None:
        bundle_m = MeshBundle.load(pair.mesh_m, seed=config.seed)
        bundle_n = MeshBundle.load(pair.mesh_n, seed=config.seed)
    else:
        bundle_m, bundle_n = bundles
    basis_m = build_basis(bundle_m, config.basis, config.k)
    basis_n = build_basis(bundle_n, config.basis, config.k)

    gt = None
    if pair.gt_map is not None:
        assignment = fileio.read_pointwise_map(pair.gt_map, one_based=config.one_based_maps)
        gt = PointwiseMap(assignment=assignment, n_target=bundle_m.n)
    lm = None
    if pair.landmarks is not None:
        lm = Landmarks(fileio.read_landmarks(pair.landmarks, one_based=config.one_based_maps))

    pred, fmap = run_pipeline(config, bundle_m, bundle_n, basis_m, basis_n, gt, lm)
    if gt is None:
        return None, pred, fmap
    report = metrics.evaluate_map(
        pred,
        gt,
        bundle_m.mesh,
        np.asarray(config.curve_thresholds),
        metadata={"pair": pair.name, "basis": config.basis.get("kind"), "pipeline": config.pipeline},
    )
    return report, pred, fmap


def run_bench(config):
    """Run the configured pipeline over every pair; failures are recorded in
    an error manifest and do not stop the run."""
    results, failures = [], []
    for i, pair in enumerate(config.pairs):
        try:
            report, pred, _ = run_pair(config, pair)
            results.append((i, pair, report, pred))
        except Exception as exc:  # crash isolation per pair
            failures.append(
                {"pair": pair.name, "index": i, "error": f"{type(exc).__name__}: {exc}",
                 "traceback": traceback.format_exc()}
            )
    if config.out_dir:
        _write_bench_outputs(config, results, failures)
    return results, failures


def _write_bench_outputs(config, results, failures):
    os.makedirs(config.out_dir, exist_ok=True)
    summary = {"pipeline": config.pipeline, "basis": config.basis, "seed": config.seed,
               "pairs": []}
    for i, pair, report, pred in results:
        fileio.write_pointwise_map(os.path.join(config.out_dir, f"{i:03d}_{pair.name}.map"), pred.assignment)
        entry = {"index": i, "pair": pair.name}
        if report is not None:
            metrics.export_csv(report, os.path.join(config.out_dir, f"{i:03d}_{pair.name}.csv"))
            entry["age"] = report.age
        summary["pairs"].append(entry)
    ages = [e["age"] for e in summary["pairs"] if "age" in e]
    if ages:
        summary["mean_age"] = float(np.mean(ages))
    with open(os.path.join(config.out_dir, "summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    if failures:
        with open(os.path.join(config.out_dir, "errors.json"), "w") as f:
            json.dump(failures, f, indent=2)
            f.write("\n")


def run_sweep(config, parameter, grid):
    """Sweep sigma or q of the Gaussian-dictionary basis over the pair list.

    Reports per grid point the mean map error and the mean basis MGD, and
    selects the value minimizing MGD (a ground-truth-free criterion).
    """
    if parameter not in ("sigma", "q"):
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    if config.basis.get("kind", "pcgau") not in ("pcgau", "adapt"):
        raise ValueError("sweeps require a Gaussian-family basis")
    grid = list(grid)
    if not grid:
        raise ValueError("empty sweep grid")
    loaded = [
        (pair, MeshBundle.load(pair.mesh_m, config.seed), MeshBundle.load(pair.mesh_n, config.seed))
        for pair in config.pairs
    ]
    rows = []
    for value in grid:
        spec = dict(config.basis)
        spec[parameter] = value if parameter == "sigma" else int(value)
        ages, mgds = [], []
        for pair, bundle_m, bundle_n in loaded:
            basis_m = build_basis(bundle_m, spec, config.k)
            basis_n = build_basis(bundle_n, spec, config.k)
            for bundle, bas in ((bundle_m, basis_m), (bundle_n, basis_n)):
                mgds.append(float(np.mean(metrics.mgd(bas, bundle.mesh, geo=bundle.geodesics()))))
            if pair.gt_map is not None:
                assignment = fileio.read_pointwise_map(pair.gt_map, one_based=config.one_based_maps)
                gt = PointwiseMap(assignment=assignment, n_target=bundle_m.n)
                fmap = fmap_from_pointwise(gt, basis_m, basis_n, bundle_n.mass)
                pred = pointwise_from_fmap(fmap)
                err = metrics.geodesic_error(pred, gt, bundle_m.mesh, geo=bundle_m.geodesics())
                ages.append(metrics.age(err))
        rows.append({
            "value": float(value),
            "age": float(np.mean(ages)) if ages else None,
            "mgd": float(np.mean(mgds)),
        })
    best = min(rows, key=lambda r: r["mgd"])
    sweep = {"parameter": parameter, "rows": rows, "selected_value": best["value"]}
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, f"sweep_{parameter}.json"), "w") as f:
            json.dump(sweep, f, indent=2, sort_keys=True)
            f.write("\n")
        with open(os.path.join(config.out_dir, f"sweep_{parameter}.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["value", "age", "mgd"])
            for r in rows:
                w.writerow([r["value"], r["age"], r["mgd"]])
    return sweep


def compare_bases(config, basis_specs, baseline_kind="lb"):
    """Evaluate several bases on the same pairs: per-pair errors plus the
    mean relative error of each basis against the baseline."""
    if len(basis_specs) < 2:
        raise ValueError("need at least two bases to compare")
    loaded = [
        (pair, MeshBundle.load(pair.mesh_m, config.seed), MeshBundle.load(pair.mesh_n, config.seed))
        for pair in config.pairs
    ]
    table = {}  # kind -> list of ages in pair order
    for spec in basis_specs:
        kind = spec.get("kind", "pcgau")
        cfg = ExperimentConfig(**{**_config_dict(config), "basis": spec, "pairs": []})
        cfg.pairs = config.pairs
        ages = []
        for pair, bundle_m, bundle_n in loaded:
            report, _, _ = run_pair(cfg, pair, bundles=(bundle_m, bundle_n))
            ages.append(report.age if report else None)
        table[kind] = ages
    baseline = table.get(baseline_kind)
    comparison = {"pairs": [p.name for p in config.pairs], "ages": table, "mre": {}}
    if baseline and all(a is not None for a in baseline):
        for kind, ages in table.items():
            comparison["mre"][kind] = metrics.mean_relative_error(ages, baseline)
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        with open(os.path.join(config.out_dir, "comparison.csv"), "w", newline="") as f:
            w = csv.writer(f)
            kinds = [s.get("kind", "pcgau") for s in basis_specs]
            w.writerow(["pair"] + kinds)
            for i, pair in enumerate(config.pairs):
                w.writerow([pair.name] + [table[k][i] for k in kinds])
            if comparison["mre"]:
                w.writerow(["MRE_vs_" + baseline_kind] + [comparison["mre"].get(k) for k in kinds])
        with open(os.path.join(config.out_dir, "comparison.json"), "w") as f:
            json.dump(comparison, f, indent=2, sort_keys=True)
            f.write("\n")
    return comparison


def _config_dict(config):
    return {
        "basis": config.basis,
        "pipeline": config.pipeline,
        "k": config.k,
        "k_ini": config.k_ini,
        "step": config.step,
        "seed": config.seed,
        "one_based_maps": config.one_based_maps,
        "wks_scales": config.wks_scales,
        "w_prod": config.w_prod,
        "landmark_sigma": config.landmark_sigma,
        "curve_thresholds": config.curve_thresholds,
    }


def sample_pairs_from_manifest(manifest_path, n_pairs, seed):
    """Draw a reproducible list of pairs from a dataset manifest.

    The manifest is JSON: {"meshes": [...], "gt_maps": {"name__name": path}}
    or a list of {"mesh_m", "mesh_n", "gt_map"} entries to sample from.
    """
    with open(manifest_path) as f:
        manifest = json.load(f)
    rng = np.random.default_rng(seed)
    if isinstance(manifest, dict) and "pairs" in manifest:
        entries = manifest["pairs"]
        idx = rng.choice(len(entries), size=min(n_pairs, len(entries)), replace=False)
        return [PairSpec(**entries[i]) for i in idx]
    meshes = manifest["meshes"]
    gt_maps = manifest.get("gt_maps", {})
    combos = [(i, j) for i in range(len(meshes)) for j in range(len(meshes)) if i != j]
    idx = rng.choice(len(combos), size=min(n_pairs, len(combos)), replace=False)
    pairs = []
    for sel in idx:
        i, j = combos[sel]
        name_m = os.path.splitext(os.path.basename(meshes[i]))[0]
        name_n = os.path.splitext(os.path.basename(meshes[j]))[0]
        pairs.append(
            PairSpec(
                mesh_m=meshes[i],
                mesh_n=meshes[j],
                gt_map=gt_maps.get(f"{name_n}__{name_m}"),
            )
        )
    return pairs
