"""Correspondence accuracy and embedding-quality metrics."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .sampling import all_pairs_geodesic, geodesic_block

DEFAULT_EGDC_NEIGHBORS = 80
DEFAULT_MGD_NEIGHBORS = 10


@dataclass
class EvalReport:
    """Per-vertex geodesic errors of a map plus summary quantities."""

    per_vertex_error: np.ndarray
    age: float
    cumulative_curve: np.ndarray  # (t, 2): threshold, fraction
    discr: np.ndarray | None = None
    egdc: np.ndarray | None = None
    mgd: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        err = np.asarray(self.per_vertex_error, dtype=np.float64)
        if err.size and err.min() < 0:
            raise ValueError("negative geodesic error")
        curve = np.asarray(self.cumulative_curve, dtype=np.float64)
        if curve.size:
            frac = curve[:, 1]
            if np.any(np.diff(frac) < 0) or frac.min() < 0 or frac.max() > 1:
                raise ValueError("cumulative curve must be nondecreasing in [0, 1]")
        self.per_vertex_error = err
        self.cumulative_curve = curve


def geodesic_error(pred, gt, mesh_m, geo=None):
    """Geodesic distance on the target mesh between predicted and true
    images, per source vertex. Ground-truth entries of -1 are skipped, so
    the output length equals the number of scored vertices."""
    if pred.n_source != gt.n_source:
        raise DimensionMismatch(
            f"maps score different sources: {pred.n_source} vs {gt.n_source}"
        )
    if pred.n_target != mesh_m.n_vertices or gt.n_target != mesh_m.n_vertices:
        raise DimensionMismatch("maps do not target the scoring mesh")
    valid = gt.assignment >= 0
    gt_img = gt.assignment[valid]
    pred_img = pred.assignment[valid]
    if gt_img.size == 0:
        return np.zeros(0)
    sources, inverse = np.unique(gt_img, return_inverse=True)
    if geo is None:
        dist = geodesic_block(mesh_m, sources)
    else:
        dist = geo[sources]
    return dist[inverse, pred_img]


def age(errors):
    """Average geodesic error (arithmetic mean)."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise ValueError("cannot average an empty error vector")
    return float(errors.mean())


def relative_error(age_ours, age_baseline):
    """Signed relative gap (ours - baseline) / baseline."""
    if age_baseline == 0:
        raise ZeroDivisionError("baseline average error is zero")
    return (age_ours - age_baseline) / age_baseline


def mean_relative_error(ages_ours, ages_baseline):
    """Mean of per-pair relative errors (not the ratio of mean errors)."""
    return float(
        np.mean([relative_error(o, b) for o, b in zip(ages_ours, ages_baseline, strict=True)])
    )


def cumulative_curve(errors, thresholds):
    """Fraction of errors at or below each threshold; (t, 2) array."""
    errors = np.asarray(errors, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be ascending")
    if errors.size == 0:
        raise ValueError("cannot build a curve from no errors")
    frac = np.searchsorted(np.sort(errors), thresholds, side="right") / errors.size
    return np.stack([thresholds, frac], axis=1)


def _embedding_neighbors(emb, count, chunk=256):
    """Indices of the `count` nearest rows (self excluded) for every row,
    nearest first; ties resolved toward lower indices."""
    n = emb.shape[0]
    out = np.empty((n, count), dtype=np.int64)
    sq = np.einsum("ij,ij->i", emb, emb)
    for start in range(0, n, chunk):
        block = emb[start : start + chunk]
        d = sq[None, :] - 2.0 * (block @ emb.T) + sq[start : start + chunk, None]
        d[np.arange(block.shape[0]), np.arange(start, start + block.shape[0])] = np.inf
        order = np.argsort(d, axis=1, kind="stable")
        out[start : start + chunk] = order[:, :count]
    return out


def discrimination_power(basis, mesh, geo=None):
    """Embedding distance to the nearest-embedded other vertex, divided by
    the geodesic distance to it. Low values mean the basis confuses
    geodesically distant vertices."""
    emb = basis.atoms
    if emb.shape[1] < 2:
        raise DimensionMismatch("need at least 2 atoms")
    nearest = _embedding_neighbors(emb, 1)[:, 0]
    num = np.linalg.norm(emb - emb[nearest], axis=1)
    if geo is None:
        geo = all_pairs_geodesic(mesh)
    den = geo[np.arange(mesh.n_vertices), nearest]
    return num / den


def _pearson_rows(x, y):
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    num = np.einsum("ij,ij->i", xc, yc)
    den = np.sqrt(np.einsum("ij,ij->i", xc, xc) * np.einsum("ij,ij->i", yc, yc))
    out = np.zeros(x.shape[0])
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def egdc(basis, mesh, s=DEFAULT_EGDC_NEIGHBORS, geo=None):
    """Per-vertex correlation between embedding and geodesic distances over
    the s embedding-nearest vertices. Higher is better; degenerate
    (zero-variance) neighborhoods score 0."""
    n = mesh.n_vertices
    if not 1 <= s < n:
        raise ValueError(f"need 1 <= s < n, got s={s}, n={n}")
    emb = basis.atoms
    nbr = _embedding_neighbors(emb, s)
    if geo is None:
        geo = all_pairs_geodesic(mesh)
    rows = np.arange(n)[:, None]
    geo_d = geo[rows, nbr]
    emb_d = np.linalg.norm(emb[:, None, :] - emb[nbr], axis=2)
    return _pearson_rows(geo_d, emb_d)


def mgd(basis, mesh, t=DEFAULT_MGD_NEIGHBORS, geo=None):
    """Mean geodesic distance of the t embedding-nearest vertices, relative
    to that of the t geodesically-nearest ones. Always >= 1; 1 means the
    embedding neighborhoods coincide with geodesic ones."""
    n = mesh.n_vertices
    if not 1 <= t < n:
        raise ValueError(f"need 1 <= t < n, got t={t}, n={n}")
    emb = basis.atoms
    nbr = _embedding_neighbors(emb, t)
    if geo is None:
        geo = all_pairs_geodesic(mesh)
    rows = np.arange(n)[:, None]
    emb_side = geo[rows, nbr].mean(axis=1)
    geo_self = geo.copy()
    np.fill_diagonal(geo_self, np.inf)
    smallest = np.partition(geo_self, t - 1, axis=1)[:, :t]
    return emb_side / smallest.mean(axis=1)


def evaluate_map(pred, gt, mesh_m, thresholds, geo=None, metadata=None):
    """Bundle the standard accuracy quantities into an EvalReport."""
    errors = geodesic_error(pred, gt, mesh_m, geo=geo)
    return EvalReport(
        per_vertex_error=errors,
        age=age(errors),
        cumulative_curve=cumulative_curve(errors, thresholds),
        metadata=metadata or {},
    )


def export_csv(report, path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        cols = ["vertex", "error"]
        extras = [
            (name, getattr(report, name))
            for name in ("discr", "egdc", "mgd")
            if getattr(report, name) is not None
        ]
        cols += [name for name, _ in extras]
        writer.writerow(cols)
        for i, e in enumerate(report.per_vertex_error):
            row = [i, f"{e:.17g}"] + [f"{vals[i]:.17g}" for _, vals in extras]
            writer.writerow(row)


def export_json_summary(report, path):
    summary = {
        "age": report.age,
        "n_scored": int(report.per_vertex_error.size),
        "curve": [[float(t), float(fr)] for t, fr in report.cumulative_curve],
        "metadata": report.metadata,
    }
    for name in ("discr", "egdc", "mgd"):
        vals = getattr(report, name)
        if vals is not None:
            summary[f"mean_{name}"] = float(np.mean(vals))
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
