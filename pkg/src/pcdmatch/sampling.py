"""Edge-graph geodesic distances and vertex sampling (FPS / random)."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

FPS_EUCLIDEAN = "fps_euclidean"
FPS_GEODESIC = "fps_geodesic"
RANDOM = "random"


@dataclass(frozen=True)
class GeodesicField:
    """Single-source shortest-path distances along mesh edges."""

    source: int
    distances: np.ndarray


@dataclass(frozen=True)
class SampleSet:
    """Distinct vertex indices chosen by one of the sampling methods."""

    indices: np.ndarray
    method: str

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("sample indices must be 1-D")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("sample indices must be distinct")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def q(self):
        return self.indices.shape[0]


def geodesic_from(mesh, source):
    """Exact single-source Dijkstra over the length-weighted edge graph."""
    dist = csgraph.dijkstra(mesh.edge_graph(), directed=True, indices=source)
    return GeodesicField(source=int(source), distances=dist)


def geodesic_block(mesh, sources):
    """Rows of geodesic distances for several sources: (len(sources), n)."""
    sources = np.asarray(sources, dtype=np.int64)
    return csgraph.dijkstra(mesh.edge_graph(), directed=True, indices=sources)


def all_pairs_geodesic(mesh):
    """Dense (n, n) geodesic distance matrix; quadratic memory, desk scale."""
    return csgraph.dijkstra(mesh.edge_graph(), directed=True)


def floyd_warshall_oracle(mesh):
    """Independent all-pairs oracle (Floyd-Warshall) for small meshes."""
    return csgraph.floyd_warshall(mesh.edge_graph(), directed=False)


def farthest_point_sampling(mesh, q, metric="euclidean", seed_vertex=0):
    """Greedy max-min sampling of q vertices.

    Starting from ``seed_vertex``, repeatedly add the vertex farthest from
    the current sample set; ties pick the lowest index. Deterministic.

    Parameters
    ----------
    metric : {'euclidean', 'geodesic'}
        Distance used for the max-min criterion.
    """
    n = mesh.n_vertices
    if not 1 <= q <= n:
        raise ValueError(f"need 1 <= q <= n, got q={q}, n={n}")
    if metric not in ("euclidean", "geodesic"):
        raise ValueError(f"unknown FPS metric {metric!r}")
    seed_vertex = int(seed_vertex)

    if metric == "euclidean":
        pos = mesh.vertex_positions

        def dist_to(v):
            return np.linalg.norm(pos - pos[v], axis=1)

    else:

        def dist_to(v):
            return geodesic_from(mesh, v).distances

    chosen = np.empty(q, dtype=np.int64)
    chosen[0] = seed_vertex
    min_dist = dist_to(seed_vertex)
    min_dist[seed_vertex] = -np.inf
    for i in range(1, q):
        nxt = int(np.argmax(min_dist))
        chosen[i] = nxt
        min_dist = np.minimum(min_dist, dist_to(nxt))
        min_dist[chosen[: i + 1]] = -np.inf
    method = FPS_EUCLIDEAN if metric == "euclidean" else FPS_GEODESIC
    return SampleSet(indices=chosen, method=method)


def random_sampling(mesh, q, rng_seed):
    """q distinct uniform vertex draws, reproducible from the seed."""
    n = mesh.n_vertices
    if not 1 <= q <= n:
        raise ValueError(f"need 1 <= q <= n, got q={q}, n={n}")
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(n, size=q, replace=False)
    return SampleSet(indices=idx, method=RANDOM)


def coverage_radius(mesh, samples, metric="euclidean"):
    """Max over vertices of the distance to the nearest sample."""
    if metric == "euclidean":
        pos = mesh.vertex_positions
        d = np.linalg.norm(pos[:, None, :] - pos[samples.indices][None, :, :], axis=2)
        nearest = d.min(axis=1)
    else:
        block = geodesic_block(mesh, samples.indices)
        nearest = block.min(axis=0)
    return float(nearest.max())
