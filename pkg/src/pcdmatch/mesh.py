"""Triangle meshes, per-vertex lumped areas and area normalization."""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import TopologyError

# Triangles with area below this fraction of the total are rejected at load.
DEGENERATE_AREA_REL = 1e-12


def _triangle_areas(positions, triangles):
    p0 = positions[triangles[:, 0]]
    p1 = positions[triangles[:, 1]]
    p2 = positions[triangles[:, 2]]
    cross = np.cross(p1 - p0, p2 - p0)
    return 0.5 * np.linalg.norm(cross, axis=1)


class TriMesh:
    """Immutable triangle mesh.

    Parameters
    ----------
    vertex_positions : (n, 3) array_like
        3D coordinates, one row per vertex.
    triangles : (m, 3) array_like
        0-based vertex indices, one row per triangle.

    Attributes
    ----------
    vertex_positions : (n, 3) float64 array
    triangles : (m, 3) int64 array
    edges : (e, 2) int64 array
        Undirected edges (u < v), each triangle edge stored once.
    edge_lengths : (e,) float64 array
    triangle_areas : (m,) float64 array

    Raises
    ------
    TopologyError
        On out-of-range indices, repeated indices within a triangle,
        (near-)degenerate triangles, or a disconnected mesh.
    """

    def __init__(self, vertex_positions, triangles):
        v = np.ascontiguousarray(vertex_positions, dtype=np.float64)
        t = np.ascontiguousarray(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise TopologyError(f"vertex array must be (n, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise TopologyError(f"triangle array must be (m, 3), got {t.shape}")
        if t.shape[0] == 0:
            raise TopologyError("mesh has no triangles")
        if not np.all(np.isfinite(v)):
            raise TopologyError("non-finite vertex coordinates")
        n = v.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise TopologyError(
                f"triangle index out of range [0, {n}): found {t.min()}..{t.max()}"
            )
        same = (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
        if same.any():
            raise TopologyError(f"{same.sum()} triangle(s) with repeated vertex indices")

        areas = _triangle_areas(v, t)
        total = float(areas.sum())
        if total <= 0.0:
            raise TopologyError("mesh has zero total area")
        degenerate = areas <= DEGENERATE_AREA_REL * total
        if degenerate.any():
            raise TopologyError(f"{degenerate.sum()} degenerate triangle(s)")

        # Undirected edge set: union of triangle edges, each stored once.
        pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        pairs = np.sort(pairs, axis=1)
        edges = np.unique(pairs, axis=0)
        lengths = np.linalg.norm(v[edges[:, 0]] - v[edges[:, 1]], axis=1)

        adj = sparse.coo_matrix(
            (np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n)
        )
        n_comp, _ = csgraph.connected_components(adj, directed=False)
        if n_comp != 1:
            raise TopologyError(f"mesh is disconnected ({n_comp} components)")

        for a in (v, t, edges, lengths, areas):
            a.setflags(write=False)
        self.vertex_positions = v
        self.triangles = t
        self.edges = edges
        self.edge_lengths = lengths
        self.triangle_areas = areas
        self._total_area = total

    @property
    def n_vertices(self):
        return self.vertex_positions.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def total_area(self):
        return self._total_area

    def edge_graph(self):
        """Sparse symmetric adjacency weighted by Euclidean edge length."""
        u, w = self.edges, self.edge_lengths
        i = np.concatenate([u[:, 0], u[:, 1]])
        j = np.concatenate([u[:, 1], u[:, 0]])
        d = np.concatenate([w, w])
        return sparse.csr_matrix((d, (i, j)), shape=(self.n_vertices,) * 2)

    def __repr__(self):
        return f"TriMesh(n={self.n_vertices}, m={self.n_triangles})"


@dataclass(frozen=True)
class MassMatrix:
    """Diagonal per-vertex area weights (barycentric lumping).

    ``diagonal_areas[i]`` is one third of the total area of the triangles
    incident to vertex ``i``; entries sum to the surface area.
    """

    diagonal_areas: np.ndarray
    total_area: float

    def __post_init__(self):
        a = np.asarray(self.diagonal_areas, dtype=np.float64)
        if a.ndim != 1:
            raise TopologyError("mass diagonal must be 1-D")
        if not np.all(a > 0):
            raise TopologyError("mass matrix entries must be strictly positive")
        s = float(a.sum())
        if abs(s - self.total_area) > 1e-9 * max(abs(self.total_area), 1e-300):
            raise TopologyError(
                f"mass entries sum to {s}, expected total area {self.total_area}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "diagonal_areas", a)

    @property
    def n(self):
        return self.diagonal_areas.shape[0]

    def as_sparse(self):
        return sparse.diags(self.diagonal_areas, format="csr")


def lumped_mass(mesh):
    """Barycentric lumped mass: vertex i gets 1/3 of its incident triangle areas."""
    areas = np.zeros(mesh.n_vertices)
    np.add.at(areas, mesh.triangles.ravel(), np.repeat(mesh.triangle_areas / 3.0, 3))
    return MassMatrix(diagonal_areas=areas, total_area=float(mesh.triangle_areas.sum()))


def normalize_to_unit_area(mesh):
    """Uniformly rescale vertex positions so the total surface area is 1."""
    scale = 1.0 / np.sqrt(mesh.total_area)
    return TriMesh(mesh.vertex_positions * scale, mesh.triangles)
