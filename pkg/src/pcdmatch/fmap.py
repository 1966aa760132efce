"""Functional maps: construction from assignments, descriptor-based
estimation with product preservation, point-wise conversion, and the
iterative upsampling refinement."""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, lsmr

from .errors import DimensionMismatch, SingularSystem
from .sampling import geodesic_block

DEFAULT_LANDMARK_SIGMA = 0.01
DEFAULT_PRODUCT_WEIGHT = 1.0
DEFAULT_K_INI = 16
DEFAULT_STEP = 2


@dataclass(frozen=True)
class PointwiseMap:
    """Vertex assignment T: V_source -> V_target, one target index per
    source vertex. Entries of -1 mark vertices without a known image
    (sparse ground truth)."""

    assignment: np.ndarray
    n_target: int
    source_name: str = ""
    target_name: str = ""

    def __post_init__(self):
        a = np.ascontiguousarray(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise DimensionMismatch("assignment must be 1-D")
        if a.size and (a.min() < -1 or a.max() >= self.n_target):
            raise DimensionMismatch(
                f"assignment entries must be in [-1, {self.n_target}), "
                f"found {a.min()}..{a.max()}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def n_source(self):
        return self.assignment.shape[0]

    @classmethod
    def identity(cls, n):
        return cls(assignment=np.arange(n, dtype=np.int64), n_target=n)


@dataclass(frozen=True)
class FunctionalMap:
    """k x k matrix relating coefficients in basis_m to basis_n
    (b = C a for a on the target mesh M, b on the source mesh N)."""

    C: np.ndarray
    basis_m: object
    basis_n: object

    def __post_init__(self):
        C = np.ascontiguousarray(self.C, dtype=np.float64)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise DimensionMismatch(f"C must be square, got {C.shape}")
        if not np.all(np.isfinite(C)):
            raise DimensionMismatch("C contains non-finite entries")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @property
    def k(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class Landmarks:
    """Pairs of vertices in known correspondence: (source N, target M)."""

    pairs: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pairs, dtype=np.int64)
        if p.ndim != 2 or p.shape[1] != 2:
            raise DimensionMismatch("landmark pairs must be (L, 2)")
        if len(np.unique(p[:, 0])) != p.shape[0]:
            raise DimensionMismatch("duplicate source-side landmark vertex")
        p.setflags(write=False)
        object.__setattr__(self, "pairs", p)

    @property
    def count(self):
        return self.pairs.shape[0]


def fmap_from_pointwise(pmap, basis_m, basis_n, mass_n):
    """Functional map induced by a vertex assignment T: N -> M.

    Pull back the target atoms through T and project them onto the source
    basis with the source-side inner product: C = Phi_N' A_N Phi_M[T].
    For the identity self-map with a shared basis this returns I.
    """
    phi_m, phi_n = basis_m.atoms, basis_n.atoms
    if pmap.n_source != phi_n.shape[0] or pmap.n_target != phi_m.shape[0]:
        raise DimensionMismatch(
            f"map ({pmap.n_source}->{pmap.n_target}) does not fit bases "
            f"({phi_n.shape[0]}, {phi_m.shape[0]})"
        )
    if phi_m.shape[1] != phi_n.shape[1]:
        raise DimensionMismatch("bases must have matching k")
    if np.any(pmap.assignment < 0):
        raise DimensionMismatch("assignment has unmapped vertices")
    pulled = phi_m[pmap.assignment]
    C = phi_n.T @ (mass_n.diagonal_areas[:, None] * pulled)
    return FunctionalMap(C=C, basis_m=basis_m, basis_n=basis_n)


def nearest_neighbor_assign(queries, data, use_kdtree=False):
    """Index of the closest data row for every query row; ties pick the
    lowest index. The KD-tree path must agree with the exact search."""
    if use_kdtree:
        from scipy.spatial import cKDTree

        _, idx = cKDTree(data).query(queries, k=1)
        return np.asarray(idx, dtype=np.int64)
    out = np.empty(queries.shape[0], dtype=np.int64)
    data_sq = np.einsum("ij,ij->i", data, data)
    chunk = max(1, int(2**22 // max(data.shape[0], 1)))
    for start in range(0, queries.shape[0], chunk):
        block = queries[start : start + chunk]
        d = data_sq[None, :] - 2.0 * (block @ data.T)
        out[start : start + chunk] = np.argmin(d, axis=1)
    return out


def pointwise_from_fmap(fmap, use_kdtree=False):
    """Convert a functional map to a vertex assignment by nearest-neighbor
    matching of the per-vertex coefficient embeddings."""
    queries = fmap.basis_n.atoms
    data = fmap.basis_m.atoms @ fmap.C.T
    assignment = nearest_neighbor_assign(queries, data, use_kdtree=use_kdtree)
    return PointwiseMap(assignment=assignment, n_target=data.shape[0])


def landmark_functions(mesh, vertices, sigma=DEFAULT_LANDMARK_SIGMA):
    """Narrow geodesic Gaussians marking landmark vertices, one column each."""
    geo = geodesic_block(mesh, np.asarray(vertices, dtype=np.int64))
    return np.exp(-(geo.T ** 2) / sigma)


def multiplication_operators(basis, mass, functions):
    """k x k operators of point-wise multiplication by each function column,
    expressed in the basis: Phi' A diag(f) Phi."""
    phi = basis.atoms
    pta = (mass.diagonal_areas[:, None] * phi).T  # (k, n)
    ops = np.empty((functions.shape[1], phi.shape[1], phi.shape[1]))
    for c in range(functions.shape[1]):
        ops[c] = pta @ (functions[:, c : c + 1] * phi)
    return ops


def estimate_fmap_product_preservation(
    mesh_m,
    mesh_n,
    desc_m,
    desc_n,
    landmarks,
    basis_m,
    basis_n,
    mass_m,
    mass_n,
    w_prod=DEFAULT_PRODUCT_WEIGHT,
    landmark_sigma=DEFAULT_LANDMARK_SIGMA,
    tol=1e-8,
):
    """Estimate C from descriptor and landmark constraints, additionally
    preserving point-wise products of the constraint functions.

    Minimizes ``|C A_hat - B_hat|^2 + w_prod * sum_f |C Xf - Yf C|^2`` where
    A_hat/B_hat are basis coefficients of the constraint functions
    (descriptor channels plus narrow landmark Gaussians) and Xf/Yf are their
    multiplication operators. Each term is normalized by its own scale; the
    least-squares problem over C is solved iteratively to ``tol`` on the
    normal-equation residual.
    """
    desc_m = np.atleast_2d(np.asarray(desc_m, dtype=np.float64))
    desc_n = np.atleast_2d(np.asarray(desc_n, dtype=np.float64))
    if desc_m.shape[0] != mesh_m.n_vertices:
        raise DimensionMismatch("descriptor rows must match mesh M vertices")
    if desc_n.shape[0] != mesh_n.n_vertices:
        raise DimensionMismatch("descriptor rows must match mesh N vertices")
    if desc_m.shape[1] != desc_n.shape[1]:
        raise DimensionMismatch("descriptor channel counts differ")

    f_m, f_n = desc_m, desc_n
    if landmarks is not None and landmarks.count:
        f_m = np.hstack([f_m, landmark_functions(mesh_m, landmarks.pairs[:, 1], landmark_sigma)])
        f_n = np.hstack([f_n, landmark_functions(mesh_n, landmarks.pairs[:, 0], landmark_sigma)])
    if f_m.shape[1] == 0:
        raise SingularSystem("no constraint functions")

    k = basis_m.atoms.shape[1]
    a_hat = basis_m.atoms.T @ (mass_m.diagonal_areas[:, None] * f_m)  # (k, d)
    b_hat = basis_n.atoms.T @ (mass_n.diagonal_areas[:, None] * f_n)
    a_scale = np.linalg.norm(a_hat)
    if a_scale == 0.0:
        raise SingularSystem("all-zero constraint coefficients")
    a_hat = a_hat / a_scale
    b_hat = b_hat / a_scale

    if w_prod > 0:
        ops_m = multiplication_operators(basis_m, mass_m, f_m)
        ops_n = multiplication_operators(basis_n, mass_n, f_n)
        p_scale = np.sqrt(np.einsum("fij,fij->", ops_m, ops_m))
        if p_scale == 0.0:
            raise SingularSystem("all-zero multiplication operators")
        factor = np.sqrt(w_prod) / p_scale
        ops_m = ops_m * factor
        ops_n = ops_n * factor
    else:
        ops_m = ops_n = np.zeros((0, k, k))

    d = a_hat.shape[1]
    n_rows = k * d + ops_m.shape[0] * k * k

    ops_m_t = ops_m.transpose(0, 2, 1).copy()
    ops_n_t = ops_n.transpose(0, 2, 1).copy()

    def matvec(vec):
        C = vec.reshape(k, k)
        data = C @ a_hat
        if ops_m.shape[0]:
            comm = C @ ops_m - ops_n @ C
            return np.concatenate([data.ravel(), comm.ravel()])
        return data.ravel()

    def rmatvec(vec):
        G = vec[: k * d].reshape(k, d)
        out = G @ a_hat.T
        if ops_m.shape[0]:
            H = vec[k * d :].reshape(-1, k, k)
            out = out + (H @ ops_m_t).sum(axis=0)
            out = out - (ops_n_t @ H).sum(axis=0)
        return out.ravel()

    op = LinearOperator((n_rows, k * k), matvec=matvec, rmatvec=rmatvec)
    rhs = np.concatenate([b_hat.ravel(), np.zeros(n_rows - k * d)])
    sol = lsmr(op, rhs, atol=tol * 1e-2, btol=tol * 1e-2, maxiter=3000)
    C = sol[0].reshape(k, k)
    return FunctionalMap(C=C, basis_m=basis_m, basis_n=basis_n)


def zoomout_refine(initial, basis_m, basis_n, mass_n, k_final, step=DEFAULT_STEP):
    """Grow a functional map by alternating point-wise conversion and
    re-projection at increasing size, from the initial k up to k_final.

    Returns
    -------
    (FunctionalMap, PointwiseMap)
        The final map of size k_final and its point-wise conversion.
    """
    k = initial.k
    if k > k_final:
        raise DimensionMismatch(f"initial size {k} exceeds k_final={k_final}")
    if basis_m.atoms.shape[1] < k_final or basis_n.atoms.shape[1] < k_final:
        raise DimensionMismatch("bases hold fewer than k_final atoms")
    if step < 1:
        raise ValueError("step must be >= 1")
    fmap = initial
    while k < k_final:
        pmap = pointwise_from_fmap(fmap)
        k = min(k + step, k_final)
        fmap = fmap_from_pointwise(
            pmap, basis_m.truncated(k), basis_n.truncated(k), mass_n
        )
    return fmap, pointwise_from_fmap(fmap)
