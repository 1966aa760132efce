"""Cotangent Laplace-Beltrami operator, truncated eigenbasis, heat kernel
and spectral filters."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence

from .errors import ConvergenceError, DimensionMismatch, NumericalError
from .mesh import lumped_mass

# Meshes at or below this size use the dense eigensolver path.
DENSE_EIGEN_THRESHOLD = 500


@dataclass(frozen=True)
class Laplacian:
    """Positive-semidefinite cotangent stiffness matrix plus its mass matrix.

    ``stiffness`` acts as minus the divergence of the gradient:
    off-diagonal entries are minus the half-cotangent edge weights and the
    diagonal makes every row sum to zero.
    """

    stiffness: sparse.csr_matrix
    mass: "MassMatrix"  # noqa: F821 - forward name only for docs

    @property
    def n(self):
        return self.stiffness.shape[0]


class EigenBasis:
    """Truncated generalized eigenbasis of the Laplacian.

    Attributes
    ----------
    atoms : (n, k) float64 array
        Eigenfunctions, orthonormal under the mass inner product.
    eigenvalues : (k,) float64 array
        Nonnegative, ascending.
    """

    def __init__(self, atoms, eigenvalues):
        atoms = np.ascontiguousarray(atoms, dtype=np.float64)
        eigenvalues = np.ascontiguousarray(eigenvalues, dtype=np.float64)
        if atoms.ndim != 2 or eigenvalues.shape != (atoms.shape[1],):
            raise DimensionMismatch("atoms must be (n, k) with k eigenvalues")
        atoms.setflags(write=False)
        eigenvalues.setflags(write=False)
        self.atoms = atoms
        self.eigenvalues = eigenvalues

    @property
    def k(self):
        return self.atoms.shape[1]

    @property
    def n(self):
        return self.atoms.shape[0]

    def truncated(self, k):
        if k > self.k:
            raise DimensionMismatch(f"cannot truncate k={self.k} basis to {k}")
        return EigenBasis(self.atoms[:, :k], self.eigenvalues[:k])


def cotangent_laplacian(mesh, mass=None):
    """Assemble the half-cotangent stiffness matrix of a mesh.

    Edge weight = sum over incident triangles of cot(opposite angle) / 2;
    the matrix carries -weight off-diagonal and row sums are zero.

    Raises
    ------
    NumericalError
        If any cotangent is non-finite (degenerate corner angle).
    """
    v, t = mesh.vertex_positions, mesh.triangles
    cots = []
    for corner in range(3):
        i = t[:, corner]
        j = t[:, (corner + 1) % 3]
        k = t[:, (corner + 2) % 3]
        u = v[j] - v[i]
        w = v[k] - v[i]
        cross = np.linalg.norm(np.cross(u, w), axis=1)
        cot = np.einsum("ij,ij->i", u, w) / cross
        cots.append((j, k, 0.5 * cot))
    weights = np.concatenate([c[2] for c in cots])
    if not np.all(np.isfinite(weights)):
        raise NumericalError("non-finite cotangent weight (degenerate angle)")

    rows = np.concatenate([c[0] for c in cots])
    cols = np.concatenate([c[1] for c in cots])
    n = mesh.n_vertices
    # Both orientations get identical contribution lists, so duplicate
    # summation produces an exactly symmetric matrix.
    off = sparse.coo_matrix(
        (
            np.concatenate([-weights, -weights]),
            (np.concatenate([rows, cols]), np.concatenate([cols, rows])),
        ),
        shape=(n, n),
    ).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    stiff = (off + sparse.diags(diag)).tocsr()
    if mass is None:
        mass = lumped_mass(mesh)
    return Laplacian(stiffness=stiff, mass=mass)


def _fix_signs(atoms):
    idx = np.argmax(np.abs(atoms), axis=0)
    flip = atoms[idx, np.arange(atoms.shape[1])] < 0
    atoms[:, flip] *= -1.0
    return atoms


def eigenbasis(lap, k, method="auto"):
    """First k generalized eigenpairs of (stiffness, mass), ascending.

    Parameters
    ----------
    lap : Laplacian
    k : int
        Number of atoms, k < n.
    method : {'auto', 'dense', 'iterative'}
        'auto' uses the dense path for n <= 500, shift-invert Lanczos above.

    Returns
    -------
    EigenBasis
        Atoms are mass-orthonormal; each atom's largest-magnitude entry is
        positive.
    """
    n = lap.n
    if not 1 <= k < n:
        raise DimensionMismatch(f"need 1 <= k < n, got k={k}, n={n}")
    a = lap.mass.diagonal_areas
    inv_sqrt_a = 1.0 / np.sqrt(a)
    scale = sparse.diags(inv_sqrt_a)
    sym = (scale @ lap.stiffness @ scale).tocsr()

    if method == "dense" or (method == "auto" and n <= DENSE_EIGEN_THRESHOLD):
        vals, vecs = scipy.linalg.eigh(sym.toarray())
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        # Deterministic start vector keeps repeated runs bit-identical.
        v0 = np.random.RandomState(0).standard_normal(n)
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                sym, k=k, sigma=-0.01, which="LM", v0=v0, tol=0
            )
        except (ArpackNoConvergence, ArpackError) as exc:
            raise ConvergenceError(f"eigensolver failed: {exc}") from None
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    if vals[0] < -1e-8 * max(abs(vals[-1]), 1.0):
        raise NumericalError(f"indefinite Laplacian: lambda_1 = {vals[0]}")
    vals = np.maximum(vals, 0.0)
    atoms = _fix_signs(inv_sqrt_a[:, None] * vecs)
    return EigenBasis(atoms=atoms, eigenvalues=vals)


def dirichlet_energy(f, lap):
    """Quadratic smoothness energy f' S f (nonnegative; 0 for constants)."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (lap.n,):
        raise DimensionMismatch(f"function has shape {f.shape}, expected ({lap.n},)")
    if not np.all(np.isfinite(f)):
        raise NumericalError("non-finite function values")
    val = float(f @ (lap.stiffness @ f))
    return max(val, 0.0)


def heat_kernel_column(basis, source, t):
    """Heat transferred from `source` to every vertex after time t,
    via the truncated spectral sum of the basis."""
    if t <= 0:
        raise ValueError(f"diffusion time must be positive, got {t}")
    w = np.exp(-t * basis.eigenvalues) * basis.atoms[source]
    return basis.atoms @ w


def spectral_filter(basis, coefficients, center):
    """Filter sum_l c_l phi_l(center) phi_l(.) for per-frequency weights c."""
    c = np.asarray(coefficients, dtype=np.float64)
    if c.shape != (basis.k,):
        raise DimensionMismatch(f"need {basis.k} coefficients, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise NumericalError("non-finite filter coefficients")
    return basis.atoms @ (c * basis.atoms[center])
