"""Area-weighted uncentered PCA of a dictionary, and basis algebra.

The output basis is column-orthonormal under the mass inner product and
drop-in interchangeable with the spectral eigenbasis.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RankDeficient, ZeroNormColumn
from .dictionaries import Dictionary

LB = "lb"
PCD = "pcd"

DEFAULT_K = 60
RANK_TOLERANCE = 1e-10


@dataclass
class Basis:
    """Truncated functional basis: (n, k) atoms, orthonormal w.r.t. the mass
    matrix, plus provenance and (for PCA bases) the kept singular values."""

    atoms: np.ndarray
    source: str = PCD
    provenance: dict | None = None
    singular_values: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        atoms = np.ascontiguousarray(self.atoms, dtype=np.float64)
        if atoms.ndim != 2:
            raise DimensionMismatch(f"basis atoms must be 2-D, got {atoms.shape}")
        atoms.setflags(write=False)
        self.atoms = atoms
        if self.singular_values is not None:
            sv = np.asarray(self.singular_values, dtype=np.float64)
            if np.any(np.diff(sv) > 0):
                raise ValueError("singular values must be nonincreasing")
            self.singular_values = sv

    @property
    def n(self):
        return self.atoms.shape[0]

    @property
    def k(self):
        return self.atoms.shape[1]

    @classmethod
    def from_eigen(cls, eigen_basis):
        """Wrap a spectral EigenBasis so pipelines can consume either kind."""
        return cls(
            atoms=eigen_basis.atoms,
            source=LB,
            provenance={"kind": "lb", "k": eigen_basis.k},
            eigenvalues=eigen_basis.eigenvalues,
        )

    def truncated(self, k):
        if k > self.k:
            raise DimensionMismatch(f"cannot truncate k={self.k} basis to {k}")
        return Basis(
            atoms=self.atoms[:, :k],
            source=self.source,
            provenance=self.provenance,
            singular_values=None if self.singular_values is None else self.singular_values[:k],
            eigenvalues=None if self.eigenvalues is None else self.eigenvalues[:k],
        )


def normalize_dictionary(dictionary, mass):
    """Scale every column to unit norm under the mass inner product."""
    a = mass.diagonal_areas
    norms = np.sqrt(np.einsum("ij,i,ij->j", dictionary.atoms, a, dictionary.atoms))
    bad = ~np.isfinite(norms) | (norms <= 0.0)
    if bad.any():
        raise ZeroNormColumn(f"{int(bad.sum())} column(s) with zero norm")
    return Dictionary(
        atoms=dictionary.atoms / norms[None, :],
        recipe=dictionary.recipe,
        params=dict(dictionary.params) | {"normalized": True},
    )


def pcd(dictionary, mass, k=DEFAULT_K, normalize=True):
    """Build a basis from the top principal directions of a dictionary.

    Uncentered PCA weighted by the vertex areas, realized by the thin SVD of
    sqrt(A) D: the first k left singular vectors, mapped back through
    1/sqrt(A), are the atoms. They are mass-orthonormal and minimize the
    total projection residual of the dictionary columns among all
    mass-orthonormal rank-k bases.

    Raises
    ------
    RankDeficient
        If k exceeds the numerical rank of the dictionary
        (singular value below 1e-10 of the largest within the first k).
    """
    if normalize:
        dictionary = normalize_dictionary(dictionary, mass)
    n, q = dictionary.atoms.shape
    if k > min(n, q):
        raise RankDeficient(f"k={k} exceeds dictionary rank bound min(n={n}, q={q})")
    sqrt_a = np.sqrt(mass.diagonal_areas)
    weighted = sqrt_a[:, None] * dictionary.atoms
    u, s, _ = np.linalg.svd(weighted, full_matrices=False)
    if s[k - 1] < RANK_TOLERANCE * s[0]:
        rank = int(np.sum(s >= RANK_TOLERANCE * s[0]))
        raise RankDeficient(f"k={k} exceeds numerical rank {rank}")
    atoms = u[:, :k] / sqrt_a[:, None]
    idx = np.argmax(np.abs(atoms), axis=0)
    flip = atoms[idx, np.arange(k)] < 0
    atoms[:, flip] *= -1.0
    return Basis(
        atoms=atoms,
        source=PCD,
        provenance={
            "recipe": dictionary.recipe,
            "params": dictionary.params,
            "k": k,
            "normalize": normalize,
        },
        singular_values=s[:k].copy(),
    )


def project(basis, mass, f):
    """Coefficients of f in the basis: atoms' A f."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != basis.n:
        raise DimensionMismatch(f"function length {f.shape[0]} != n={basis.n}")
    if f.ndim == 1:
        return basis.atoms.T @ (mass.diagonal_areas * f)
    return basis.atoms.T @ (mass.diagonal_areas[:, None] * f)


def reconstruct(basis, coefficients):
    """Function with the given basis coefficients: atoms @ a."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.shape[0] != basis.k:
        raise DimensionMismatch(
            f"coefficient length {coefficients.shape[0]} != k={basis.k}"
        )
    return basis.atoms @ coefficients


def frequency_profile(basis, lap):
    """Dirichlet energy of every atom, in atom order."""
    prod = lap.stiffness @ basis.atoms
    return np.maximum(np.einsum("ij,ij->j", basis.atoms, prod), 0.0)


def reconstruction_error(dictionary, basis, mass):
    """Total squared projection residual of the dictionary columns, measured
    in the mass inner product (equals the squared SVD tail for PCA bases of
    the normalized dictionary)."""
    a = mass.diagonal_areas
    coeff = basis.atoms.T @ (a[:, None] * dictionary.atoms)
    resid = dictionary.atoms - basis.atoms @ coeff
    return float(np.einsum("ij,i,ij->", resid, a, resid))
