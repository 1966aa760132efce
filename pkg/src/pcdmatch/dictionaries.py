"""Dictionaries of surface functions: the raw material for PCA bases.

Every recipe returns an (n, q) matrix whose columns are functions on the
mesh, tagged with the recipe name and its parameters.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrum, DimensionMismatch, NumericalError, ZeroNormColumn
from .mesh import lumped_mass
from .sampling import geodesic_block
from .spectral import heat_kernel_column, spectral_filter

GAUSS = "gauss"
ADAPT = "adapt"
HEAT = "heat"
SPEC = "spec"
WKS = "wks"
WKS_PLUS_GAUSS = "wks_plus_gauss"
WAVE = "wave"

DEFAULT_SIGMA = 0.05
DEFAULT_Q = 1000
DEFAULT_HEAT_TIME = 1e-2
DEFAULT_SPEC_ALPHA = 1e-4
DEFAULT_WAVE_TIME = 1e-2


@dataclass
class Dictionary:
    """(n, q) matrix of surface functions plus its construction record."""

    atoms: np.ndarray
    recipe: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        atoms = np.ascontiguousarray(self.atoms, dtype=np.float64)
        if atoms.ndim != 2:
            raise DimensionMismatch(f"dictionary atoms must be 2-D, got {atoms.shape}")
        if not np.all(np.isfinite(atoms)):
            raise NumericalError("dictionary contains non-finite entries")
        if atoms.shape[1] and not np.all(np.any(atoms != 0.0, axis=0)):
            raise ZeroNormColumn("dictionary contains an all-zero column")
        self.atoms = atoms

    @property
    def n(self):
        return self.atoms.shape[0]

    @property
    def q(self):
        return self.atoms.shape[1]


@dataclass(frozen=True)
class WksParams:
    """Wave-kernel dictionary parameters.

    ``variance`` is the standard deviation of the log-energy window; when
    None it defaults to 7x the log-energy grid step.
    """

    energy_scale_count: int = 100
    variance: float | None = None

    def __post_init__(self):
        if self.energy_scale_count < 2:
            raise ValueError("need at least 2 energy scales")
        if self.variance is not None and self.variance <= 0:
            raise ValueError("variance must be positive")


def _warn_if_not_unit_area(mesh, sigma):
    if abs(mesh.total_area - 1.0) > 0.01:
        warnings.warn(
            f"sigma={sigma} is area-relative but mesh area is {mesh.total_area:.4g}; "
            "normalize to unit area first",
            stacklevel=3,
        )


def gaussian_dictionary(mesh, samples, sigma=DEFAULT_SIGMA):
    """Geodesic Gaussians exp(-d^2 / sigma) centered at the sampled vertices."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    _warn_if_not_unit_area(mesh, sigma)
    geo = geodesic_block(mesh, samples.indices)  # (q, n)
    atoms = np.exp(-(geo.T ** 2) / sigma)
    return Dictionary(
        atoms=atoms,
        recipe=GAUSS,
        params={"sigma": sigma, "samples": samples.indices, "sampling": samples.method},
    )


def geometry_reconstruction_error(mesh, lb_basis, mass=None):
    """Per-vertex norm of the coordinate residual X - Phi Phi' A X."""
    if mass is None:
        mass = lumped_mass(mesh)
    x = mesh.vertex_positions
    phi = lb_basis.atoms
    coeff = phi.T @ (mass.diagonal_areas[:, None] * x)
    resid = x - phi @ coeff
    return np.linalg.norm(resid, axis=1)


def adaptive_gaussian_dictionary(mesh, samples, sigma, lb_basis, mass=None):
    """Gaussians whose width shrinks where the spectral basis reconstructs
    geometry poorly: sigma(x) = sigma * (1 - 0.4 * err(x)) with err min-max
    normalized to [0, 1], so widths stay in [0.6 sigma, sigma]."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    _warn_if_not_unit_area(mesh, sigma)
    rec = geometry_reconstruction_error(mesh, lb_basis, mass)
    span = rec.max() - rec.min()
    rec_norm = (rec - rec.min()) / span if span > 0 else np.zeros_like(rec)
    sigma_local = sigma * (1.0 - 0.4 * rec_norm)
    geo = geodesic_block(mesh, samples.indices)  # (q, n)
    atoms = np.exp(-(geo.T ** 2) / sigma_local[samples.indices][None, :])
    return Dictionary(
        atoms=atoms,
        recipe=ADAPT,
        params={
            "sigma": sigma,
            "samples": samples.indices,
            "sampling": samples.method,
            "sigma_at_samples": sigma_local[samples.indices],
        },
    )


def heat_dictionary(mesh, samples, basis, t=DEFAULT_HEAT_TIME):
    """Columns are truncated heat-kernel rows seeded at the sampled vertices."""
    if t <= 0:
        raise ValueError(f"diffusion time must be positive, got {t}")
    cols = [heat_kernel_column(basis, int(j), t) for j in samples.indices]
    return Dictionary(
        atoms=np.stack(cols, axis=1),
        recipe=HEAT,
        params={"t": t, "k": basis.k, "samples": samples.indices, "sampling": samples.method},
    )


def spec_dictionary(mesh, samples, basis, alpha=DEFAULT_SPEC_ALPHA):
    """Spectrally defined Gaussians: filter exp(-alpha * lambda) at samples."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    coeff = np.exp(-alpha * basis.eigenvalues)
    cols = [spectral_filter(basis, coeff, int(j)) for j in samples.indices]
    return Dictionary(
        atoms=np.stack(cols, axis=1),
        recipe=SPEC,
        params={"alpha": alpha, "k": basis.k, "samples": samples.indices, "sampling": samples.method},
    )


def wks_dictionary(mesh, basis, params=None):
    """Wave-kernel energy scales as dictionary atoms.

    Each column is the band response at one log-energy e:
    sum_l exp(-(e - log lambda_l)^2 / (2 var^2)) phi_l(.)^2, normalized by
    the sum of the window weights. The energy grid spans the log-spectrum
    with 2-variance insets at both ends.
    """
    if params is None:
        params = WksParams()
    lam = basis.eigenvalues
    pos = lam > max(lam[-1], 1.0) * 1e-12
    if pos.sum() < 2:
        raise DegenerateSpectrum(
            f"need at least 2 positive eigenvalues, found {int(pos.sum())}"
        )
    log_ev = np.log(lam[pos])
    phi_sq = basis.atoms[:, pos] ** 2
    q = params.energy_scale_count
    var = params.variance
    if var is None:
        var = 7.0 * (log_ev[-1] - log_ev[0]) / q
    energies = np.linspace(log_ev[0] + 2 * var, log_ev[-1] - 2 * var, q)
    weights = np.exp(-((energies[:, None] - log_ev[None, :]) ** 2) / (2 * var**2))
    atoms = (phi_sq @ weights.T) / weights.sum(axis=1)[None, :]
    return Dictionary(
        atoms=atoms,
        recipe=WKS,
        params={"energy_scale_count": q, "variance": var, "k": basis.k},
    )


def concat_dictionaries(a, b):
    """Column-wise concatenation; a's columns first."""
    if a.n != b.n:
        raise DimensionMismatch(f"dictionaries live on different meshes: {a.n} vs {b.n}")
    pair = {a.recipe, b.recipe}
    recipe = WKS_PLUS_GAUSS if pair == {WKS, GAUSS} else f"{a.recipe}+{b.recipe}"
    return Dictionary(
        atoms=np.hstack([a.atoms, b.atoms]),
        recipe=recipe,
        params={"first": a.params | {"recipe": a.recipe, "q": a.q},
                "second": b.params | {"recipe": b.recipe, "q": b.q}},
    )


def wave_dictionary(mesh, samples, basis, t=DEFAULT_WAVE_TIME):
    """Band-pass wavelet-style atoms: filter t * lambda * exp(-t * lambda),
    which vanishes at frequency zero and peaks at lambda = 1/t."""
    if t <= 0:
        raise ValueError(f"band-pass scale must be positive, got {t}")
    coeff = t * basis.eigenvalues * np.exp(-t * basis.eigenvalues)
    cols = [spectral_filter(basis, coeff, int(j)) for j in samples.indices]
    return Dictionary(
        atoms=np.stack(cols, axis=1),
        recipe=WAVE,
        params={"t": t, "k": basis.k, "samples": samples.indices, "sampling": samples.method},
    )
