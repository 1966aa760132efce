"""Orthonormal functional bases from dictionaries of surface functions,
plugged into functional-map shape matching, with a correspondence metric
suite and an experiment harness."""

from .basis import Basis, frequency_profile, normalize_dictionary, pcd, project, reconstruct
from .dictionaries import (
    Dictionary,
    WksParams,
    adaptive_gaussian_dictionary,
    concat_dictionaries,
    gaussian_dictionary,
    heat_dictionary,
    spec_dictionary,
    wave_dictionary,
    wks_dictionary,
)
from .fileio import load_mesh, save_off
from .fmap import (
    FunctionalMap,
    Landmarks,
    PointwiseMap,
    estimate_fmap_product_preservation,
    fmap_from_pointwise,
    pointwise_from_fmap,
    zoomout_refine,
)
from .mesh import MassMatrix, TriMesh, lumped_mass, normalize_to_unit_area
from .metrics import (
    EvalReport,
    age,
    cumulative_curve,
    discrimination_power,
    egdc,
    geodesic_error,
    mgd,
    relative_error,
)
from .sampling import (
    GeodesicField,
    SampleSet,
    farthest_point_sampling,
    geodesic_from,
    random_sampling,
)
from .spectral import (
    EigenBasis,
    Laplacian,
    cotangent_laplacian,
    dirichlet_energy,
    eigenbasis,
    heat_kernel_column,
    spectral_filter,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
