import numpy as np
import pytest

from pcdmatch import TriMesh, cotangent_laplacian, lumped_mass, normalize_to_unit_area
from pcdmatch import synth


@pytest.fixture(scope="session")
def right_triangle():
    return TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


@pytest.fixture(scope="session")
def tetrahedron():
    # Regular tetrahedron on alternating cube corners, edge length sqrt(2).
    return TriMesh(
        [[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]],
        [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    )


@pytest.fixture(scope="session")
def unit_tetrahedron():
    # Edge length 1.
    s = 1.0 / np.sqrt(2.0)
    return TriMesh(
        np.array([[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]]) * s,
        [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    )


@pytest.fixture(scope="session")
def icosphere():
    return synth.icosphere(2)


@pytest.fixture(scope="session")
def unit_icosphere():
    return normalize_to_unit_area(synth.icosphere(3))


@pytest.fixture(scope="session")
def strip():
    # Thin rectangular strip, unit spacing.
    return synth.rect_grid(14, 2)


@pytest.fixture(scope="session")
def small_sheet():
    return normalize_to_unit_area(synth.LimbSheet(scale=1).mesh)


@pytest.fixture(scope="session")
def sheet2():
    return normalize_to_unit_area(synth.LimbSheet(scale=2).mesh)


@pytest.fixture(scope="session")
def sheet2_lap(sheet2):
    return cotangent_laplacian(sheet2)


@pytest.fixture(scope="session")
def sheet2_mass(sheet2):
    return lumped_mass(sheet2)
