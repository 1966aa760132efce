import numpy as np
import pytest

from pcdmatch import fileio, load_mesh, lumped_mass
from pcdmatch.basis import pcd
from pcdmatch.dictionaries import gaussian_dictionary
from pcdmatch.errors import ParseError
from pcdmatch.sampling import farthest_point_sampling
from pcdmatch.synth import icosphere

PLY_ASCII = """ply
format ascii 1.0
comment anything
element vertex 3
property float x
property float y
property float z
element face 1
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
0 1 0
3 0 1 2
"""

OBJ_TEXT = """# comment
v 0 0 0
v 1 0 0
v 0 1 0
vn 0 0 1
f 1/1/1 2/2/1 3/3/1
"""


def test_ply_ascii(tmp_path):
    p = tmp_path / "m.ply"
    p.write_text(PLY_ASCII)
    mesh = load_mesh(str(p))
    assert mesh.n_vertices == 3 and mesh.n_triangles == 1


def test_ply_binary_roundtrip(tmp_path):
    mesh = icosphere(1)
    p = tmp_path / "m.ply"
    with open(p, "wb") as f:
        f.write(b"ply\nformat binary_little_endian 1.0\n")
        f.write(f"element vertex {mesh.n_vertices}\n".encode())
        f.write(b"property double x\nproperty double y\nproperty double z\n")
        f.write(f"element face {mesh.n_triangles}\n".encode())
        f.write(b"property list uchar int vertex_indices\nend_header\n")
        f.write(np.ascontiguousarray(mesh.vertex_positions, "<f8").tobytes())
        for tri in mesh.triangles:
            f.write(np.uint8(3).tobytes())
            f.write(np.ascontiguousarray(tri, "<i4").tobytes())
    again = load_mesh(str(p))
    np.testing.assert_array_equal(again.vertex_positions, mesh.vertex_positions)
    np.testing.assert_array_equal(again.triangles, mesh.triangles)


def test_ply_binary_extra_vertex_property(tmp_path):
    p = tmp_path / "m.ply"
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype="<f4")
    conf = np.array([0.5, 0.25, 1.0], dtype="<f4")
    with open(p, "wb") as f:
        f.write(b"ply\nformat binary_little_endian 1.0\nelement vertex 3\n")
        f.write(b"property float x\nproperty float y\nproperty float z\n")
        f.write(b"property float confidence\n")
        f.write(b"element face 1\nproperty list uchar int vertex_indices\nend_header\n")
        rows = np.hstack([verts, conf[:, None]]).astype("<f4")
        f.write(rows.tobytes())
        f.write(np.uint8(3).tobytes())
        f.write(np.array([0, 1, 2], "<i4").tobytes())
    mesh = load_mesh(str(p))
    np.testing.assert_allclose(mesh.vertex_positions, verts, atol=1e-7)


def test_obj(tmp_path):
    p = tmp_path / "m.obj"
    p.write_text(OBJ_TEXT)
    mesh = load_mesh(str(p))
    assert mesh.n_vertices == 3 and mesh.n_triangles == 1
    np.testing.assert_array_equal(mesh.triangles, [[0, 1, 2]])


def test_obj_quad_rejected(tmp_path):
    p = tmp_path / "m.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ParseError):
        load_mesh(str(p))


def test_off_malformed(tmp_path):
    p = tmp_path / "m.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n")
    with pytest.raises(ParseError):
        load_mesh(str(p))


def test_unknown_format(tmp_path):
    p = tmp_path / "m.stl"
    p.write_text("whatever")
    with pytest.raises(ParseError):
        load_mesh(str(p))


def test_pointwise_map_roundtrip(tmp_path):
    path = str(tmp_path / "m.map")
    a = np.array([3, 1, 4, 1, 5])
    fileio.write_pointwise_map(path, a)
    np.testing.assert_array_equal(fileio.read_pointwise_map(path), a)
    np.testing.assert_array_equal(fileio.read_pointwise_map(path, one_based=True), a - 1)


def test_landmarks_roundtrip(tmp_path):
    path = tmp_path / "lm.txt"
    path.write_text("1 2\n3 4\n")
    np.testing.assert_array_equal(fileio.read_landmarks(str(path)), [[1, 2], [3, 4]])
    np.testing.assert_array_equal(
        fileio.read_landmarks(str(path), one_based=True), [[0, 1], [2, 3]]
    )


def test_matrix_container_roundtrip(tmp_path):
    path = str(tmp_path / "m.fbm")
    m = np.random.default_rng(0).standard_normal((7, 3))
    fileio.write_matrix(path, m)
    np.testing.assert_array_equal(fileio.read_matrix(path), m)


def test_matrix_container_bad_magic(tmp_path):
    path = tmp_path / "m.fbm"
    path.write_bytes(b"NOPE" + b"\0" * 40)
    with pytest.raises(ParseError):
        fileio.read_matrix(str(path))


def test_basis_export(tmp_path):
    mesh = icosphere(1)
    mass = lumped_mass(mesh)
    samples = farthest_point_sampling(mesh, 12)
    basis = pcd(gaussian_dictionary(mesh, samples, sigma=0.5), mass, k=5)
    prefix = str(tmp_path / "basis")
    fileio.save_basis(prefix, basis)
    atoms = fileio.read_matrix(prefix + ".fbm")
    np.testing.assert_array_equal(atoms, basis.atoms)
    vals = fileio.read_matrix(prefix + ".fbm.vals")
    np.testing.assert_array_equal(vals.ravel(), basis.singular_values)


def test_vertex_quality_ply_readable(tmp_path):
    mesh = icosphere(0)
    path = str(tmp_path / "q.ply")
    values = np.linspace(0, 1, mesh.n_vertices)
    fileio.write_vertex_quality_ply(path, mesh, values)
    again = load_mesh(path, fmt="ply")
    np.testing.assert_allclose(again.vertex_positions, mesh.vertex_positions)
