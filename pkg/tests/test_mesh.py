import numpy as np
import pytest

from pcdmatch import TriMesh, load_mesh, lumped_mass, normalize_to_unit_area, save_off
from pcdmatch.errors import TopologyError
from pcdmatch.synth import icosphere, random_rotation, rect_grid


SINGLE_TRIANGLE_OFF = """OFF
3 1 0
0 0 0
1 0 0
0 1 0
3 0 1 2
"""

TETRA_OFF = """OFF
4 4 6
0 0 0
1 1 0
1 0 1
0 1 1
3 0 1 2
3 0 3 1
3 0 2 3
3 1 3 2
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadMesh:
    def test_single_triangle(self, tmp_path):
        mesh = load_mesh(write(tmp_path, "t.off", SINGLE_TRIANGLE_OFF))
        assert mesh.n_vertices == 3
        assert mesh.n_triangles == 1
        assert len(mesh.edges) == 3
        np.testing.assert_allclose(mesh.vertex_positions[1], [1, 0, 0])

    def test_tetrahedron(self, tmp_path):
        mesh = load_mesh(write(tmp_path, "t.off", TETRA_OFF))
        assert mesh.n_vertices == 4
        assert mesh.n_triangles == 4
        assert len(mesh.edges) == 6

    def test_out_of_range_index(self, tmp_path):
        bad = SINGLE_TRIANGLE_OFF.replace("3 0 1 2", "3 0 1 3")
        with pytest.raises(TopologyError):
            load_mesh(write(tmp_path, "bad.off", bad))

    def test_degenerate_triangle_rejected(self):
        with pytest.raises(TopologyError):
            TriMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])

    def test_repeated_index_rejected(self):
        with pytest.raises(TopologyError):
            TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])

    def test_disconnected_rejected(self):
        verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5], [6, 5, 5], [5, 6, 5]]
        with pytest.raises(TopologyError):
            TriMesh(verts, [[0, 1, 2], [3, 4, 5]])

    def test_isolated_vertex_rejected(self):
        with pytest.raises(TopologyError):
            TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [9, 9, 9]], [[0, 1, 2]])

    def test_edges_are_triangle_edge_union(self, tetrahedron):
        t = tetrahedron.triangles
        expected = set()
        for a, b, c in t:
            for u, v in ((a, b), (b, c), (c, a)):
                expected.add((min(u, v), max(u, v)))
        got = {tuple(e) for e in tetrahedron.edges}
        assert got == expected

    def test_off_round_trip_bit_for_bit(self, tmp_path):
        mesh = icosphere(1)
        path = str(tmp_path / "ico.off")
        save_off(mesh, path)
        again = load_mesh(path)
        assert np.array_equal(mesh.vertex_positions, again.vertex_positions)
        assert np.array_equal(mesh.triangles, again.triangles)


class TestLumpedMass:
    def test_right_triangle_one_third_rule(self, right_triangle):
        mass = lumped_mass(right_triangle)
        np.testing.assert_allclose(mass.diagonal_areas, [1 / 6] * 3)
        assert mass.total_area == pytest.approx(0.5)

    def test_unit_tetrahedron(self, unit_tetrahedron):
        # 4 equilateral faces of area sqrt(3)/4, split equally: sqrt(3)/4
        # per vertex, sqrt(3) in total.
        mass = lumped_mass(unit_tetrahedron)
        np.testing.assert_allclose(mass.diagonal_areas, np.sqrt(3) / 4, rtol=1e-12)
        assert mass.total_area == pytest.approx(np.sqrt(3), rel=1e-12)

    def test_scaling_quadratic(self, icosphere):
        mass1 = lumped_mass(icosphere)
        mass2 = lumped_mass(TriMesh(icosphere.vertex_positions * 2.0, icosphere.triangles))
        np.testing.assert_allclose(mass2.diagonal_areas, 4.0 * mass1.diagonal_areas, rtol=1e-12)

    def test_conservation(self, icosphere):
        mass = lumped_mass(icosphere)
        assert mass.diagonal_areas.sum() == pytest.approx(
            icosphere.triangle_areas.sum(), rel=1e-9
        )

    def test_entries_positive(self, sheet2):
        assert lumped_mass(sheet2).diagonal_areas.min() > 0


class TestNormalizeToUnitArea:
    def test_area_four_halves_coordinates(self):
        mesh = rect_grid(2, 2)  # area 4
        scaled = normalize_to_unit_area(mesh)
        np.testing.assert_allclose(
            scaled.vertex_positions, mesh.vertex_positions / 2.0, atol=1e-15
        )
        assert scaled.total_area == pytest.approx(1.0, abs=1e-12)

    def test_idempotent(self, icosphere):
        once = normalize_to_unit_area(icosphere)
        twice = normalize_to_unit_area(once)
        np.testing.assert_allclose(
            twice.vertex_positions, once.vertex_positions, atol=1e-12
        )

    def test_unit_tetrahedron_edge_length(self, unit_tetrahedron):
        # Solving s^2 sqrt(3) = 1 gives edge length 3^(-1/4).
        scaled = normalize_to_unit_area(unit_tetrahedron)
        np.testing.assert_allclose(scaled.edge_lengths, 3 ** (-1 / 4), rtol=1e-12)

    def test_commutes_with_rigid_motion(self, icosphere):
        rng = np.random.default_rng(3)
        R = random_rotation(rng)
        moved = TriMesh(icosphere.vertex_positions @ R.T + [1.0, -2.0, 0.5],
                        icosphere.triangles)
        assert normalize_to_unit_area(moved).total_area == pytest.approx(1.0, abs=1e-12)
        assert moved.total_area == pytest.approx(icosphere.total_area, rel=1e-12)
