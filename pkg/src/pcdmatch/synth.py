"""Procedurally generated test meshes.

Everything the test suite and the acceptance harness need runs from these
generators; no downloaded assets. The limbed sheet plus its fold/bump
variants provide near-isometric pairs with identity ground truth: folds
about mesh grid lines preserve every edge length exactly, and the small
smooth bumps perturb the metric by a percent or two.
"""

import numpy as np

from .mesh import TriMesh


# ---------------------------------------------------------------------------
# basic shapes
# ---------------------------------------------------------------------------

def icosphere(subdivisions=3, radius=1.0):
    """Subdivided icosahedron projected onto the sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    for _ in range(subdivisions):
        verts, faces = _subdivide_on_sphere(verts, faces)
    return TriMesh(verts * radius, faces)


def _subdivide_on_sphere(verts, faces):
    verts = list(verts)
    midpoint = {}

    def mid(a, b):
        key = (min(a, b), max(a, b))
        if key not in midpoint:
            p = (np.asarray(verts[a]) + np.asarray(verts[b])) / 2.0
            p /= np.linalg.norm(p)
            midpoint[key] = len(verts)
            verts.append(p)
        return midpoint[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.asarray(verts), np.asarray(out, dtype=np.int64)


def cell_triangulation(cells, spacing=(1.0, 1.0), diagonal_rng=None):
    """Vertices and triangles covering a set of integer unit cells.

    Parameters
    ----------
    cells : iterable of (ix, iy)
        Unit cells to cover; each becomes two triangles.
    spacing : (dx, dy)
        Physical size of a cell.
    diagonal_rng : numpy Generator, optional
        When given, each cell's split diagonal is chosen at random;
        re-running with different generators retriangulates the same
        vertex set (remeshing-style connectivity jitter).

    Returns
    -------
    (positions, triangles, corner_ids)
        Arrays plus a map from lattice corner (ix, iy) to vertex index.
    """
    cells = sorted(set(map(tuple, cells)))
    corner_ids = {}
    positions = []
    dx, dy = spacing

    def corner(ix, iy):
        key = (ix, iy)
        if key not in corner_ids:
            corner_ids[key] = len(positions)
            positions.append((ix * dx, iy * dy, 0.0))
        return corner_ids[key]

    tris = []
    for ix, iy in cells:
        v00 = corner(ix, iy)
        v10 = corner(ix + 1, iy)
        v01 = corner(ix, iy + 1)
        v11 = corner(ix + 1, iy + 1)
        if diagonal_rng is not None and diagonal_rng.random() < 0.5:
            tris.append([v00, v10, v01])
            tris.append([v10, v11, v01])
        else:
            tris.append([v00, v10, v11])
            tris.append([v00, v11, v01])
    return np.asarray(positions), np.asarray(tris, dtype=np.int64), corner_ids


def grid_from_cells(cells, spacing=(1.0, 1.0)):
    """Triangulated planar sheet covering a set of integer unit cells;
    returns the mesh and the lattice-corner -> vertex-index map."""
    positions, tris, corner_ids = cell_triangulation(cells, spacing)
    return TriMesh(positions, tris), corner_ids


def rect_grid(nx, ny, spacing=(1.0, 1.0)):
    """Flat rectangular sheet of nx x ny cells."""
    cells = [(i, j) for i in range(nx) for j in range(ny)]
    mesh, _ = grid_from_cells(cells, spacing)
    return mesh


def right_triangle_grid(nx, ny):
    """Sheet of 3-4-5 right triangles: every edge length is an integer, so
    shortest-path sums are exact in floating point."""
    return rect_grid(nx, ny, spacing=(3.0, 4.0))


def folded_right_triangle_grid(nx, ny, crease_col):
    """3-4-5 grid folded 90 degrees about a vertical grid line via an exact
    coordinate swap; edge lengths stay integers."""
    mesh = right_triangle_grid(nx, ny)
    v = mesh.vertex_positions.copy()
    cx = 3.0 * crease_col
    beyond = v[:, 0] > cx
    z = v[beyond, 0] - cx
    v[beyond, 0] = cx
    v[beyond, 2] = z
    return TriMesh(v, mesh.triangles)


def bent_strip(nx, ny, crease_col, angle, spacing=1.0):
    """Rectangular strip folded by `angle` about the vertical grid line at
    column `crease_col` (an isometric deformation of the flat strip)."""
    mesh = rect_grid(nx, ny, spacing=(spacing, spacing))
    v = mesh.vertex_positions.copy()
    cx = spacing * crease_col
    beyond = v[:, 0] > cx
    r = v[beyond, 0] - cx
    v[beyond, 0] = cx + r * np.cos(angle)
    v[beyond, 2] = r * np.sin(angle)
    return TriMesh(v, mesh.triangles)


def bumpy_tube(n_around=24, n_rings=40, length=8.0, radius=1.0):
    """Open-ended tube with azimuthal bulges: protrusions on a curved body."""
    theta = np.linspace(0, 2 * np.pi, n_around, endpoint=False)
    z = np.linspace(0, length, n_rings)
    tt, zz = np.meshgrid(theta, z, indexing="ij")
    r = radius * (1.0 + 0.35 * np.sin(3 * tt) * np.sin(np.pi * zz / length) ** 2)
    pos = np.stack([r * np.cos(tt), r * np.sin(tt), zz], axis=-1).reshape(-1, 3)

    def vid(i, j):
        return (i % n_around) * n_rings + j

    tris = []
    for i in range(n_around):
        for j in range(n_rings - 1):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append([a, b, d])
            tris.append([a, d, c])
    return TriMesh(pos, np.asarray(tris, dtype=np.int64))


# ---------------------------------------------------------------------------
# the limbed sheet and its near-isometric variants
# ---------------------------------------------------------------------------

# Limb footprints in base-grid units: (x0, x1, y0, y1, axis, direction).
# axis/direction give the outward coordinate of the protrusion.
_BODY = (0, 10, 0, 7)
_LIMBS = (
    {"name": "arm1", "x": (1, 3), "y": (7, 15), "axis": "y", "sign": +1},
    {"name": "arm2", "x": (7, 9), "y": (7, 13), "axis": "y", "sign": +1},
    {"name": "leg1", "x": (1, 3), "y": (-7, 0), "axis": "y", "sign": -1},
    {"name": "leg2", "x": (7, 9), "y": (-9, 0), "axis": "y", "sign": -1},
    {"name": "tail", "x": (10, 20), "y": (3, 5), "axis": "x", "sign": +1},
    {"name": "head", "x": (-4, 0), "y": (2, 5), "axis": "x", "sign": -1},
)


class LimbSheet:
    """Flat sheet shaped like a limbed creature, with the lattice metadata
    needed to fold its protrusions isometrically."""

    def __init__(self, scale=2):
        cells = []
        bx0, bx1, by0, by1 = _BODY
        regions = [(bx0, bx1, by0, by1)] + [
            (l["x"][0], l["x"][1], l["y"][0], l["y"][1]) for l in _LIMBS
        ]
        for x0, x1, y0, y1 in regions:
            for i in range(x0 * scale, x1 * scale):
                for j in range(y0 * scale, y1 * scale):
                    cells.append((i, j))
        self.scale = scale
        self.cells = cells
        self.mesh, corner_ids = grid_from_cells(cells)
        n = self.mesh.n_vertices
        self.lattice = np.zeros((n, 2), dtype=np.int64)
        for (ix, iy), vid in corner_ids.items():
            self.lattice[vid] = (ix, iy)

    def retriangulated(self, rng):
        """Same vertices, random per-cell diagonal orientation."""
        _, tris, _ = cell_triangulation(self.cells, diagonal_rng=rng)
        return tris

    def limb_frames(self):
        """Per limb: boolean footprint mask, outward coordinate (subcell
        units from the body edge, 0 on the attachment line), transverse
        coordinate, and length in subcells."""
        s = self.scale
        ix, iy = self.lattice[:, 0], self.lattice[:, 1]
        frames = []
        for limb in _LIMBS:
            x0, x1 = limb["x"][0] * s, limb["x"][1] * s
            y0, y1 = limb["y"][0] * s, limb["y"][1] * s
            along = ix if limb["axis"] == "x" else iy
            across = iy if limb["axis"] == "x" else ix
            lo, hi = (x0, x1) if limb["axis"] == "x" else (y0, y1)
            t_lo, t_hi = (y0, y1) if limb["axis"] == "x" else (x0, x1)
            base = lo if limb["sign"] < 0 else hi
            # outward 0 on the body edge, increasing toward the tip
            if limb["sign"] > 0:
                base = lo
                outward = along - lo
            else:
                base = hi
                outward = hi - along
            in_footprint = (across >= t_lo) & (across <= t_hi) & (outward >= 0)
            in_footprint &= outward <= (hi - lo)
            frames.append(
                {
                    "name": limb["name"],
                    "mask": in_footprint,
                    "outward": outward,
                    "across": across,
                    "length": hi - lo,
                }
            )
        return frames


def _rotation_about_axis(point, direction, angle):
    d = direction / np.linalg.norm(direction)
    kx, ky, kz = d
    K = np.array([[0, -kz, ky], [kz, 0, -kx], [-ky, kx, 0]])
    R = np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)

    def apply(pts):
        return (pts - point) @ R.T + point

    return apply


def random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def limb_sheet_variant(scale=2, seed=0, bumps=6, bump_amplitude=1.5, rigid=True,
                       diagonal_jitter=False):
    """One deformed instance of the limbed sheet.

    Folds every protrusion about 1-3 random lattice creases (exactly
    isometric) after adding a few smooth low bumps (slightly metric-
    distorting), then applies a random rigid motion. With
    ``diagonal_jitter`` each variant also gets its own random cell
    triangulation, mimicking independently remeshed inputs. Vertex ids are
    shared across variants, so two variants with different seeds form a
    near-isometric pair in identity correspondence.
    """
    rng = np.random.default_rng(seed)
    sheet = LimbSheet(scale=scale)
    triangles = sheet.retriangulated(rng) if diagonal_jitter else sheet.mesh.triangles
    v = sheet.mesh.vertex_positions.copy()
    s = sheet.scale

    if bumps:
        xy = v[:, :2]
        lo, hi = xy.min(axis=0), xy.max(axis=0)
        for _ in range(bumps):
            center = rng.uniform(lo, hi)
            rho = rng.uniform(1.5, 3.0) * s
            amp = rng.uniform(0.5, 1.0) * bump_amplitude * s * rng.choice([-1, 1])
            d2 = ((xy - center) ** 2).sum(axis=1)
            v[:, 2] += amp * np.exp(-d2 / rho**2)

    for frame in sheet.limb_frames():
        mask, outward = frame["mask"], frame["outward"]
        length = frame["length"]
        n_creases = int(rng.integers(1, 4))
        creases = rng.choice(np.arange(s, max(length - s, s + 1)),
                             size=min(n_creases, max(length - 2 * s, 1)),
                             replace=False)
        for c in np.sort(creases):
            on_axis = mask & (outward == c)
            beyond = mask & (outward > c)
            if on_axis.sum() < 2 or not beyond.any():
                continue
            axis_pts = v[on_axis]
            order = np.argsort(frame["across"][on_axis])
            p0, p1 = axis_pts[order[0]], axis_pts[order[-1]]
            angle = rng.uniform(0.35, 1.0) * rng.choice([-1, 1])
            rotate = _rotation_about_axis(p0, p1 - p0, angle)
            v[beyond] = rotate(v[beyond])

    if rigid:
        R = random_rotation(rng)
        v = v @ R.T + rng.uniform(-1, 1, size=3) * 5.0
    return TriMesh(v, triangles)


def isometric_pair_set(n_pairs=10, seed=0, scale=3, bump_amplitude=4.0):
    """Near-isometric pairs of limbed-sheet variants (identity ground truth).

    Variants are generated from distinct sub-seeds and combined pairwise;
    all share the connectivity of the base sheet.
    """
    n_variants = 2
    while n_variants * (n_variants - 1) // 2 < n_pairs:
        n_variants += 1
    variants = [
        limb_sheet_variant(scale=scale, seed=seed * 1000 + i, bump_amplitude=bump_amplitude)
        for i in range(n_variants)
    ]
    pairs = []
    for i in range(n_variants):
        for j in range(i + 1, n_variants):
            if len(pairs) < n_pairs:
                pairs.append((variants[i], variants[j]))
    return pairs


def permuted_copy(mesh, seed=0, rigid=True):
    """Relabeled (and rigidly moved) copy: returns (copy, perm) where
    vertex i of the original is vertex perm[i] of the copy."""
    rng = np.random.default_rng(seed)
    n = mesh.n_vertices
    perm = rng.permutation(n)
    v = np.empty_like(mesh.vertex_positions)
    v[perm] = mesh.vertex_positions
    if rigid:
        R = random_rotation(rng)
        v = v @ R.T + rng.uniform(-1, 1, size=3)
    return TriMesh(v, perm[mesh.triangles]), perm
