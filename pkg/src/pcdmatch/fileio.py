"""Mesh, map, and matrix file formats. See FORMATS.md for the layouts."""

import json
import os
import struct

import numpy as np

from .errors import DimensionMismatch, ParseError
from .mesh import TriMesh

MATRIX_MAGIC = b"PCDM"
MATRIX_VERSION = 1


# ---------------------------------------------------------------------------
# mesh readers / writer
# ---------------------------------------------------------------------------

def load_mesh(path, fmt=None):
    """Load a triangle mesh from an OFF, PLY or OBJ file.

    Parameters
    ----------
    path : str
        File to read.
    fmt : {'off', 'ply', 'obj'}, optional
        Declared format; inferred from the extension when omitted.

    Returns
    -------
    TriMesh
        Vertex order is preserved from the file; 1-based OBJ indices are
        converted to 0-based.
    """
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    fmt = fmt.lower()
    if fmt == "off":
        vertices, faces = read_off(path)
    elif fmt == "ply":
        vertices, faces = read_ply(path)
    elif fmt == "obj":
        vertices, faces = read_obj(path)
    else:
        raise ParseError(f"unknown mesh format {fmt!r}")
    return TriMesh(vertices, faces)


def _data_lines(path):
    with open(path, "r") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                yield line


def read_off(path):
    """Read an ASCII OFF file, returning (vertices, faces) arrays."""
    lines = _data_lines(path)
    try:
        header = next(lines)
    except StopIteration:
        raise ParseError(f"{path}: empty OFF file") from None
    tokens = header.split()
    if tokens[0] != "OFF":
        raise ParseError(f"{path}: missing OFF header")
    counts = tokens[1:]
    try:
        if not counts:
            counts = next(lines).split()
        n_verts, n_faces = int(counts[0]), int(counts[1])
        vertices = np.empty((n_verts, 3))
        for i in range(n_verts):
            vals = next(lines).split()
            vertices[i] = [float(x) for x in vals[:3]]
        faces = np.empty((n_faces, 3), dtype=np.int64)
        for i in range(n_faces):
            vals = next(lines).split()
            cnt = int(vals[0])
            if cnt != 3:
                raise ParseError(f"{path}: face {i} has {cnt} vertices, expected 3")
            faces[i] = [int(x) for x in vals[1:4]]
    except StopIteration:
        raise ParseError(f"{path}: truncated OFF file") from None
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed OFF file ({exc})") from None
    return vertices, faces


def save_off(mesh, path):
    """Write an ASCII OFF file; coordinates use round-trip-exact %.17g."""
    with open(path, "w") as f:
        f.write("OFF\n")
        f.write(f"{mesh.n_vertices} {mesh.n_triangles} 0\n")
        for x, y, z in mesh.vertex_positions:
            f.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.triangles:
            f.write(f"3 {a} {b} {c}\n")


_PLY_DTYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def read_ply(path):
    """Read a PLY file (ASCII or binary little-endian), vertices + triangles."""
    with open(path, "rb") as f:
        if f.readline().strip() != b"ply":
            raise ParseError(f"{path}: missing ply header")
        fmt = None
        elements = []  # [(name, count, [(prop_name, dtype) or ('list', ct, it, name)])]
        while True:
            line = f.readline()
            if not line:
                raise ParseError(f"{path}: truncated header")
            tokens = line.decode("ascii", "replace").split()
            if not tokens or tokens[0] == "comment":
                continue
            if tokens[0] == "format":
                fmt = tokens[1]
            elif tokens[0] == "element":
                elements.append((tokens[1], int(tokens[2]), []))
            elif tokens[0] == "property":
                if not elements:
                    raise ParseError(f"{path}: property before element")
                if tokens[1] == "list":
                    elements[-1][2].append(("list", tokens[2], tokens[3], tokens[4]))
                else:
                    elements[-1][2].append((tokens[2], tokens[1]))
            elif tokens[0] == "end_header":
                break
        if fmt not in ("ascii", "binary_little_endian"):
            raise ParseError(f"{path}: unsupported ply format {fmt!r}")
        try:
            if fmt == "ascii":
                parsed = _read_ply_ascii(f, elements)
            else:
                parsed = _read_ply_binary(f, elements)
        except (ValueError, IndexError, struct.error) as exc:
            raise ParseError(f"{path}: malformed ply data ({exc})") from None
    if "vertex" not in parsed or "face" not in parsed:
        raise ParseError(f"{path}: ply file lacks vertex or face element")
    vertices, faces = parsed["vertex"], parsed["face"]
    if faces is None or any(len(fc) != 3 for fc in faces):
        raise ParseError(f"{path}: only triangular faces are supported")
    return np.asarray(vertices), np.asarray(faces, dtype=np.int64)


def _read_ply_ascii(f, elements):
    out = {}
    text = f.read().decode("ascii")
    tok = iter(text.split())
    for name, count, props in elements:
        verts, faces = [], []
        for _ in range(count):
            if name == "vertex":
                row = {}
                for p in props:
                    if p[0] == "list":
                        cnt = int(next(tok))
                        for _ in range(cnt):
                            next(tok)
                    else:
                        row[p[0]] = float(next(tok))
                verts.append([row["x"], row["y"], row["z"]])
            elif name == "face":
                face = None
                for p in props:
                    if p[0] == "list":
                        cnt = int(next(tok))
                        vals = [int(next(tok)) for _ in range(cnt)]
                        if p[3] in ("vertex_indices", "vertex_index"):
                            face = vals
                    else:
                        next(tok)
                faces.append(face)
            else:
                for p in props:
                    if p[0] == "list":
                        cnt = int(next(tok))
                        for _ in range(cnt):
                            next(tok)
                    else:
                        next(tok)
        if name == "vertex":
            out["vertex"] = verts
        elif name == "face":
            out["face"] = faces
    return out


def _read_ply_binary(f, elements):
    out = {}
    for name, count, props in elements:
        has_list = any(p[0] == "list" for p in props)
        if not has_list:
            dtype = np.dtype([(f"f{i}", "<" + _PLY_DTYPES[p[1]]) for i, p in enumerate(props)])
            raw = np.frombuffer(f.read(dtype.itemsize * count), dtype=dtype, count=count)
            if name == "vertex":
                names = [p[0] for p in props]
                cols = [raw[f"f{names.index(ax)}"] for ax in ("x", "y", "z")]
                out["vertex"] = np.stack([c.astype(np.float64) for c in cols], axis=1)
            continue
        rows = []
        for _ in range(count):
            face = None
            for p in props:
                if p[0] == "list":
                    ct = np.dtype("<" + _PLY_DTYPES[p[1]])
                    it = np.dtype("<" + _PLY_DTYPES[p[2]])
                    cnt = int(np.frombuffer(f.read(ct.itemsize), dtype=ct)[0])
                    vals = np.frombuffer(f.read(it.itemsize * cnt), dtype=it, count=cnt)
                    if p[3] in ("vertex_indices", "vertex_index"):
                        face = [int(v) for v in vals]
                else:
                    sz = np.dtype(_PLY_DTYPES[p[1]]).itemsize
                    f.read(sz)
            rows.append(face)
        if name == "face":
            out["face"] = rows
    return out


def read_obj(path):
    """Read an OBJ file; only v/f records are honored (1-based indices)."""
    vertices, faces = [], []
    with open(path, "r") as f:
        for ln, line in enumerate(f, 1):
            tokens = line.split("#", 1)[0].split()
            if not tokens:
                continue
            try:
                if tokens[0] == "v":
                    vertices.append([float(x) for x in tokens[1:4]])
                elif tokens[0] == "f":
                    if len(tokens) != 4:
                        raise ParseError(
                            f"{path}:{ln}: face with {len(tokens) - 1} vertices, expected 3"
                        )
                    idx = []
                    for tokenv in tokens[1:]:
                        i = int(tokenv.split("/")[0])
                        idx.append(i - 1 if i > 0 else len(vertices) + i)
                    faces.append(idx)
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path}:{ln}: malformed OBJ record ({exc})") from None
    if not vertices:
        raise ParseError(f"{path}: no vertex records")
    return np.asarray(vertices, dtype=np.float64), np.asarray(faces, dtype=np.int64)


# ---------------------------------------------------------------------------
# point-wise maps, landmarks, sample sets
# ---------------------------------------------------------------------------

def read_pointwise_map(path, one_based=False):
    """Read a vertex-assignment file: line i holds the image of vertex i."""
    vals = np.loadtxt(path, dtype=np.int64, ndmin=1)
    if vals.ndim != 1:
        raise ParseError(f"{path}: expected one index per line")
    return vals - 1 if one_based else vals


def write_pointwise_map(path, assignment):
    np.savetxt(path, np.asarray(assignment, dtype=np.int64), fmt="%d")


def read_landmarks(path, one_based=False):
    """Read landmark pairs: two indices per line (source vertex, target vertex)."""
    vals = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if vals.shape[1] != 2:
        raise ParseError(f"{path}: expected two indices per line")
    return vals - 1 if one_based else vals


def read_sample_indices(path):
    return np.loadtxt(path, dtype=np.int64, ndmin=1)


def write_sample_indices(path, indices):
    np.savetxt(path, np.asarray(indices, dtype=np.int64), fmt="%d")


# ---------------------------------------------------------------------------
# binary matrix container
# ---------------------------------------------------------------------------

def write_matrix(path, matrix):
    """Write a dense matrix: magic 'PCDM', u32 version, u64 rows, u64 cols,
    then row-major little-endian float64 payload."""
    m = np.ascontiguousarray(matrix, dtype="<f8")
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DimensionMismatch(f"matrix container stores 2-D arrays, got {m.ndim}-D")
    with open(path, "wb") as f:
        f.write(MATRIX_MAGIC)
        f.write(struct.pack("<IQQ", MATRIX_VERSION, m.shape[0], m.shape[1]))
        f.write(m.tobytes(order="C"))


def read_matrix(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MATRIX_MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}")
        version, rows, cols = struct.unpack("<IQQ", f.read(20))
        if version != MATRIX_VERSION:
            raise ParseError(f"{path}: unsupported container version {version}")
        data = np.frombuffer(f.read(rows * cols * 8), dtype="<f8", count=rows * cols)
        if data.size != rows * cols:
            raise ParseError(f"{path}: truncated payload")
    return data.reshape(rows, cols).copy()


def save_basis(prefix, basis):
    """Export a basis: atoms in the matrix container plus a values sidecar
    (eigenvalues or singular values) and a JSON provenance sidecar."""
    write_matrix(prefix + ".fbm", basis.atoms)
    values = getattr(basis, "singular_values", None)
    if values is None:
        values = getattr(basis, "eigenvalues", None)
    if values is not None:
        write_matrix(prefix + ".fbm.vals", np.asarray(values))
    meta = {
        "source": getattr(basis, "source", "lb"),
        "n": int(basis.atoms.shape[0]),
        "k": int(basis.atoms.shape[1]),
        "provenance": getattr(basis, "provenance", None),
    }
    with open(prefix + ".fbm.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def save_dictionary(prefix, dictionary):
    """Export dictionary atoms plus a JSON sidecar with recipe and parameters."""
    write_matrix(prefix + ".fbm", dictionary.atoms)
    meta = {"recipe": dictionary.recipe, "q": int(dictionary.atoms.shape[1])}
    meta.update(_jsonable(dictionary.params))
    with open(prefix + ".fbm.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


# ---------------------------------------------------------------------------
# per-vertex scalar export for external viewers
# ---------------------------------------------------------------------------

def write_vertex_quality_ply(path, mesh, values):
    """Write an ASCII PLY with a per-vertex float 'quality' property."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (mesh.n_vertices,):
        raise DimensionMismatch(
            f"need one value per vertex: {values.shape} vs n={mesh.n_vertices}"
        )
    with open(path, "w") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {mesh.n_vertices}\n")
        f.write("property double x\nproperty double y\nproperty double z\n")
        f.write("property double quality\n")
        f.write(f"element face {mesh.n_triangles}\n")
        f.write("property list uchar int vertex_indices\n")
        f.write("end_header\n")
        for (x, y, z), qv in zip(mesh.vertex_positions, values):
            f.write(f"{x:.17g} {y:.17g} {z:.17g} {qv:.17g}\n")
        for a, b, c in mesh.triangles:
            f.write(f"3 {a} {b} {c}\n")
