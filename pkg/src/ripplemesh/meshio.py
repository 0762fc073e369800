"""OBJ and ascii-PLY readers, OBJ writer for dequantized meshes."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import IoError
from .mesh import QuantizedMesh, RawMesh


def _resolve_obj_index(token: str, n_vertices: int) -> int:
    # OBJ indices are 1-based; negative values count back from the end
    idx = int(token.split("/")[0])
    if idx < 0:
        idx = n_vertices + idx
    else:
        idx -= 1
    if idx < 0 or idx >= n_vertices:
        raise IoError(f"face index {token} out of range for {n_vertices} vertices")
    return idx


def read_obj(path: str | Path) -> RawMesh:
    """Parse v/f records; polygons are fan-triangulated around their first vertex."""
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    try:
        with open(path, "r", encoding="utf-8", errors="replace") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                if parts[0] == "v":
                    if len(parts) < 4:
                        raise IoError(f"{path}:{lineno}: vertex needs 3 coordinates")
                    vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
                elif parts[0] == "f":
                    if len(parts) < 4:
                        raise IoError(f"{path}:{lineno}: face needs at least 3 indices")
                    idx = [_resolve_obj_index(tok, len(vertices)) for tok in parts[1:]]
                    for k in range(1, len(idx) - 1):
                        faces.append((idx[0], idx[k], idx[k + 1]))
    except OSError as exc:
        raise IoError(str(exc)) from exc
    except ValueError as exc:
        raise IoError(f"{path}: {exc}") from exc
    if not vertices or not faces:
        raise IoError(f"{path}: no usable geometry")
    return RawMesh(np.asarray(vertices), np.asarray(faces))


def read_ply(path: str | Path) -> RawMesh:
    """Minimal ascii PLY reader: vertex x/y/z and a face index list."""
    try:
        text = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise IoError(f"{path}: missing ply header")

    n_vertex = n_face = 0
    vertex_props: list[str] = []
    element_order: list[str] = []
    i = 1
    try:
        while i < len(lines):
            parts = lines[i].split()
            i += 1
            if not parts:
                continue
            if parts[0] == "format":
                if parts[1] != "ascii":
                    raise IoError(f"{path}: only ascii PLY is supported")
            elif parts[0] == "element":
                element_order.append(parts[1])
                if parts[1] == "vertex":
                    n_vertex = int(parts[2])
                elif parts[1] == "face":
                    n_face = int(parts[2])
            elif parts[0] == "property" and element_order and element_order[-1] == "vertex":
                if parts[1] != "list":
                    vertex_props.append(parts[-1])
            elif parts[0] == "end_header":
                break
        else:
            raise IoError(f"{path}: unterminated header")

        coord_cols = [vertex_props.index(axis) for axis in ("x", "y", "z")]
        vertices = np.empty((n_vertex, 3), dtype=np.float64)
        for k in range(n_vertex):
            row = lines[i + k].split()
            vertices[k] = [float(row[c]) for c in coord_cols]
        i += n_vertex
        faces: list[tuple[int, int, int]] = []
        for k in range(n_face):
            row = lines[i + k].split()
            count = int(row[0])
            idx = [int(t) for t in row[1:1 + count]]
            for m in range(1, count - 1):
                faces.append((idx[0], idx[m], idx[m + 1]))
    except (ValueError, IndexError) as exc:
        raise IoError(f"{path}: malformed PLY: {exc}") from exc
    if n_vertex == 0 or not faces:
        raise IoError(f"{path}: no usable geometry")
    return RawMesh(vertices, np.asarray(faces))


def read_mesh(path: str | Path) -> RawMesh:
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        return read_obj(path)
    if suffix == ".ply":
        return read_ply(path)
    raise IoError(f"{path}: unsupported mesh format {suffix!r}")


def write_obj(mesh: QuantizedMesh | RawMesh, path: str | Path, comment: str | None = None) -> None:
    """Write an OBJ file; quantized meshes are dequantized to model units."""
    if isinstance(mesh, QuantizedMesh):
        verts = mesh.dequantize()
    else:
        verts = mesh.vertices
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for x, y, z in verts:
            fh.write(f"v {x:.9g} {y:.9g} {z:.9g}\n")
        for a, b, c in mesh.faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
