"""Deterministic procedural meshes used by tests, demos, and benchmarks."""

from __future__ import annotations

import numpy as np

from .mesh import RawMesh


def icosphere(subdivisions: int = 1) -> RawMesh:
    """Unit icosphere; 20 * 4^s faces, consistently wound outward."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    vlist = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = (np.asarray(vlist[a]) + np.asarray(vlist[b])) / 2.0
                m /= np.linalg.norm(m)
                cache[key] = len(vlist)
                vlist.append(tuple(m))
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return RawMesh(np.asarray(vlist), np.asarray(faces))


def torus(n_major: int = 24, n_minor: int = 12, major_radius: float = 1.0,
          minor_radius: float = 0.4) -> RawMesh:
    """Closed torus with 2 * n_major * n_minor faces."""
    verts = np.empty((n_major * n_minor, 3))
    for i in range(n_major):
        u = 2.0 * np.pi * i / n_major
        for j in range(n_minor):
            v = 2.0 * np.pi * j / n_minor
            r = major_radius + minor_radius * np.cos(v)
            verts[i * n_minor + j] = (r * np.cos(u), r * np.sin(u), minor_radius * np.sin(v))
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            faces += [(a, b, c), (a, c, d)]
    return RawMesh(verts, np.asarray(faces))


def grid_patch(nx: int = 8, ny: int = 8, bumpy: bool = False) -> RawMesh:
    """Open rectangular patch with 2 * nx * ny faces; optionally non-planar."""
    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 0.8, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    if bumpy:
        gz = 0.1 * np.sin(3.0 * np.pi * gx) * np.cos(2.0 * np.pi * gy)
    else:
        gz = np.zeros_like(gx)
    verts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    faces = []
    for i in range(nx):
        for j in range(ny):
            a = i * (ny + 1) + j
            b = (i + 1) * (ny + 1) + j
            c = (i + 1) * (ny + 1) + j + 1
            d = i * (ny + 1) + j + 1
            faces += [(a, b, c), (a, c, d)]
    return RawMesh(verts, np.asarray(faces))


def open_cylinder(n_segments: int = 16, n_rings: int = 8, radius: float = 0.5,
                  height: float = 2.0) -> RawMesh:
    """Capless tube with 2 * n_segments * n_rings faces and two boundary loops."""
    verts = np.empty(((n_rings + 1) * n_segments, 3))
    for r in range(n_rings + 1):
        z = height * r / n_rings
        for s in range(n_segments):
            t = 2.0 * np.pi * s / n_segments
            verts[r * n_segments + s] = (radius * np.cos(t), radius * np.sin(t), z)
    faces = []
    for r in range(n_rings):
        for s in range(n_segments):
            a = r * n_segments + s
            b = r * n_segments + (s + 1) % n_segments
            c = (r + 1) * n_segments + (s + 1) % n_segments
            d = (r + 1) * n_segments + s
            faces += [(a, b, c), (a, c, d)]
    return RawMesh(verts, np.asarray(faces))


def nonmanifold_book(pages: int = 3) -> RawMesh:
    """Pages of triangles sharing one spine edge.

    The first page runs along the spine, the rest run against it, so the
    spine half-edge of page 0 carries pages-1 twins: a non-manifold edge
    that still traverses as a single component.
    """
    spine_a = (0.0, 0.0, 0.0)
    spine_b = (0.0, 0.0, 1.0)
    verts = [spine_a, spine_b]
    faces = []
    for p in range(pages):
        angle = np.pi * (p + 1) / (pages + 1)
        tip = (np.cos(angle), np.sin(angle), 0.5)
        verts.append(tip)
        t = 2 + p
        if p == 0:
            faces.append((0, 1, t))
        else:
            faces.append((1, 0, t))
    return RawMesh(np.asarray(verts), np.asarray(faces))


def double_cone(n_segments: int = 10) -> RawMesh:
    """Two cone fans joined only at the shared apex vertex.

    No edge crosses the apex, so the traversal splits the mesh into two
    components.
    """
    verts = [(0.0, 0.0, 0.0)]  # shared apex
    faces = []
    for sign in (1.0, -1.0):
        ring = []
        for s in range(n_segments):
            t = 2.0 * np.pi * s / n_segments
            ring.append(len(verts))
            verts.append((0.6 * np.cos(t), 0.6 * np.sin(t), sign * 1.0))
        for s in range(n_segments):
            a, b = ring[s], ring[(s + 1) % n_segments]
            faces.append((0, a, b) if sign > 0 else (0, b, a))
    return RawMesh(np.asarray(verts), np.asarray(faces))


def moebius_strip(n_segments: int = 24, width: float = 0.3) -> RawMesh:
    """Half-twisted band; no consistent winding exists."""
    verts = []
    for s in range(n_segments):
        t = 2.0 * np.pi * s / n_segments
        half = t / 2.0
        for w in (-width, width):
            x = (1.0 + w * np.cos(half)) * np.cos(t)
            y = (1.0 + w * np.cos(half)) * np.sin(t)
            z = w * np.sin(half)
            verts.append((x, y, z))
    faces = []
    for s in range(n_segments):
        a = 2 * s
        b = 2 * s + 1
        if s + 1 < n_segments:
            c, d = 2 * (s + 1), 2 * (s + 1) + 1
        else:
            c, d = 1, 0  # seam reattaches with flipped width axis
        faces += [(a, c, b), (b, c, d)]
    return RawMesh(np.asarray(verts), np.asarray(faces))


def assembly(n_components: int, seed: int = 7) -> RawMesh:
    """Well-separated multi-component scene cycling through the primitives."""
    rng = np.random.default_rng(seed + n_components)
    parts = []
    for k in range(n_components):
        kind = k % 4
        if kind == 0:
            part = icosphere(0)
        elif kind == 1:
            part = torus(8, 6)
        elif kind == 2:
            part = grid_patch(3, 3)
        else:
            part = open_cylinder(8, 3)
        offset = np.array([3.0 * (k % 5), 3.0 * (k // 5), 0.0])
        jitter = rng.uniform(-0.2, 0.2, 3)
        parts.append((part.vertices * 0.4 + offset + jitter, part.faces))
    verts = np.concatenate([p[0] for p in parts])
    offsets = np.cumsum([0] + [len(p[0]) for p in parts[:-1]])
    faces = np.concatenate([p[1] + off for p, off in zip(parts, offsets)])
    return RawMesh(verts, faces)


def corpus() -> list[tuple[str, RawMesh]]:
    """Named procedural corpus covering the tokenizer's edge cases."""
    meshes: list[tuple[str, RawMesh]] = []
    for s in (1, 2, 3):
        meshes.append((f"icosphere_s{s}", icosphere(s)))
    for nmaj, nmin in ((12, 8), (16, 10), (24, 12), (32, 16), (40, 20), (24, 24), (48, 12), (50, 25)):
        meshes.append((f"torus_{nmaj}x{nmin}", torus(nmaj, nmin)))
    for nx, ny in ((4, 4), (8, 8), (12, 6), (16, 16), (20, 10), (6, 24), (10, 10), (25, 20)):
        meshes.append((f"grid_{nx}x{ny}", grid_patch(nx, ny)))
        meshes.append((f"bumpygrid_{nx}x{ny}", grid_patch(nx, ny, bumpy=True)))
    for nseg, nring in ((8, 4), (12, 8), (16, 12), (24, 16), (32, 20)):
        meshes.append((f"cylinder_{nseg}x{nring}", open_cylinder(nseg, nring)))
    meshes.append(("book_3page", nonmanifold_book(3)))
    meshes.append(("book_5page", nonmanifold_book(5)))
    meshes.append(("double_cone", double_cone(10)))
    for k in range(2, 21):
        meshes.append((f"assembly_{k:02d}", assembly(k)))
    return meshes
