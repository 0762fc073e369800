"""Mesh preparation: normalization, quantization, sanitizing, canonical
ordering, winding repair, and half-edge construction.

The preparation pipeline is a pure function of the input bytes:

    normalize_and_quantize -> sanitize -> orient_faces -> canonical_sort
        -> build_half_edges

Winding repair runs before the canonical sort so that face sort keys are
computed on the final orientations; on already-consistent input the two
orders produce identical results because no face is flipped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, EmptyAfterSanitize, EmptyInput


@dataclass(frozen=True)
class RawMesh:
    """Triangle mesh in model units: float vertices, integer face triples."""

    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray     # (F, 3) int64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (V, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {f.shape}")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)


@dataclass(frozen=True)
class NormalizationTransform:
    """Center/scale pair mapping model units to the unit cube and back."""

    center: tuple[float, float, float]
    scale: float

    @classmethod
    def identity(cls) -> "NormalizationTransform":
        return cls((0.0, 0.0, 0.0), 1.0)


@dataclass(frozen=True)
class QuantizedMesh:
    """Mesh with integer-bin vertex coordinates in [0, bins-1].

    ``transform`` retains the normalization so bins can be mapped back to
    model units; detokenized meshes carry the identity transform and live
    in normalized space.
    """

    bins: int
    vertices: np.ndarray  # (V, 3) int32
    faces: np.ndarray     # (F, 3) int64
    transform: NormalizationTransform = field(default_factory=NormalizationTransform.identity)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.int32))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def dequantize_normalized(self) -> np.ndarray:
        """Bin centers in normalized coordinates, each axis in [-0.5, 0.5]."""
        return (self.vertices.astype(np.float64) + 0.5) / self.bins - 0.5

    def dequantize(self) -> np.ndarray:
        """Bin centers mapped back to model units via the stored transform."""
        return self.dequantize_normalized() * self.transform.scale + np.asarray(self.transform.center)

    def vertex_keys(self) -> np.ndarray:
        """Scalar z-y-x sort key per vertex; distinct triples get distinct keys."""
        v = self.vertices.astype(np.int64)
        return (v[:, 2] * self.bins + v[:, 1]) * self.bins + v[:, 0]


@dataclass
class SanitizeStats:
    vertices_before: int
    vertices_after_merge: int
    faces_before: int
    faces_after: int
    degenerate_faces_dropped: int
    duplicate_faces_dropped: int
    unreferenced_vertices_dropped: int
    kept_face_indices: np.ndarray  # positions of surviving faces in the input list

    @property
    def vertices_merged(self) -> int:
        return self.vertices_before - self.vertices_after_merge

    @property
    def vertex_drop_ratio(self) -> float:
        """Fraction of vertices removed by the merge step alone."""
        if self.vertices_before == 0:
            return 0.0
        return (self.vertices_before - self.vertices_after_merge) / self.vertices_before


@dataclass
class OrientStats:
    flipped_faces: int
    unorientable_components: int

    @property
    def unorientable(self) -> bool:
        return self.unorientable_components > 0


def normalize_and_quantize(mesh: RawMesh, bins: int = 256) -> QuantizedMesh:
    """Scale the mesh uniformly into the unit cube and snap to integer bins.

    The longest axis of the tight bounding box spans [-0.5, 0.5]; each
    normalized coordinate maps to floor((x + 0.5) * bins) clamped to
    [0, bins-1]. Axes with zero extent land in the center bin.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if len(mesh.vertices) == 0 or len(mesh.faces) == 0:
        raise EmptyInput("mesh has no vertices or no faces")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    scale = float((hi - lo).max())
    if scale <= 0.0:
        raise DegenerateGeometry("bounding box has zero extent on every axis")
    center = (lo + hi) / 2.0
    normalized = (mesh.vertices - center) / scale
    q = np.floor((normalized + 0.5) * bins).astype(np.int64)
    np.clip(q, 0, bins - 1, out=q)
    return QuantizedMesh(
        bins=bins,
        vertices=q.astype(np.int32),
        faces=mesh.faces.copy(),
        transform=NormalizationTransform(tuple(float(c) for c in center), scale),
    )


def _first_occurrence_merge(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge identical rows, keeping first occurrences in input order.

    Returns (merged_vertices, remap) with remap[old_index] = new_index.
    """
    uniq, first_idx, inverse = np.unique(vertices, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first_idx, kind="stable")
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    return uniq[order], rank[inverse.ravel()]


def _rotate_min_first(faces: np.ndarray, key_of: np.ndarray | None = None) -> np.ndarray:
    """Rotate each face so its smallest entry (by key, default index) is first."""
    if len(faces) == 0:
        return faces.copy()
    vals = faces if key_of is None else key_of[faces]
    shift = np.argmin(vals, axis=1)
    cols = (shift[:, None] + np.arange(3)[None, :]) % 3
    return np.take_along_axis(faces, cols, axis=1)


def sanitize(mesh: QuantizedMesh) -> tuple[QuantizedMesh, SanitizeStats]:
    """Merge coincident vertices, drop degenerate and duplicate faces.

    First occurrence wins for merged vertices. Duplicate detection is
    orientation aware: a face and its reversed copy are distinct and both
    survive. Vertices left unreferenced by the surviving faces are dropped.
    """
    v_before = mesh.vertex_count
    f_before = mesh.face_count
    merged, remap = _first_occurrence_merge(mesh.vertices)
    v_after_merge = len(merged)
    faces = remap[mesh.faces]

    ok = (
        (faces[:, 0] != faces[:, 1])
        & (faces[:, 1] != faces[:, 2])
        & (faces[:, 2] != faces[:, 0])
    )
    degenerate = int(f_before - ok.sum())
    kept = np.flatnonzero(ok)
    faces = faces[kept]

    # Cyclic canonical form: duplicate faces share it, reversed copies do not.
    if len(faces):
        canon = _rotate_min_first(faces)
        _, first_idx = np.unique(canon, axis=0, return_index=True)
        keep_mask = np.zeros(len(faces), dtype=bool)
        keep_mask[first_idx] = True
        duplicates = int(len(faces) - keep_mask.sum())
        kept = kept[keep_mask]
        faces = faces[keep_mask]
    else:
        duplicates = 0

    if len(faces) == 0:
        raise EmptyAfterSanitize("no faces survived sanitizing")

    referenced = np.unique(faces)
    unreferenced = v_after_merge - len(referenced)
    final_remap = np.full(v_after_merge, -1, dtype=np.int64)
    final_remap[referenced] = np.arange(len(referenced))
    out = QuantizedMesh(
        bins=mesh.bins,
        vertices=merged[referenced],
        faces=final_remap[faces],
        transform=mesh.transform,
    )
    stats = SanitizeStats(
        vertices_before=v_before,
        vertices_after_merge=v_after_merge,
        faces_before=f_before,
        faces_after=len(faces),
        degenerate_faces_dropped=degenerate,
        duplicate_faces_dropped=duplicates,
        unreferenced_vertices_dropped=int(unreferenced),
        kept_face_indices=kept,
    )
    return out, stats


def canonical_sort(mesh: QuantizedMesh) -> QuantizedMesh:
    """Deterministic face order: rotate each face so its z-y-x smallest
    vertex leads (orientation preserved), then sort faces by their vertex
    key triples. Idempotent."""
    if mesh.face_count == 0:
        return mesh
    keys = mesh.vertex_keys()
    faces = _rotate_min_first(mesh.faces, key_of=keys)
    k3 = keys[faces]
    order = np.lexsort((k3[:, 2], k3[:, 1], k3[:, 0]))
    return QuantizedMesh(
        bins=mesh.bins,
        vertices=mesh.vertices,
        faces=faces[order],
        transform=mesh.transform,
    )


def orient_faces(mesh: QuantizedMesh) -> tuple[QuantizedMesh, OrientStats]:
    """Repair inconsistent windings by greedy BFS propagation.

    Within each component (faces linked through edges shared by exactly two
    faces) the first face keeps its input winding and neighbors are flipped
    to induce opposite half-edges. Components where no consistent assignment
    exists are returned unchanged and counted as unorientable. Consistent
    input is preserved verbatim.
    """
    faces = mesh.faces
    n = len(faces)
    if n == 0:
        return mesh, OrientStats(0, 0)

    u = faces[:, [0, 1, 2]].ravel()
    v = faces[:, [1, 2, 0]].ravel()
    a = np.minimum(u, v).astype(np.int64)
    b = np.maximum(u, v).astype(np.int64)
    key = a * mesh.vertex_count + b
    forward = u < v  # stored direction equals ascending-index direction

    order = np.argsort(key, kind="stable")
    sk = key[order]
    bounds = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1], True])
    sizes = np.diff(bounds)

    # adjacency only across edges with exactly two incident half-edges
    pair_starts = bounds[:-1][sizes == 2]
    h0 = order[pair_starts]
    h1 = order[pair_starts + 1]
    f0 = h0 // 3
    f1 = h1 // 3
    distinct = f0 != f1
    same = forward[h0] == forward[h1]
    if not same[distinct].any():
        # every manifold edge already induces opposite half-edges
        return mesh, OrientStats(0, 0)
    adj: list[list[tuple[int, bool]]] = [[] for _ in range(n)]
    for i in np.flatnonzero(distinct):
        adj[f0[i]].append((int(f1[i]), bool(same[i])))
        adj[f1[i]].append((int(f0[i]), bool(same[i])))

    flip = np.zeros(n, dtype=bool)
    assigned = np.zeros(n, dtype=bool)
    flipped_total = 0
    unorientable = 0
    for seed in range(n):
        if assigned[seed]:
            continue
        component = [seed]
        assigned[seed] = True
        flip[seed] = False
        queue = deque([seed])
        conflict = False
        while queue:
            f = queue.popleft()
            for g, same_dir in adj[f]:
                want = flip[f] ^ same_dir
                if not assigned[g]:
                    assigned[g] = True
                    flip[g] = want
                    component.append(g)
                    queue.append(g)
                elif flip[g] != want:
                    conflict = True
        if conflict:
            unorientable += 1
            flip[component] = False
        else:
            flipped_total += int(flip[component].sum())

    if flipped_total:
        out_faces = faces.copy()
        sel = np.flatnonzero(flip)
        out_faces[sel] = out_faces[sel][:, [0, 2, 1]]
        mesh = QuantizedMesh(mesh.bins, mesh.vertices, out_faces, mesh.transform)
    return mesh, OrientStats(flipped_total, unorientable)


class HalfEdgeStructure:
    """Directed half-edges with multi-twin adjacency.

    Face f owns half-edges 3f, 3f+1, 3f+2 forming a CCW cycle; half-edge
    3f+j runs from faces[f, j] to faces[f, (j+1) % 3]. ``twins[h]`` holds
    every half-edge on the same vertex pair with the opposite direction, in
    construction (face index) order. Co-directional half-edges on a shared
    vertex pair are never twins, which is what confines traversal to
    orientation-consistent crossings at non-manifold edges.
    """

    def __init__(self, mesh: QuantizedMesh, origins: np.ndarray, twins: list[tuple[int, ...]],
                 twin_pairs: np.ndarray | None = None):
        self.mesh = mesh
        self.origins = origins
        self.twins = twins
        if twin_pairs is None:
            twin_pairs = np.array(
                [(h, t) for h, ts in enumerate(twins) for t in ts if h < t],
                dtype=np.int64,
            ).reshape(-1, 2)
        self.twin_pairs = twin_pairs  # each opposite half-edge pair once, h < t

    @property
    def half_edge_count(self) -> int:
        return len(self.origins)

    @property
    def face_count(self) -> int:
        return self.mesh.face_count

    @staticmethod
    def next(h: int) -> int:
        return h - h % 3 + (h + 1) % 3

    @staticmethod
    def prev(h: int) -> int:
        return h - h % 3 + (h + 2) % 3

    @staticmethod
    def face_of(h: int) -> int:
        return h // 3

    @staticmethod
    def entry_half_edge(f: int) -> int:
        return 3 * f

    def origin(self, h: int) -> int:
        return int(self.origins[h])

    def destination(self, h: int) -> int:
        return int(self.origins[self.next(h)])

    def twin_counts(self) -> np.ndarray:
        return np.fromiter((len(t) for t in self.twins), dtype=np.int64, count=len(self.twins))

    def boundary_half_edges(self) -> np.ndarray:
        """Half-edges with no twin at all."""
        return np.flatnonzero(self.twin_counts() == 0)

    def component_labels(self) -> np.ndarray:
        """Face component ids under opposite-half-edge connectivity,
        numbered by first appearance in face order."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        n = self.face_count
        rows = self.twin_pairs[:, 0] // 3
        cols = self.twin_pairs[:, 1] // 3
        graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        _, raw = connected_components(graph, directed=False)
        first: dict[int, int] = {}
        labels = np.empty(n, dtype=np.int64)
        for f, r in enumerate(raw.tolist()):
            if r not in first:
                first[r] = len(first)
            labels[f] = first[r]
        return labels


def build_half_edges(mesh: QuantizedMesh) -> HalfEdgeStructure:
    """Derive the half-edge structure, twin lists populated with every
    opposite-oriented partner (non-manifold aware)."""
    faces = mesh.faces
    n = len(faces)
    u = faces[:, [0, 1, 2]].ravel()
    v = faces[:, [1, 2, 0]].ravel()
    a = np.minimum(u, v).astype(np.int64)
    b = np.maximum(u, v).astype(np.int64)
    key = a * max(mesh.vertex_count, 1) + b
    forward = u < v

    order = np.argsort(key, kind="stable")
    sk = key[order]
    bounds = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1], True])
    sizes = np.diff(bounds)

    twins: list[tuple[int, ...]] = [()] * (3 * n)
    # fast path: opposite-oriented manifold pairs, the common case
    pair_starts = bounds[:-1][sizes == 2]
    h0 = order[pair_starts]
    h1 = order[pair_starts + 1]
    opposite = forward[h0] != forward[h1]
    for a_, b_ in zip(h0[opposite].tolist(), h1[opposite].tolist()):
        twins[a_] = (b_,)
        twins[b_] = (a_,)
    extra_pairs: list[tuple[int, int]] = []
    for g in np.flatnonzero(sizes > 2).tolist() + np.flatnonzero(sizes == 2)[~opposite].tolist():
        members = order[bounds[g]:bounds[g + 1]]
        fwd = tuple(int(h) for h in members if forward[h])
        bwd = tuple(int(h) for h in members if not forward[h])
        for h in fwd:
            twins[h] = bwd
        for h in bwd:
            twins[h] = fwd
        extra_pairs.extend((min(f, b), max(f, b)) for f in fwd for b in bwd)
    pairs = np.column_stack([h0[opposite], h1[opposite]]).astype(np.int64).reshape(-1, 2)
    if extra_pairs:
        pairs = np.concatenate([pairs, np.asarray(extra_pairs, dtype=np.int64)])
    return HalfEdgeStructure(mesh, u.astype(np.int64), twins, twin_pairs=pairs)


@dataclass
class PreparedMesh:
    """Output of the full preparation pipeline plus per-stage statistics."""

    structure: HalfEdgeStructure
    sanitize_stats: SanitizeStats
    orient_stats: OrientStats

    @property
    def mesh(self) -> QuantizedMesh:
        return self.structure.mesh


def prepare(mesh: RawMesh, bins: int = 256) -> PreparedMesh:
    """Run the whole preparation pipeline on a raw mesh."""
    quantized = normalize_and_quantize(mesh, bins)
    sanitized, san_stats = sanitize(quantized)
    oriented, orient_stats = orient_faces(sanitized)
    ordered = canonical_sort(oriented)
    return PreparedMesh(build_half_edges(ordered), san_stats, orient_stats)
