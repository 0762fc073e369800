"""Dataset curation filters and surface-similarity metrics.

The filter pipeline measures, in order: face count, vertex/face ratio,
narrow-face fraction, component count after small-cluster pruning,
boundary length, BFS displacement from a dry tokenization, vertex-merge
drop ratio, and the fraction of faces made self-intersecting or
overlapping by quantization.

Geometric predicates run on integer bin coordinates and are exact: the
vectorized stages stay far below 2^53 so float64 arithmetic is integer
arithmetic, and the rare pairs that survive the sign filters are decided
with rational arithmetic. "Intersecting" and "overlapping" both mean that
relative interiors meet; shared edges and vertex touches do not count.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateGeometry
from .mesh import PreparedMesh, RawMesh, prepare
from .tokenizer import ControlVocab, compression_stats, tokenize


# ---------------------------------------------------------------------------
# exact triangle predicates
# ---------------------------------------------------------------------------

def _plane_keys(verts: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Canonical integer plane key (nx, ny, nz, offset) per face.

    Normals are reduced by their gcd and sign-fixed on the first nonzero
    component, so coplanar faces share a key regardless of winding.
    Degenerate (zero-area) faces get an all-zero normal.
    """
    v = verts.astype(np.int64)
    a, b, c = v[faces[:, 0]], v[faces[:, 1]], v[faces[:, 2]]
    n = np.cross(b - a, c - a)
    g = np.gcd.reduce(np.abs(n), axis=1)
    g[g == 0] = 1
    n = n // g[:, None]
    lead = np.where(n[:, 0] != 0, n[:, 0], np.where(n[:, 1] != 0, n[:, 1], n[:, 2]))
    sign = np.where(lead < 0, -1, 1)
    n = n * sign[:, None]
    d = np.einsum("ij,ij->i", n, a)
    return np.column_stack([n, d])


def _sat_overlap_pairs(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Open-interior overlap of coplanar triangle pairs in 2D.

    ``t1``/``t2`` are (P, 3, 2) integer arrays. Interiors intersect iff the
    projections onto all six edge normals overlap with positive measure.
    """
    t1 = t1.astype(np.int64)
    t2 = t2.astype(np.int64)
    edges = np.concatenate([np.roll(t1, -1, axis=1) - t1, np.roll(t2, -1, axis=1) - t2], axis=1)
    axes = np.stack([-edges[..., 1], edges[..., 0]], axis=-1)  # (P, 6, 2)
    p1 = np.einsum("pav,pnv->pan", axes, t1)  # (P, 6, 3) projections
    p2 = np.einsum("pav,pnv->pan", axes, t2)
    lo = np.maximum(p1.min(axis=2), p2.min(axis=2))
    hi = np.minimum(p1.max(axis=2), p2.max(axis=2))
    strict = (lo < hi).all(axis=1)

    def area2(t):
        e1 = t[:, 1] - t[:, 0]
        e2 = t[:, 2] - t[:, 0]
        return e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]

    return strict & (area2(t1) != 0) & (area2(t2) != 0)


def _dominant_axis(vec) -> int:
    return int(np.argmax(np.abs(np.asarray(vec))))


def _ratio(num: int, den: int) -> tuple[int, int]:
    """Exact rational as an integer pair with positive denominator."""
    return (num, den) if den > 0 else (-num, -den)


def _ratio_lt(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] * b[1] < b[0] * a[1]


def _edge_crossing(p, q, dp: int, dq: int, axis: int) -> tuple[int, int]:
    return _ratio(q[axis] * dp - p[axis] * dq, dp - dq)


def _open_chord(points, dists: list[int], axis: int):
    """Open interval cut by a plane on a triangle, as exact integer ratios.

    ``dists`` are the signed plane distances of the three vertices; the
    interval is the triangle's open chord on the intersection line,
    parametrized by the ``axis`` coordinate. Returns None when the relative
    interior does not meet the line (single-vertex touch, edge-in-plane,
    or strictly one-sided).
    """
    signs = [0 if d == 0 else (1 if d > 0 else -1) for d in dists]
    zero_count = signs.count(0)
    if zero_count == 3:
        raise ValueError("coplanar pair reached the chord test")
    if zero_count == 2:
        return None
    if -1 not in signs or 1 not in signs:
        return None  # one-sided (zero_count <= 1): touch or clear separation

    ts = []
    if zero_count == 1:
        k = signs.index(0)
        ts.append((int(points[k][axis]), 1))
        i, j = [m for m in range(3) if m != k]
        ts.append(_edge_crossing(points[i], points[j], dists[i], dists[j], axis))
    else:
        for i, j in ((0, 1), (1, 2), (2, 0)):
            if (dists[i] > 0) != (dists[j] > 0):
                ts.append(_edge_crossing(points[i], points[j], dists[i], dists[j], axis))
    lo, hi = ts
    if _ratio_lt(hi, lo):
        lo, hi = hi, lo
    if lo[0] * hi[1] == hi[0] * lo[1]:
        return None
    return lo, hi


def _int_normal(t):
    (ax, ay, az), (bx, by, bz), (cx, cy, cz) = t
    ux, uy, uz = bx - ax, by - ay, bz - az
    vx, vy, vz = cx - ax, cy - ay, cz - az
    return (uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx)


def _tri_tri_proper(p1, p2) -> bool:
    """Exact open-interior intersection test for one non-coplanar pair.

    ``p1``/``p2`` are sequences of three integer coordinate triples (plain
    Python ints, so nothing overflows). Assumes the caller already verified
    that both triangles straddle (or touch) each other's planes.
    """
    n1 = _int_normal(p1)
    n2 = _int_normal(p2)
    o1, o2 = p1[0], p2[0]
    d2 = [n1[0] * (q[0] - o1[0]) + n1[1] * (q[1] - o1[1]) + n1[2] * (q[2] - o1[2]) for q in p2]
    d1 = [n2[0] * (q[0] - o2[0]) + n2[1] * (q[1] - o2[1]) + n2[2] * (q[2] - o2[2]) for q in p1]
    dx = n1[1] * n2[2] - n1[2] * n2[1]
    dy = n1[2] * n2[0] - n1[0] * n2[2]
    dz = n1[0] * n2[1] - n1[1] * n2[0]
    if dx == 0 and dy == 0 and dz == 0:
        return False  # parallel distinct planes (coplanar handled elsewhere)
    adx, ady, adz = abs(dx), abs(dy), abs(dz)
    axis = 0 if (adx >= ady and adx >= adz) else (1 if ady >= adz else 2)
    chord1 = _open_chord(p1, d1, axis)
    if chord1 is None:
        return False
    chord2 = _open_chord(p2, d2, axis)
    if chord2 is None:
        return False
    lo = chord2[0] if _ratio_lt(chord1[0], chord2[0]) else chord1[0]
    hi = chord2[1] if _ratio_lt(chord2[1], chord1[1]) else chord1[1]
    return _ratio_lt(lo, hi)


def _aabb_candidate_pairs(verts: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Face pairs whose AABBs intersect.

    Candidates come from a KD-tree over face centers queried at the largest
    pairwise reach (half-diagonals), then the exact box test prunes them.
    """
    v = verts.astype(np.int64)
    tri = v[faces]  # (F, 3, 3)
    lo = tri.min(axis=1)
    hi = tri.max(axis=1)
    centers = (lo + hi) / 2.0
    reach = np.linalg.norm((hi - lo) / 2.0, axis=1)
    radius = float(reach.max()) * 2.0 + 1e-9
    pairs = cKDTree(centers).query_pairs(radius, output_type="ndarray")
    if not len(pairs):
        return np.zeros((0, 2), dtype=np.int64)
    pairs = pairs.astype(np.int64)
    ok = (
        (np.maximum(lo[pairs[:, 0]], lo[pairs[:, 1]]) <= np.minimum(hi[pairs[:, 0]], hi[pairs[:, 1]]))
        .all(axis=1)
    )
    return pairs[ok]


def overlapping_faces(verts: np.ndarray, faces: np.ndarray) -> set[int]:
    """Faces whose interior overlaps a coplanar partner's interior."""
    keys = _plane_keys(verts, faces)
    order = np.lexsort(keys.T[::-1])
    sk = keys[order]
    bounds = np.flatnonzero(np.r_[True, (sk[1:] != sk[:-1]).any(axis=1), True])
    sizes = np.diff(bounds)
    v = verts.astype(np.int64)

    # gather box-overlapping pairs across all coplanar groups, then run the
    # projected SAT once over the whole batch
    cand_i: list[np.ndarray] = []
    cand_j: list[np.ndarray] = []
    cand_axis: list[np.ndarray] = []
    triu_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for g in np.flatnonzero(sizes >= 2):
        members = order[bounds[g]:bounds[g + 1]]
        if not keys[members[0], :3].any():
            continue  # degenerate normals cannot overlap
        axis = _dominant_axis(keys[members[0], :3])
        keep = [k for k in range(3) if k != axis]
        tri2d = v[faces[members]][:, :, keep]
        lo = tri2d.min(axis=1)
        hi = tri2d.max(axis=1)
        m = len(members)
        if m not in triu_cache:
            triu_cache[m] = np.triu_indices(m, k=1)
        ii, jj = triu_cache[m]
        box = ((np.maximum(lo[ii], lo[jj]) < np.minimum(hi[ii], hi[jj])).all(axis=1))
        if box.any():
            cand_i.append(members[ii[box]])
            cand_j.append(members[jj[box]])
            cand_axis.append(np.full(int(box.sum()), axis, dtype=np.int64))
    if not cand_i:
        return set()
    fi = np.concatenate(cand_i)
    fj = np.concatenate(cand_j)
    axes = np.concatenate(cand_axis)
    keep_map = np.array([[1, 2], [0, 2], [0, 1]], dtype=np.int64)
    cols = keep_map[axes]  # (P, 2)
    t1 = np.take_along_axis(v[faces[fi]], cols[:, None, :].repeat(3, axis=1), axis=2)
    t2 = np.take_along_axis(v[faces[fj]], cols[:, None, :].repeat(3, axis=1), axis=2)
    hit = _sat_overlap_pairs(t1, t2)
    bad: set[int] = set()
    for i, j in zip(fi[hit], fj[hit]):
        bad.add(int(i))
        bad.add(int(j))
    return bad


def _chord_intervals_float(tri: np.ndarray, d: np.ndarray, axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Approximate chord intervals (lo, hi) along the per-pair axis.

    Endpoint error is bounded by ~2e-12 on coordinates up to 2^13, so
    comparisons with a 1e-6 margin are sound; ties go to the exact path.
    """
    p = np.take_along_axis(tri.astype(np.float64), axis[:, None, None].repeat(3, axis=1), axis=2)[:, :, 0]
    df = d.astype(np.float64)
    cand = np.full((len(tri), 6), np.nan)
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        crossing = ((d[:, i] > 0) & (d[:, j] < 0)) | ((d[:, i] < 0) & (d[:, j] > 0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (p[:, j] * df[:, i] - p[:, i] * df[:, j]) / (df[:, i] - df[:, j])
        cand[:, k] = np.where(crossing, t, np.nan)
    for k in range(3):
        cand[:, 3 + k] = np.where(d[:, k] == 0, p[:, k], np.nan)
    with np.errstate(all="ignore"):
        return np.nanmin(cand, axis=1), np.nanmax(cand, axis=1)


def self_intersecting_faces(verts: np.ndarray, faces: np.ndarray) -> set[int]:
    """Faces whose interior properly intersects another face's interior.

    Candidate pairs come from a KD-tree box filter; exact sign tests reject
    nearly everything (including every shared-edge pair); a float interval
    comparison with a safety margin settles most survivors; only near-ties
    reach the exact rational chord comparison.
    """
    if len(faces) < 2:
        return set()
    v = verts.astype(np.int64)
    pairs = _aabb_candidate_pairs(v, faces)
    if not len(pairs):
        return set()

    keys = _plane_keys(v, faces)
    same_plane = (keys[pairs[:, 0]] == keys[pairs[:, 1]]).all(axis=1)
    pairs = pairs[~same_plane]  # coplanar pairs belong to the overlap test
    if not len(pairs):
        return set()

    tri1 = v[faces[pairs[:, 0]]]
    tri2 = v[faces[pairs[:, 1]]]

    def plane_normals(tri_ref):
        return np.cross(tri_ref[:, 1] - tri_ref[:, 0], tri_ref[:, 2] - tri_ref[:, 0])

    n1 = plane_normals(tri1)
    n2 = plane_normals(tri2)
    d2 = np.einsum("pv,pnv->pn", n1, tri2 - tri1[:, 0:1])
    d1 = np.einsum("pv,pnv->pn", n2, tri1 - tri2[:, 0:1])

    def chord_possible(d):
        pos = (d > 0).sum(axis=1)
        neg = (d < 0).sum(axis=1)
        zero = (d == 0).sum(axis=1)
        return (pos > 0) & (neg > 0) & (zero <= 1)

    survivors = np.flatnonzero(chord_possible(d1) & chord_possible(d2))
    if not len(survivors):
        return set()

    direction = np.cross(n1[survivors].astype(np.float64), n2[survivors].astype(np.float64))
    axis = np.argmax(np.abs(direction), axis=1)
    lo1, hi1 = _chord_intervals_float(tri1[survivors], d1[survivors], axis)
    lo2, hi2 = _chord_intervals_float(tri2[survivors], d2[survivors], axis)
    gap = np.minimum(hi1, hi2) - np.maximum(lo1, lo2)
    margin = 1e-6
    definite_yes = gap > margin
    uncertain = np.abs(gap) <= margin

    bad: set[int] = set()
    for p in survivors[definite_yes]:
        bad.add(int(pairs[p, 0]))
        bad.add(int(pairs[p, 1]))
    close = survivors[uncertain]
    if len(close):
        t1_list = tri1[close].tolist()
        t2_list = tri2[close].tolist()
        for k, p in enumerate(close):
            if _tri_tri_proper(t1_list[k], t2_list[k]):
                bad.add(int(pairs[p, 0]))
                bad.add(int(pairs[p, 1]))
    return bad


# ---------------------------------------------------------------------------
# filter pipeline
# ---------------------------------------------------------------------------

@dataclass
class FilterConfig:
    face_count_range: tuple[int, int] = (500, 20000)
    vertex_face_ratio_max: float = 0.8
    narrow_angle_deg: float = 5.0
    narrow_face_frac_max: float = 0.20
    bfs_displacement_max: int = 100  # max root offset must stay strictly below
    boundary_len_max: int = 500
    components_max: int = 20
    prune_cluster_faces: int = 10
    prune_distance: float = 0.05
    merge_vertex_drop_max: float = 0.50
    bad_face_frac_max: float = 0.10
    bins: int = 256
    baseline_bins: int = 8192  # fine grid standing in for the unquantized mesh

    def __post_init__(self):
        lo, hi = self.face_count_range
        if lo > hi or lo < 0:
            raise ValueError("face_count_range must be ordered and non-negative")

    @classmethod
    def from_json(cls, text: str) -> "FilterConfig":
        data = json.loads(text)
        if "face_count_range" in data:
            data["face_count_range"] = tuple(data["face_count_range"])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: str
    passed: bool


@dataclass
class FilterReport:
    checks: list[CheckResult] = field(default_factory=list)
    elapsed_seconds: float = 0.0
    error: str | None = None

    @property
    def verdict(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "elapsed_seconds": self.elapsed_seconds,
            "error": self.error,
            "checks": [asdict(c) for c in self.checks],
        }


def _min_angles_deg(verts: np.ndarray, faces: np.ndarray) -> np.ndarray:
    tri = verts[faces]
    angles = np.empty((len(faces), 3))
    for k in range(3):
        u = tri[:, (k + 1) % 3] - tri[:, k]
        w = tri[:, (k + 2) % 3] - tri[:, k]
        nu = np.linalg.norm(u, axis=1)
        nw = np.linalg.norm(w, axis=1)
        denom = np.maximum(nu * nw, 1e-300)
        cosang = np.clip(np.einsum("ij,ij->i", u, w) / denom, -1.0, 1.0)
        angles[:, k] = np.degrees(np.arccos(cosang))
    return angles.min(axis=1)


def _component_count_after_pruning(prepared: PreparedMesh, cfg: FilterConfig) -> tuple[int, int]:
    labels = prepared.structure.component_labels()
    n_comp = int(labels.max()) + 1 if len(labels) else 0
    sizes = np.bincount(labels, minlength=n_comp)
    valid = np.flatnonzero(sizes >= cfg.prune_cluster_faces)
    small = np.flatnonzero(sizes < cfg.prune_cluster_faces)
    if len(valid) == 0 or len(small) == 0:
        return n_comp, 0
    coords = prepared.mesh.dequantize_normalized()
    faces = prepared.mesh.faces
    centroids = coords[faces].mean(axis=1)
    pruned = 0
    boxes = []
    for c in valid:
        pts = coords[np.unique(faces[labels == c])]
        boxes.append((pts.min(axis=0), pts.max(axis=0)))
    for c in small:
        centroid = centroids[labels == c].mean(axis=0)
        for lo, hi in boxes:
            gap = np.maximum(np.maximum(lo - centroid, centroid - hi), 0.0)
            if np.linalg.norm(gap) <= cfg.prune_distance:
                pruned += 1
                break
    return n_comp - pruned, pruned


def _new_bad_face_fraction(raw: RawMesh, prepared: PreparedMesh, cfg: FilterConfig) -> float:
    mesh = prepared.mesh
    bad_q = overlapping_faces(mesh.vertices, mesh.faces)
    bad_q |= self_intersecting_faces(mesh.vertices, mesh.faces)
    if not bad_q:
        return 0.0
    # baseline on a fine grid: bad faces already present before coarse binning
    kept = prepared.sanitize_stats.kept_face_indices
    lo = raw.vertices.min(axis=0)
    hi = raw.vertices.max(axis=0)
    scale = float((hi - lo).max())
    normalized = (raw.vertices - (lo + hi) / 2.0) / scale
    fine = np.clip(np.floor((normalized + 0.5) * cfg.baseline_bins), 0, cfg.baseline_bins - 1).astype(np.int64)
    base_faces = raw.faces[kept]
    bad_raw = overlapping_faces(fine, base_faces)
    bad_raw |= self_intersecting_faces(fine, base_faces)
    new_bad = bad_q - bad_raw
    return len(new_bad) / mesh.face_count


def filter_mesh(raw: RawMesh, cfg: FilterConfig | None = None) -> FilterReport:
    """Run every curation check and report measured values and verdicts."""
    cfg = cfg or FilterConfig()
    report = FilterReport()
    started = time.perf_counter()

    def add(name, value, threshold, passed):
        report.checks.append(CheckResult(name, float(value), threshold, bool(passed)))

    n_faces = len(raw.faces)
    n_verts = len(raw.vertices)
    lo, hi = cfg.face_count_range
    add("face_count", n_faces, f"[{lo}, {hi}]", lo <= n_faces <= hi)
    ratio = n_verts / n_faces if n_faces else float("inf")
    add("vertex_face_ratio", ratio, f"<= {cfg.vertex_face_ratio_max}", ratio <= cfg.vertex_face_ratio_max)

    try:
        prepared = prepare(raw, cfg.bins)
    except Exception as exc:  # noqa: BLE001 - any preparation failure fails the mesh
        report.error = f"{type(exc).__name__}: {exc}"
        report.elapsed_seconds = time.perf_counter() - started
        return report

    mesh = prepared.mesh
    coords = mesh.dequantize_normalized()
    min_angles = _min_angles_deg(coords, mesh.faces)
    narrow_frac = float((min_angles < cfg.narrow_angle_deg).mean())
    add("narrow_face_fraction", narrow_frac, f"<= {cfg.narrow_face_frac_max}",
        narrow_frac <= cfg.narrow_face_frac_max)

    n_components, pruned = _component_count_after_pruning(prepared, cfg)
    add("component_count", n_components, f"<= {cfg.components_max} (pruned {pruned})",
        n_components <= cfg.components_max)

    boundary = len(prepared.structure.boundary_half_edges())
    add("boundary_half_edges", boundary, f"<= {cfg.boundary_len_max}", boundary <= cfg.boundary_len_max)

    vocab = ControlVocab.default(cfg.bins)
    stats = compression_stats(tokenize(prepared.structure, vocab))
    add("bfs_displacement", stats.max_delta, f"< {cfg.bfs_displacement_max}",
        stats.max_delta < cfg.bfs_displacement_max)
    add("bfs_displacement_span", stats.max_displacement, "reported", True)

    drop = prepared.sanitize_stats.vertex_drop_ratio
    add("vertex_merge_drop_ratio", drop, f"<= {cfg.merge_vertex_drop_max}",
        drop <= cfg.merge_vertex_drop_max)

    bad_frac = _new_bad_face_fraction(raw, prepared, cfg)
    add("new_bad_face_fraction", bad_frac, f"<= {cfg.bad_face_frac_max}",
        bad_frac <= cfg.bad_face_frac_max)

    report.elapsed_seconds = time.perf_counter() - started
    return report


# ---------------------------------------------------------------------------
# evaluation metrics
# ---------------------------------------------------------------------------

def sample_surface(mesh: RawMesh, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Area-weighted uniform surface samples with unit face normals.

    Barycentric corners are put in a canonical coordinate order before the
    point is formed, so a mesh and its winding-flipped copy yield identical
    sample points (with normals negated).
    """
    v = mesh.vertices
    f = mesh.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    cross = np.cross(b - a, c - a)
    area2 = np.linalg.norm(cross, axis=1)
    total = area2.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateGeometry("mesh has zero total surface area")
    choice = rng.choice(len(f), size=n, p=area2 / total)
    tri = v[f[choice]]  # (n, 3, 3)
    order = np.lexsort((tri[:, :, 2], tri[:, :, 1], tri[:, :, 0]), axis=1)
    tri_sorted = np.take_along_axis(tri, order[:, :, None], axis=1)
    r1 = rng.random(n)
    r2 = rng.random(n)
    u = np.sqrt(r1)
    pts = (
        tri_sorted[:, 0] * (1.0 - u)[:, None]
        + tri_sorted[:, 1] * (u * (1.0 - r2))[:, None]
        + tri_sorted[:, 2] * (u * r2)[:, None]
    )
    normals = cross[choice]
    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    return pts, normals / norms


def _exact_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # sqrt(da * db) reproduces |a||b| exactly for bitwise-equal or negated
    # vectors, keeping self-comparison at exactly +-1
    dot = np.einsum("ij,ij->i", a, b)
    da = np.einsum("ij,ij->i", a, a)
    db = np.einsum("ij,ij->i", b, b)
    return np.clip(dot / np.sqrt(da * db), -1.0, 1.0)


def evaluate(
    pred: RawMesh,
    gt: RawMesh,
    samples: int = 1024,
    seed: int = 0,
    squared_chamfer: bool = True,
) -> dict:
    """Chamfer distance (x1000), Hausdorff distance, and normal consistency
    between two surface-sampled meshes."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p_pts, p_nrm = sample_surface(pred, samples, np.random.default_rng(seed))
    g_pts, g_nrm = sample_surface(gt, samples, np.random.default_rng(seed))
    d_pg, i_pg = cKDTree(g_pts).query(p_pts)
    d_gp, i_gp = cKDTree(p_pts).query(g_pts)
    if squared_chamfer:
        cd = (np.mean(d_pg ** 2) + np.mean(d_gp ** 2)) / 2.0
    else:
        cd = (np.mean(d_pg) + np.mean(d_gp)) / 2.0
    hd = max(float(d_pg.max()), float(d_gp.max()))
    nc = float(np.concatenate([
        _exact_cosines(p_nrm, g_nrm[i_pg]),
        _exact_cosines(g_nrm, p_nrm[i_gp]),
    ]).mean())
    return {"CD": float(cd * 1e3), "HD": hd, "NC": nc}
