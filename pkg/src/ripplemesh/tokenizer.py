"""Frontier-aware BFS serialization of prepared meshes and its inverse.

A mesh is emitted face by face in breadth-first order over the half-edge
structure. A FIFO frontier queue drives the traversal: the face at the
queue front is the current root, newly discovered neighbors are appended
to both the output sequence and the queue, and the root pointer only ever
moves forward. For every emitted face we record

  * root:  emission ordinal of the face it was grown from (seeds point to
           themselves),
  * delta: how far the root pointer advanced since the previous emission
           (SEED sentinel for component seeds),
  * head:  ordinal at the queue front, which always equals the root.

Because ordinals enter the queue consecutively and leave in order, the
queue contents at any emission form the contiguous interval
[head, ordinal-1]; that interval is the frontier snapshot used by mask
construction and by the decoding constraints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingSeparator, TruncatedFace, UnknownToken
from .mesh import HalfEdgeStructure, NormalizationTransform, QuantizedMesh

SEED_DELTA = -1
PAD_ROOT = -1
PAD_DELTA = -2


@dataclass(frozen=True)
class ControlVocab:
    """Token id layout: coordinate ids 0..bins-1, control ids above.

    ``separators`` maps component-separator ids to labels. The default
    vocabulary has the single separator N; semantic vocabularies replace it
    with one id per category label.
    """

    bins: int
    bos: int
    eos: int
    pad: int
    separators: tuple[tuple[int, str], ...]

    def __post_init__(self):
        ids = [self.bos, self.eos, self.pad] + [i for i, _ in self.separators]
        if len(set(ids)) != len(ids):
            raise ValueError("control token ids must be pairwise distinct")
        if min(ids) < self.bins:
            raise ValueError("control token ids must be >= bins")
        if not self.separators:
            raise ValueError("at least one component separator is required")

    @classmethod
    def default(cls, bins: int = 256, separator_labels: tuple[str, ...] = ("N",)) -> "ControlVocab":
        seps = tuple((bins + 3 + k, label) for k, label in enumerate(separator_labels))
        return cls(bins=bins, bos=bins, eos=bins + 1, pad=bins + 2, separators=seps)

    @property
    def size(self) -> int:
        return max([self.bos, self.eos, self.pad] + [i for i, _ in self.separators]) + 1

    @property
    def separator_ids(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.separators)

    def is_separator(self, token: int) -> bool:
        return token in self.separator_ids

    def label_for(self, token: int) -> str:
        for i, label in self.separators:
            if i == token:
                return label
        raise KeyError(f"token {token} is not a separator")

    def separator_for(self, label: str) -> int:
        for i, lab in self.separators:
            if lab == label:
                return i
        raise KeyError(f"no separator labeled {label!r}")


@dataclass
class TokenSequence:
    """Flat token stream plus per-face root registration.

    ``roots[i]`` is the emission ordinal of face i's root; seeds carry
    their own ordinal, so ``roots[i] == i`` identifies seeds and
    ``roots[i] < i`` holds everywhere else. ``deltas[i]`` is the root
    advance recorded with face i (SEED_DELTA for seeds).
    """

    tokens: np.ndarray          # (T,) int32 token ids
    face_of_token: np.ndarray   # (T,) int64, -1 on control tokens
    roots: np.ndarray           # (F,) int64
    deltas: np.ndarray          # (F,) int64
    vocab: ControlVocab
    component_separators: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def face_count(self) -> int:
        return len(self.roots)

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    @property
    def control_token_count(self) -> int:
        return int((self.face_of_token < 0).sum())

    @property
    def heads(self) -> np.ndarray:
        """Queue-front ordinal per face; the root is always the front."""
        return self.roots

    def is_seed(self, i: int) -> bool:
        return int(self.roots[i]) == i

    def frontier_interval(self, i: int) -> tuple[int, int]:
        """Half-open ordinal interval [head, i) of the queue when face i
        was emitted; empty for seeds."""
        return int(self.roots[i]), i

    def face_tokens(self, i: int) -> np.ndarray:
        return self.tokens[self.face_of_token == i]

    def face_triples(self) -> np.ndarray:
        """(F, 3, 3) integer vertex coordinates in emission order."""
        coords = self.tokens[self.face_of_token >= 0]
        return coords.reshape(self.face_count, 3, 3)


def _seed_start_half_edge(structure: HalfEdgeStructure, face: int, keys: np.ndarray) -> int:
    """Half-edge of ``face`` whose origin has the smallest z-y-x key."""
    h0 = 3 * face
    o = structure.origins
    best = h0
    best_key = keys[o[h0]]
    for h in (h0 + 1, h0 + 2):
        k = keys[o[h]]
        if k < best_key:
            best, best_key = h, k
    return best


def tokenize(
    structure: HalfEdgeStructure,
    vocab: ControlVocab,
    component_labels: list[str] | None = None,
) -> TokenSequence:
    """Serialize a prepared mesh into the ripple token sequence.

    Components are visited in lexicographic seed order, each opened by a
    separator token. Within a component the frontier queue holds entering
    half-edges; expanding half-edge h visits the twins of prev(h), next(h)
    and h itself, in stored twin order, so non-manifold fan-outs are fully
    deterministic. Each discovered face is emitted starting at its entering
    half-edge's origin; seed faces start at their smallest-key origin.
    """
    mesh = structure.mesh
    n_faces = structure.face_count
    if vocab.bins != mesh.bins:
        raise ValueError("vocabulary bins do not match mesh bins")

    origins = structure.origins.tolist()
    twins = structure.twins
    verts = mesh.vertices.tolist()
    keys = mesh.vertex_keys()

    tokens: list[int] = [vocab.bos]
    face_of: list[int] = [-1]
    roots = np.empty(n_faces, dtype=np.int64)
    deltas = np.empty(n_faces, dtype=np.int64)
    visited = np.zeros(n_faces, dtype=bool)
    ordinal_of_face = np.empty(n_faces, dtype=np.int64)
    used_separators: list[int] = []

    def emit(face: int, start_he: int, ordinal: int) -> None:
        base = 3 * face
        tokens.extend(verts[origins[start_he]])
        tokens.extend(verts[origins[base + (start_he + 1 - base) % 3]])
        tokens.extend(verts[origins[base + (start_he + 2 - base) % 3]])
        face_of.extend((ordinal,) * 9)

    next_ordinal = 0
    component = 0
    for seed in range(n_faces):
        if visited[seed]:
            continue
        if component_labels is not None:
            sep = vocab.separator_for(component_labels[component])
        else:
            sep = vocab.separator_ids[0]
        used_separators.append(sep)
        tokens.append(sep)
        face_of.append(-1)

        start = _seed_start_half_edge(structure, seed, keys)
        visited[seed] = True
        ordinal = next_ordinal
        next_ordinal += 1
        ordinal_of_face[seed] = ordinal
        roots[ordinal] = ordinal
        deltas[ordinal] = SEED_DELTA
        emit(seed, start, ordinal)

        last_root = ordinal
        queue = deque([start])
        while queue:
            h = queue.popleft()
            base = h - h % 3
            root_ord = int(ordinal_of_face[base // 3])
            prev_h = base + (h + 2 - base) % 3
            next_h = base + (h + 1 - base) % 3
            for t in twins[prev_h] + twins[next_h] + twins[h]:
                g = t // 3
                if visited[g]:
                    continue
                visited[g] = True
                ordinal = next_ordinal
                next_ordinal += 1
                ordinal_of_face[g] = ordinal
                roots[ordinal] = root_ord
                deltas[ordinal] = root_ord - last_root
                last_root = root_ord
                emit(g, t, ordinal)
                queue.append(t)
        component += 1

    tokens.append(vocab.eos)
    face_of.append(-1)
    return TokenSequence(
        tokens=np.asarray(tokens, dtype=np.int32),
        face_of_token=np.asarray(face_of, dtype=np.int64),
        roots=roots,
        deltas=deltas,
        vocab=vocab,
        component_separators=np.asarray(used_separators, dtype=np.int64),
    )


@dataclass
class DetokenizeResult:
    mesh: QuantizedMesh
    component_labels: list[str]
    component_of_face: np.ndarray


def rebuild_mesh(
    face_triples: list[tuple[tuple[int, int, int], ...]],
    bins: int,
) -> tuple[QuantizedMesh, np.ndarray]:
    """Build a quantized mesh from per-face coordinate triples, merging
    identical vertex triples into shared indices (first occurrence wins).
    Returns the mesh and the face array before any reordering."""
    index_of: dict[tuple[int, int, int], int] = {}
    verts: list[tuple[int, int, int]] = []
    faces = np.empty((len(face_triples), 3), dtype=np.int64)
    for fi, tri in enumerate(face_triples):
        for k, triple in enumerate(tri):
            idx = index_of.get(triple)
            if idx is None:
                idx = len(verts)
                index_of[triple] = idx
                verts.append(triple)
            faces[fi, k] = idx
    mesh = QuantizedMesh(
        bins=bins,
        vertices=np.asarray(verts, dtype=np.int32).reshape(-1, 3),
        faces=faces,
        transform=NormalizationTransform.identity(),
    )
    return mesh, faces


def detokenize(seq_tokens: np.ndarray | list[int], vocab: ControlVocab) -> DetokenizeResult:
    """Reconstruct the quantized mesh encoded by a token stream.

    Coordinate runs between control tokens must hold whole faces (9 tokens
    each). The stream must open with BOS followed by a separator; EOS or
    end-of-stream terminates parsing; PAD after the last face is ignored.
    """
    tokens = np.asarray(seq_tokens, dtype=np.int64).ravel()
    if tokens.size and (tokens.min() < 0 or tokens.max() >= vocab.size):
        bad = tokens[(tokens < 0) | (tokens >= vocab.size)][0]
        raise UnknownToken(f"token id {int(bad)} outside vocabulary of size {vocab.size}")

    pos = 0
    if pos < len(tokens) and tokens[pos] == vocab.bos:
        pos += 1
    faces: list[tuple[tuple[int, int, int], ...]] = []
    component_of_face: list[int] = []
    labels: list[str] = []
    current_component = -1
    pending: list[int] = []

    def flush_pending(where: int):
        if len(pending) % 9 != 0:
            raise TruncatedFace(f"coordinate run of {len(pending)} tokens ending at {where}")
        for k in range(0, len(pending), 9):
            chunk = pending[k:k + 9]
            faces.append((tuple(chunk[0:3]), tuple(chunk[3:6]), tuple(chunk[6:9])))
            component_of_face.append(current_component)
        pending.clear()

    while pos < len(tokens):
        t = int(tokens[pos])
        if t < vocab.bins:
            if current_component < 0:
                raise MissingSeparator(f"coordinate token at position {pos} before any separator")
            pending.append(t)
        elif vocab.is_separator(t):
            flush_pending(pos)
            current_component += 1
            labels.append(vocab.label_for(t))
        elif t == vocab.eos:
            flush_pending(pos)
            break
        elif t == vocab.bos:
            raise MissingSeparator(f"unexpected BOS at position {pos}")
        elif t == vocab.pad:
            if pending:
                raise TruncatedFace(f"padding interrupts a face at position {pos}")
        pos += 1
    else:
        flush_pending(len(tokens))

    mesh, _ = rebuild_mesh(faces, vocab.bins)
    return DetokenizeResult(
        mesh=mesh,
        component_labels=labels,
        component_of_face=np.asarray(component_of_face, dtype=np.int64),
    )


@dataclass
class Window:
    """Fixed-size slice of a token sequence, window_faces face slots wide.

    Token content is the exact stream slice covering the window's faces,
    with leading control tokens attached to their following face and EOS to
    the final face; missing face slots in the last window are padded with
    9 PAD tokens each. Metadata arrays are absolute emission ordinals so
    frontier intervals remain resolvable across windows.
    """

    index: int
    face_start: int
    face_count: int
    window_faces: int
    tokens: np.ndarray
    face_of_token: np.ndarray   # absolute ordinals, -1 on control/pad
    roots: np.ndarray           # (window_faces,) absolute; PAD_ROOT on padding
    deltas: np.ndarray          # (window_faces,) PAD_DELTA on padding
    heads: np.ndarray


def window(seq: TokenSequence, window_faces: int, vocab: ControlVocab | None = None) -> list[Window]:
    """Partition a sequence into fixed-size face windows; the final window
    is padded, and no all-padding window is ever produced."""
    if window_faces < 1:
        raise ValueError("window_faces must be >= 1")
    vocab = vocab or seq.vocab
    n = seq.face_count
    if n == 0:
        return []

    # token group boundaries: group i covers face i plus any control tokens
    # immediately before it; trailing controls join the final group
    fot = seq.face_of_token
    face_positions = np.flatnonzero(fot >= 0)
    first_tok = face_positions[::9]  # coordinate runs are contiguous 9-token groups
    ends = first_tok + 9
    ends[-1] = seq.token_count  # trailing EOS joins the last face
    starts = np.empty(n, dtype=np.int64)
    starts[0] = 0
    starts[1:] = ends[:-1]

    windows: list[Window] = []
    for wi, face_start in enumerate(range(0, n, window_faces)):
        face_end = min(face_start + window_faces, n)
        count = face_end - face_start
        tok = list(seq.tokens[starts[face_start]:ends[face_end - 1]])
        fo = list(fot[starts[face_start]:ends[face_end - 1]])
        pad_slots = window_faces - count
        tok.extend([vocab.pad] * (9 * pad_slots))
        fo.extend([-1] * (9 * pad_slots))
        roots = np.full(window_faces, PAD_ROOT, dtype=np.int64)
        deltas = np.full(window_faces, PAD_DELTA, dtype=np.int64)
        roots[:count] = seq.roots[face_start:face_end]
        deltas[:count] = seq.deltas[face_start:face_end]
        windows.append(Window(
            index=wi,
            face_start=face_start,
            face_count=count,
            window_faces=window_faces,
            tokens=np.asarray(tok, dtype=np.int32),
            face_of_token=np.asarray(fo, dtype=np.int64),
            roots=roots,
            deltas=deltas,
            heads=roots.copy(),
        ))
    return windows


@dataclass
class CompressionStats:
    faces: int
    tokens: int
    control_tokens: int
    components: int
    tokens_per_face: float
    max_delta: int
    max_displacement: int
    frontier_histogram: np.ndarray  # counts indexed by queue length at emission

    def as_dict(self) -> dict:
        return {
            "faces": self.faces,
            "tokens": self.tokens,
            "control_tokens": self.control_tokens,
            "components": self.components,
            "tokens_per_face": self.tokens_per_face,
            "max_delta": self.max_delta,
            "max_displacement": self.max_displacement,
            "frontier_histogram": self.frontier_histogram.tolist(),
        }


def compression_stats(seq: TokenSequence) -> CompressionStats:
    """Sequence-level statistics: token rate, root offsets, frontier sizes.

    Two displacement readings are reported: max_delta is the largest root
    advance, max_displacement the largest ordinal gap i - root(i)."""
    n = seq.face_count
    seeds = seq.roots == np.arange(n)
    non_seed = ~seeds
    max_delta = int(seq.deltas[non_seed].max()) if non_seed.any() else 0
    disp = np.arange(n) - seq.roots
    max_disp = int(disp.max()) if n else 0
    queue_lengths = disp  # |B_i| = i - head_i
    hist = np.bincount(queue_lengths) if n else np.zeros(1, np.int64)
    return CompressionStats(
        faces=n,
        tokens=seq.token_count,
        control_tokens=seq.control_token_count,
        components=int(seeds.sum()),
        tokens_per_face=seq.token_count / n if n else 0.0,
        max_delta=max_delta,
        max_displacement=max_disp,
        frontier_histogram=hist,
    )
