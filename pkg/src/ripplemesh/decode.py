"""Inference-time state machine mirroring the tokenizer's frontier rules.

The harness maintains the dynamic FIFO frontier queue, the current root,
and the set of attachment edges still open on each emitted face. Proposals
come from a pluggable proposer: ground-truth replay for verification, or a
random valid policy for exercising the constraints. A face is accepted
only when its attachment edge (first emitted edge v0 -> v1) is the reverse
of one of the root's edges; a separator lifts the constraint for the next
face and clears the queue; root advances pop everything before the new
front.

Acceptance deliberately does not close an edge after one use: at a
non-manifold edge several faces legitimately grow from the same root edge.
Edge bookkeeping still tracks coverage so policy proposers can target
genuinely open boundary.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import ConstraintViolation, RootOutOfRange, SequenceClosed
from .mesh import QuantizedMesh
from .tokenizer import ControlVocab, SEED_DELTA, TokenSequence, rebuild_mesh

Triple = tuple[int, int, int]
FaceVerts = tuple[Triple, Triple, Triple]


@dataclass(frozen=True)
class Proposal:
    """One decoding step: a separator, a face (with a root advance), or EOS."""

    kind: str  # "separator" | "face" | "eos"
    separator: int = -1
    face: FaceVerts | None = None
    delta: int = 0


@dataclass
class TraceEvent:
    step: int
    action: str
    root: int
    delta: int
    queue_len: int
    accepted: bool

    def to_json(self) -> str:
        return json.dumps({
            "step": self.step, "action": self.action, "root": self.root,
            "delta": self.delta, "queue_len": self.queue_len, "accepted": self.accepted,
        })


class DecodeState:
    """Frontier bookkeeping for one constrained decode."""

    def __init__(self, vocab: ControlVocab, attach_mode: str = "first-edge"):
        if attach_mode not in ("first-edge", "any-edge"):
            raise ValueError(f"unknown attach mode {attach_mode!r}")
        self.vocab = vocab
        self.attach_mode = attach_mode
        self.faces: list[FaceVerts] = []
        self.queue: deque[int] = deque()
        self.root: int | None = None
        self.constraint_lifted = False
        self.closed = False
        self.covered: dict[tuple[Triple, Triple], int] = {}
        self.component_of_face: list[int] = []
        self.component_separators: list[int] = []
        self.trace: list[TraceEvent] = []
        self._seen: set[FaceVerts] = set()

    @property
    def emitted(self) -> int:
        return len(self.faces)

    def frontier_interval(self) -> tuple[int, int]:
        """Current queue as the ordinal interval [front, back]; (-1, -1) when empty."""
        if not self.queue:
            return -1, -1
        return self.queue[0], self.queue[-1]

    @staticmethod
    def edges_of(face: FaceVerts) -> tuple[tuple[Triple, Triple], ...]:
        a, b, c = face
        return ((a, b), (b, c), (c, a))

    def open_edges(self, ordinal: int) -> list[tuple[Triple, Triple]]:
        """Edges of an emitted face whose reverse is not covered yet."""
        return [
            (a, b) for a, b in self.edges_of(self.faces[ordinal])
            if self.covered.get((b, a), 0) == 0
        ]

    def _canonical(self, face: FaceVerts) -> FaceVerts:
        rolls = (face, (face[1], face[2], face[0]), (face[2], face[0], face[1]))
        return min(rolls)

    def advance_root(self, delta: int) -> None:
        """Move the root pointer forward along the queue, popping passed faces."""
        if self.closed:
            raise SequenceClosed("root advance after EOS")
        if delta < 0:
            raise RootOutOfRange(f"negative root advance {delta}")
        if delta == 0:
            return
        if self.root is None or delta > len(self.queue) - 1:
            raise RootOutOfRange(
                f"advance by {delta} exceeds queue of length {len(self.queue)}"
            )
        target = self.root + delta
        while self.queue and self.queue[0] < target:
            self.queue.popleft()
        self.root = target

    def step_separator(self, separator: int) -> None:
        if self.closed:
            raise SequenceClosed("separator after EOS")
        self.queue.clear()
        self.root = None
        self.constraint_lifted = True
        self.component_separators.append(separator)
        self.trace.append(TraceEvent(self.emitted, "separator", -1, 0, 0, True))

    def step_face(self, face: FaceVerts) -> int:
        """Validate and append a face; returns its emission ordinal."""
        if self.closed:
            raise SequenceClosed("face after EOS")
        face = (tuple(face[0]), tuple(face[1]), tuple(face[2]))
        if len({face[0], face[1], face[2]}) != 3:
            raise ConstraintViolation(self.emitted, self.root if self.root is not None else -1,
                                      (face[0], face[1]), "degenerate face proposal")
        canon = self._canonical(face)
        if canon in self._seen:
            raise ConstraintViolation(self.emitted, self.root if self.root is not None else -1,
                                      (face[0], face[1]), "duplicate face proposal")

        if self.constraint_lifted:
            self.constraint_lifted = False
        else:
            if self.root is None:
                raise ConstraintViolation(self.emitted, -1, (face[0], face[1]),
                                          "no active root and no separator seen")
            root_edges = self.edges_of(self.faces[self.root])
            if self.attach_mode == "first-edge":
                candidates = (self.edges_of(face)[0],)
            else:
                candidates = self.edges_of(face)
            if not any((b, a) in root_edges for a, b in candidates):
                raise ConstraintViolation(self.emitted, self.root, self.edges_of(face)[0])

        ordinal = self.emitted
        self.faces.append(face)
        self._seen.add(canon)
        self.component_of_face.append(len(self.component_separators) - 1)
        for e in self.edges_of(face):
            self.covered[e] = self.covered.get(e, 0) + 1
        self.queue.append(ordinal)
        if self.root is None:
            self.root = ordinal
        self.trace.append(TraceEvent(ordinal, "face",
                                     self.root, 0, len(self.queue), True))
        return ordinal

    def step_eos(self) -> None:
        if self.closed:
            raise SequenceClosed("duplicate EOS")
        self.closed = True
        self.trace.append(TraceEvent(self.emitted, "eos", -1, 0, len(self.queue), True))


class FaceProposer(Protocol):
    def next_candidate(self, state: DecodeState) -> Proposal: ...


class ReplayProposer:
    """Feeds a tokenizer stream back through the harness verbatim."""

    def __init__(self, seq: TokenSequence):
        self.triples = seq.face_triples()
        self.deltas = seq.deltas
        self.separators = seq.component_separators.tolist()
        self._face = 0
        self._component = 0

    def next_candidate(self, state: DecodeState) -> Proposal:
        i = self._face
        if i >= len(self.triples):
            return Proposal("eos")
        delta = int(self.deltas[i])
        if delta == SEED_DELTA:
            if not state.constraint_lifted:
                sep = self.separators[self._component]
                self._component += 1
                return Proposal("separator", separator=sep)
            self._face += 1
            tri = self.triples[i]
            return Proposal("face", face=(tuple(tri[0]), tuple(tri[1]), tuple(tri[2])), delta=0)
        self._face += 1
        tri = self.triples[i]
        return Proposal("face", face=(tuple(tri[0]), tuple(tri[1]), tuple(tri[2])), delta=delta)


class RandomValidProposer:
    """Grows random faces that always satisfy the attachment constraint.

    Root advances skip fully expanded queue entries, mirroring the
    tokenizer's silent skip of exhausted faces; when the whole frontier is
    exhausted the proposer opens a new component or stops.
    """

    def __init__(self, vocab: ControlVocab, target_faces: int, seed: int = 0,
                 components: int = 1):
        self.vocab = vocab
        self.target = target_faces
        self.rng = np.random.default_rng(seed)
        self.components_left = components

    def _random_triple(self, state: DecodeState) -> Triple:
        while True:
            t = tuple(int(x) for x in self.rng.integers(0, self.vocab.bins, 3))
            if t not in {v for f in state.faces[-4:] for v in f}:
                return t

    def next_candidate(self, state: DecodeState) -> Proposal:
        if state.emitted >= self.target:
            return Proposal("eos")
        if state.constraint_lifted:
            a = self._random_triple(state)
            b = self._random_triple(state)
            while b == a:
                b = self._random_triple(state)
            c = self._random_triple(state)
            while c == a or c == b:
                c = self._random_triple(state)
            return Proposal("face", face=(a, b, c), delta=0)
        if state.root is None:
            if self.components_left > 0:
                self.components_left -= 1
                return Proposal("separator", separator=self.vocab.separator_ids[0])
            return Proposal("eos")

        # hunt forward for a queue entry that still has open edges
        delta = 0
        queue = list(state.queue)
        root_pos = queue.index(state.root)
        for k in range(root_pos, len(queue)):
            if state.open_edges(queue[k]):
                delta = queue[k] - state.root
                break
        else:
            if self.components_left > 0:
                self.components_left -= 1
                return Proposal("separator", separator=self.vocab.separator_ids[0])
            return Proposal("eos")

        target = state.root + delta
        edges = state.open_edges(target)
        a, b = edges[int(self.rng.integers(0, len(edges)))]
        c = self._random_triple(state)
        while c == a or c == b:
            c = self._random_triple(state)
        return Proposal("face", face=(b, a, c), delta=delta)


@dataclass
class RunResult:
    mesh: QuantizedMesh
    component_labels: list[str]
    trace: list[TraceEvent]
    truncated: bool
    state: DecodeState = field(repr=False, default=None)

    def trace_jsonl(self) -> str:
        return "\n".join(ev.to_json() for ev in self.trace)


def run(
    proposer: FaceProposer,
    vocab: ControlVocab,
    max_faces: int = 20000,
    attach_mode: str = "first-edge",
) -> RunResult:
    """Drive the state machine until EOS or the face limit.

    Constraint violations propagate to the caller; the trace records every
    action taken up to that point on the state object.
    """
    state = DecodeState(vocab, attach_mode=attach_mode)
    truncated = False
    while not state.closed:
        if state.emitted >= max_faces:
            truncated = True
            break
        proposal = proposer.next_candidate(state)
        if proposal.kind == "separator":
            state.step_separator(proposal.separator)
        elif proposal.kind == "face":
            if not state.constraint_lifted and proposal.delta:
                state.advance_root(proposal.delta)
            state.step_face(proposal.face)
        elif proposal.kind == "eos":
            state.step_eos()
        else:
            raise ValueError(f"unknown proposal kind {proposal.kind!r}")
    mesh, _ = rebuild_mesh(state.faces, vocab.bins)
    labels = [vocab.label_for(s) for s in state.component_separators]
    return RunResult(mesh=mesh, component_labels=labels, trace=state.trace,
                     truncated=truncated, state=state)
