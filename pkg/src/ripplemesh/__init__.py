"""Topology-aligned triangle-mesh serialization toolkit.

Meshes are prepared (quantized, sanitized, wound consistently, canonically
ordered), serialized by a frontier-aware breadth-first traversal with root
registration, and reconstructed from token streams. On top of the token
layer sit frontier/sparse attention-mask construction, a constrained
decoding state machine, dataset curation filters, and surface metrics.
"""

__version__ = "0.1.0"

from .analysis import FilterConfig, FilterReport, evaluate, filter_mesh
from .decode import DecodeState, Proposal, RandomValidProposer, ReplayProposer, run
from .errors import (
    ConstraintViolation, DegenerateGeometry, EmptyAfterSanitize, EmptyInput,
    IoError, MissingSeparator, RippleError, RootOutOfRange, SequenceClosed,
    ShapeError, TruncatedFace, UnknownToken,
)
from .masks import (
    FrontierMask, NscaLayout, face_embeddings, frontier_mask, nsca_plan,
    nsca_reference, reference_attention,
)
from .mesh import (
    HalfEdgeStructure, PreparedMesh, QuantizedMesh, RawMesh, build_half_edges,
    canonical_sort, normalize_and_quantize, orient_faces, prepare, sanitize,
)
from .meshio import read_mesh, read_obj, read_ply, write_obj
from .riplio import dump_ripl, load_ripl, read_ripl, write_jsonl, write_ripl
from .tokenizer import (
    ControlVocab, SEED_DELTA, TokenSequence, compression_stats, detokenize,
    tokenize, window,
)

__all__ = [
    "ControlVocab", "ConstraintViolation", "DecodeState", "DegenerateGeometry",
    "EmptyAfterSanitize", "EmptyInput", "FilterConfig", "FilterReport",
    "FrontierMask", "HalfEdgeStructure", "IoError", "MissingSeparator",
    "NscaLayout", "PreparedMesh", "Proposal", "QuantizedMesh",
    "RandomValidProposer", "RawMesh", "ReplayProposer", "RippleError",
    "RootOutOfRange", "SEED_DELTA", "SequenceClosed", "ShapeError",
    "TokenSequence", "TruncatedFace", "UnknownToken", "build_half_edges",
    "canonical_sort", "compression_stats", "detokenize", "dump_ripl",
    "evaluate", "face_embeddings", "filter_mesh", "frontier_mask",
    "load_ripl", "normalize_and_quantize", "nsca_plan", "nsca_reference",
    "orient_faces", "prepare", "read_mesh", "read_obj", "read_ply",
    "read_ripl", "reference_attention", "run", "sanitize", "tokenize",
    "window", "write_jsonl", "write_obj", "write_ripl",
]
