"""Binary token container (RIPL), its JSON-lines mirror, and the mask
sidecar format.

RIPL layout, little-endian throughout:

    u32   magic 0x5249504C
    u16   version = 1
    u16   bins
    u16   control count, then per entry: u16 id, u16 label length, UTF-8 label
          (BOS, EOS, PAD first, then separators in id order)
    u32   face count
    u32   token count
    u16[] tokens
    u32[] root ordinals (seeds hold their own ordinal)
    i32[] deltas (-1 = seed)

Mask sidecar (RIPM) carries, per window, the dense frontier mask, its row
supports, NSCA block validity rows, and selected-block lists.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoError
from .tokenizer import ControlVocab, TokenSequence

RIPL_MAGIC = 0x5249504C
RIPM_MAGIC = 0x5249504D
_RESERVED_LABELS = ("BOS", "EOS", "PAD")


def _control_table(vocab: ControlVocab) -> list[tuple[int, str]]:
    table = [(vocab.bos, "BOS"), (vocab.eos, "EOS"), (vocab.pad, "PAD")]
    table.extend(sorted(vocab.separators))
    return table


def dump_ripl(seq: TokenSequence) -> bytes:
    out = bytearray()
    out += struct.pack("<IHH", RIPL_MAGIC, 1, seq.vocab.bins)
    table = _control_table(seq.vocab)
    out += struct.pack("<H", len(table))
    for token_id, label in table:
        raw = label.encode("utf-8")
        out += struct.pack("<HH", token_id, len(raw))
        out += raw
    out += struct.pack("<II", seq.face_count, seq.token_count)
    out += seq.tokens.astype("<u2").tobytes()
    out += seq.roots.astype("<u4").tobytes()
    out += seq.deltas.astype("<i4").tobytes()
    return bytes(out)


def write_ripl(seq: TokenSequence, path: str | Path) -> None:
    Path(path).write_bytes(dump_ripl(seq))


def _face_of_token(tokens: np.ndarray, bins: int) -> np.ndarray:
    fot = np.full(len(tokens), -1, dtype=np.int64)
    coord = tokens < bins
    idx = np.flatnonzero(coord)
    fot[idx] = np.arange(len(idx)) // 9
    return fot


def load_ripl(data: bytes) -> TokenSequence:
    try:
        magic, version, bins = struct.unpack_from("<IHH", data, 0)
        if magic != RIPL_MAGIC:
            raise IoError(f"bad magic 0x{magic:08X}")
        if version != 1:
            raise IoError(f"unsupported version {version}")
        off = 8
        (count,) = struct.unpack_from("<H", data, off)
        off += 2
        table: list[tuple[int, str]] = []
        for _ in range(count):
            token_id, lab_len = struct.unpack_from("<HH", data, off)
            off += 4
            label = data[off:off + lab_len].decode("utf-8")
            off += lab_len
            table.append((token_id, label))
        named = dict((label, token_id) for token_id, label in table)
        separators = tuple((i, lab) for i, lab in table if lab not in _RESERVED_LABELS)
        vocab = ControlVocab(
            bins=bins, bos=named["BOS"], eos=named["EOS"], pad=named["PAD"],
            separators=separators,
        )
        face_count, token_count = struct.unpack_from("<II", data, off)
        off += 8
        tokens = np.frombuffer(data, dtype="<u2", count=token_count, offset=off).astype(np.int32)
        off += 2 * token_count
        roots = np.frombuffer(data, dtype="<u4", count=face_count, offset=off).astype(np.int64)
        off += 4 * face_count
        deltas = np.frombuffer(data, dtype="<i4", count=face_count, offset=off).astype(np.int64)
    except (struct.error, KeyError, UnicodeDecodeError) as exc:
        raise IoError(f"malformed RIPL container: {exc}") from exc
    fot = _face_of_token(tokens, bins)
    seps = tokens[np.isin(tokens, [i for i, _ in separators])] if separators else np.zeros(0, np.int32)
    return TokenSequence(
        tokens=tokens,
        face_of_token=fot,
        roots=roots,
        deltas=deltas,
        vocab=vocab,
        component_separators=seps.astype(np.int64),
    )


def read_ripl(path: str | Path) -> TokenSequence:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return load_ripl(data)


def write_jsonl(seq: TokenSequence, path: str | Path) -> None:
    """Debug mirror: one header line, then one line per face."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "type": "header",
            "bins": seq.vocab.bins,
            "controls": [{"id": i, "label": lab} for i, lab in _control_table(seq.vocab)],
            "faces": seq.face_count,
            "tokens": seq.token_count,
        }
        fh.write(json.dumps(header) + "\n")
        fot = seq.face_of_token
        tokens = seq.tokens
        sep_before: dict[int, int] = {}
        for p in np.flatnonzero(fot < 0):
            t = int(tokens[p])
            if seq.vocab.is_separator(t) and p + 1 < len(tokens):
                nxt = fot[p + 1]
                if nxt >= 0:
                    sep_before[int(nxt)] = t
        triples = seq.face_triples()
        for i in range(seq.face_count):
            rec = {
                "type": "face",
                "i": i,
                "root": int(seq.roots[i]),
                "delta": int(seq.deltas[i]),
                "head": int(seq.heads[i]),
                "vertices": triples[i].tolist(),
            }
            if i in sep_before:
                rec["separator"] = sep_before[i]
            fh.write(json.dumps(rec) + "\n")


@dataclass
class MaskSidecar:
    """Per-window mask bundle as written next to a RIPL file."""

    window_start: int
    window_len: int
    clipped: int
    dense: np.ndarray              # (L, L) int8, 0 attendable / -1 masked
    supports: list[np.ndarray]     # per row, window-relative finite columns
    block_masks: np.ndarray        # (L, n_blocks) int8
    selected: list[np.ndarray]     # per step, chosen block ids (u32)


def dump_mask_sidecar(sc: MaskSidecar) -> bytes:
    out = bytearray()
    n_blocks = sc.block_masks.shape[1] if sc.block_masks.size else 0
    out += struct.pack("<IHIIII", RIPM_MAGIC, 1, sc.window_start, sc.window_len,
                       sc.clipped, n_blocks)
    out += sc.dense.astype("<i1").tobytes()
    for row in sc.supports:
        out += struct.pack("<I", len(row))
        out += np.asarray(row, dtype="<u4").tobytes()
    out += sc.block_masks.astype("<i1").tobytes()
    for ids in sc.selected:
        out += struct.pack("<I", len(ids))
        out += np.asarray(ids, dtype="<u4").tobytes()
    return bytes(out)


def load_mask_sidecar(data: bytes) -> MaskSidecar:
    try:
        magic, version, w0, length, clipped, n_blocks = struct.unpack_from("<IHIIII", data, 0)
        if magic != RIPM_MAGIC or version != 1:
            raise IoError("not a mask sidecar")
        off = 22
        dense = np.frombuffer(data, dtype="<i1", count=length * length, offset=off)
        dense = dense.reshape(length, length).copy()
        off += length * length
        supports = []
        for _ in range(length):
            (c,) = struct.unpack_from("<I", data, off)
            off += 4
            supports.append(np.frombuffer(data, dtype="<u4", count=c, offset=off).astype(np.int64))
            off += 4 * c
        blocks = np.frombuffer(data, dtype="<i1", count=length * n_blocks, offset=off)
        blocks = blocks.reshape(length, n_blocks).copy()
        off += length * n_blocks
        selected = []
        for _ in range(length):
            (c,) = struct.unpack_from("<I", data, off)
            off += 4
            selected.append(np.frombuffer(data, dtype="<u4", count=c, offset=off).astype(np.int64))
            off += 4 * c
    except struct.error as exc:
        raise IoError(f"malformed mask sidecar: {exc}") from exc
    return MaskSidecar(w0, length, clipped, dense, supports, blocks, selected)


def write_mask_sidecar(sc: MaskSidecar, path: str | Path) -> None:
    Path(path).write_bytes(dump_mask_sidecar(sc))


def read_mask_sidecar(path: str | Path) -> MaskSidecar:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return load_mask_sidecar(data)
