"""Batch command-line front end.

Every command streams over its inputs one mesh at a time, optionally with
a process pool (``--jobs``). Report paths write delimited output (CSV or
JSON) and render companion matplotlib figures unless ``--no-figures`` is
given. Exit codes: 0 success, 1 any per-file failure, 2 usage error.
Set RIPPLE_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import FilterConfig, evaluate, filter_mesh
from .decode import ReplayProposer, run as run_decode
from .errors import RippleError
from .masks import face_embeddings, frontier_mask, nsca_plan, nsca_reference
from .mesh import prepare
from .meshio import read_mesh, write_obj
from .procgen import corpus as build_corpus, torus
from .riplio import (
    MaskSidecar, read_ripl, write_jsonl, write_mask_sidecar, write_ripl,
)
from .tokenizer import ControlVocab, compression_stats, detokenize, tokenize, window as make_windows

log = logging.getLogger("ripplemesh")


def _load_vocab(vocab_path: str | None, bins: int) -> ControlVocab:
    if vocab_path is None:
        return ControlVocab.default(bins)
    data = json.loads(Path(vocab_path).read_text())
    labels = tuple(data.get("separators", ["N"]))
    return ControlVocab.default(int(data.get("bins", bins)), labels)


def _run_jobs(worker, items: list, jobs: int) -> list:
    """Order-preserving map; inline when jobs == 1."""
    if jobs <= 1 or len(items) <= 1:
        return [worker(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, items))


def _tokenize_worker(args: tuple) -> dict:
    path, out_dir, bins, vocab_path, fmt = args
    try:
        mesh = read_mesh(path)
        prepared = prepare(mesh, bins)
        vocab = _load_vocab(vocab_path, bins)
        seq = tokenize(prepared.structure, vocab)
        name = Path(path).stem
        if fmt == "jsonl":
            out = Path(out_dir) / f"{name}.jsonl"
            write_jsonl(seq, out)
        else:
            out = Path(out_dir) / f"{name}.ripl"
            write_ripl(seq, out)
        stats = compression_stats(seq)
        row = {"name": name, "path": str(path), "output": str(out), "ok": True}
        row.update(stats.as_dict())
        return row
    except (RippleError, OSError, ValueError) as exc:
        return {"name": Path(path).stem, "path": str(path), "ok": False,
                "error": f"{type(exc).__name__}: {exc}"}


def _roundtrip_worker(args: tuple) -> dict:
    path, bins = args
    from .riplio import dump_ripl
    try:
        mesh = read_mesh(path)
        prepared = prepare(mesh, bins)
        vocab = ControlVocab.default(bins)
        seq = tokenize(prepared.structure, vocab)
        from .mesh import build_half_edges, canonical_sort
        rebuilt = canonical_sort(detokenize(seq.tokens, vocab).mesh)
        seq2 = tokenize(build_half_edges(rebuilt), vocab)
        ok = dump_ripl(seq) == dump_ripl(seq2)
        return {"name": Path(path).stem, "ok": ok,
                "error": None if ok else "fixpoint violation"}
    except (RippleError, OSError, ValueError) as exc:
        return {"name": Path(path).stem, "ok": False, "error": f"{type(exc).__name__}: {exc}"}


def _filter_worker(args: tuple) -> dict:
    path, cfg_json = args
    cfg = FilterConfig.from_json(cfg_json) if cfg_json else FilterConfig()
    try:
        mesh = read_mesh(path)
        report = filter_mesh(mesh, cfg)
        out = report.to_dict()
        out["name"] = Path(path).stem
        out["ok"] = True
        return out
    except (RippleError, OSError, ValueError) as exc:
        return {"name": Path(path).stem, "ok": False, "verdict": False,
                "error": f"{type(exc).__name__}: {exc}", "checks": []}


def _replay_worker(args: tuple) -> dict:
    path, bins, trace_dir = args
    try:
        if str(path).endswith(".ripl"):
            seq = read_ripl(path)
            vocab = seq.vocab
        else:
            mesh = read_mesh(path)
            prepared = prepare(mesh, bins)
            vocab = ControlVocab.default(bins)
            seq = tokenize(prepared.structure, vocab)
        result = run_decode(ReplayProposer(seq), vocab, max_faces=seq.face_count + 1)
        if trace_dir:
            (Path(trace_dir) / f"{Path(path).stem}.trace.jsonl").write_text(result.trace_jsonl() + "\n")
        ok = result.mesh.face_count == seq.face_count and not result.truncated
        return {"name": Path(path).stem, "ok": ok, "faces": result.mesh.face_count,
                "violations": 0, "error": None if ok else "face count mismatch"}
    except (RippleError, OSError, ValueError) as exc:
        return {"name": Path(path).stem, "ok": False, "faces": 0, "violations": 1,
                "error": f"{type(exc).__name__}: {exc}"}


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


@click.group()
@click.version_option(version=__version__)
def main():
    """Topology-aligned mesh serialization toolkit."""
    level = os.environ.get("RIPPLE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("tokenize")
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--bins", default=256, show_default=True)
@click.option("--vocab", "vocab_path", default=None, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["ripl", "jsonl"]), default="ripl", show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def cmd_tokenize(inputs, out_dir, bins, vocab_path, fmt, jobs, figures):
    """Serialize meshes into RIPL token files plus a stats report."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    items = [(p, out_dir, bins, vocab_path, fmt) for p in sorted(inputs)]
    rows = _run_jobs(_tokenize_worker, items, jobs)
    for row in rows:
        if not row["ok"]:
            log.error("%s: %s", row["path"], row["error"])
    good = [r for r in rows if r["ok"]]
    _write_csv(Path(out_dir) / "tokenize_stats.csv", rows,
               ["name", "ok", "faces", "tokens", "control_tokens", "tokens_per_face",
                "components", "max_delta", "max_displacement", "output", "error"])
    if figures and good:
        from .plots import save_token_stats_figure
        save_token_stats_figure(good, Path(out_dir) / "tokenize_stats.png")
    click.echo(f"tokenized {len(good)}/{len(rows)} meshes -> {out_dir}")
    if len(good) != len(rows):
        sys.exit(1)


@main.command("detokenize")
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_detokenize(inputs, out_dir):
    """Rebuild OBJ meshes from RIPL token files."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    failures = 0
    for path in sorted(inputs):
        try:
            seq = read_ripl(path)
            result = detokenize(seq.tokens, seq.vocab)
            out = Path(out_dir) / f"{Path(path).stem}.obj"
            write_obj(result.mesh, out, comment=f"detokenized from {Path(path).name}")
            click.echo(f"{path} -> {out} ({result.mesh.face_count} faces)")
        except (RippleError, OSError) as exc:
            failures += 1
            log.error("%s: %s", path, exc)
    if failures:
        sys.exit(1)


@main.command("roundtrip")
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("--bins", default=256, show_default=True)
@click.option("--jobs", default=1, show_default=True)
def cmd_roundtrip(inputs, bins, jobs):
    """Verify tokenize -> detokenize -> sort -> tokenize reproduces identical bytes."""
    rows = _run_jobs(_roundtrip_worker, [(p, bins) for p in sorted(inputs)], jobs)
    bad = [r for r in rows if not r["ok"]]
    for r in rows:
        click.echo(f"{'ok ' if r['ok'] else 'FAIL'} {r['name']}" + (f" ({r['error']})" if r["error"] else ""))
    if bad:
        sys.exit(1)


@main.command("masks")
@click.argument("input_path", type=click.Path(exists=True))
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--window", "window_faces", default=1000, show_default=True)
@click.option("--bins", default=256, show_default=True)
@click.option("--block", "block_size", default=64, show_default=True)
@click.option("--top-k", default=16, show_default=True)
@click.option("--kernel", default=32, show_default=True)
@click.option("--stride", default=16, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def cmd_masks(input_path, out_dir, window_faces, bins, block_size, top_k, kernel, stride, seed, figures):
    """Emit frontier masks and the sparse-attention plan per window."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    if str(input_path).endswith(".ripl"):
        seq = read_ripl(input_path)
    else:
        prepared = prepare(read_mesh(input_path), bins)
        seq = tokenize(prepared.structure, ControlVocab.default(bins))
    layout = nsca_plan(seq.face_count, block_size, top_k, kernel, stride)
    emb = face_embeddings(seq, seed=seed)
    name = Path(input_path).stem
    rows = []
    for win in make_windows(seq, window_faces):
        L = win.face_count
        fm = frontier_mask(seq.roots, win.face_start, L)
        steps = np.arange(win.face_start, win.face_start + L)
        block_rows = np.stack([layout.block_mask_row(int(t)) for t in steps]) if L else np.zeros((0, 0), np.int8)
        selected = [r.selected_blocks for r in nsca_reference(emb, steps, layout)]
        sidecar = MaskSidecar(
            window_start=win.face_start, window_len=L, clipped=fm.total_clipped,
            dense=fm.to_dense_i8(), supports=fm.row_supports(),
            block_masks=block_rows, selected=selected,
        )
        out = Path(out_dir) / f"{name}_w{win.index:03d}.riplmask"
        write_mask_sidecar(sidecar, out)
        rows.append({"window": win.index, "face_start": win.face_start, "faces": L,
                     "clipped": fm.total_clipped, "output": str(out)})
        if figures:
            from .plots import save_mask_figure
            save_mask_figure(fm.to_dense_i8(), Path(out_dir) / f"{name}_w{win.index:03d}.png",
                             title=f"{name} window {win.index} (faces {win.face_start}..{win.face_start + L - 1})")
    _write_csv(Path(out_dir) / f"{name}_masks.csv", rows,
               ["window", "face_start", "faces", "clipped", "output"])
    click.echo(f"wrote {len(rows)} mask windows -> {out_dir}")


@main.command("filter")
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--filters", "filters_path", default=None, type=click.Path(exists=True))
@click.option("--jobs", default=1, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def cmd_filter(inputs, out_dir, filters_path, jobs, figures):
    """Run the curation checks over meshes; write JSON reports and a CSV summary."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    cfg_json = Path(filters_path).read_text() if filters_path else None
    rows = _run_jobs(_filter_worker, [(p, cfg_json) for p in sorted(inputs)], jobs)
    csv_rows = []
    check_names: list[str] = []
    for rep in rows:
        (Path(out_dir) / f"{rep['name']}.filter.json").write_text(json.dumps(rep, indent=2))
        flat = {"name": rep["name"], "verdict": rep["verdict"], "error": rep.get("error")}
        for chk in rep.get("checks", []):
            flat[chk["name"]] = chk["value"]
            flat[f"{chk['name']}_pass"] = chk["passed"]
            if chk["name"] not in check_names:
                check_names.append(chk["name"])
        csv_rows.append(flat)
    columns = ["name", "verdict"] + [c for n in check_names for c in (n, f"{n}_pass")] + ["error"]
    _write_csv(Path(out_dir) / "filter_report.csv", csv_rows, columns)
    if figures:
        from .plots import save_filter_figure
        save_filter_figure(rows, Path(out_dir) / "filter_report.png")
    kept = sum(1 for r in rows if r["verdict"])
    click.echo(f"filter verdicts: {kept}/{len(rows)} pass -> {out_dir}")
    if any(not r.get("ok", True) for r in rows):
        sys.exit(1)


@main.command("eval")
@click.argument("pred", type=click.Path(exists=True))
@click.argument("gt", type=click.Path(exists=True))
@click.option("--samples", default=1024, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--unsquared-chamfer", is_flag=True, default=False)
@click.option("-o", "--out", "out_path", default=None, type=click.Path(dir_okay=False))
def cmd_eval(pred, gt, samples, seed, unsquared_chamfer, out_path):
    """Chamfer (x1000), Hausdorff, and normal-consistency metrics."""
    try:
        metrics = evaluate(read_mesh(pred), read_mesh(gt), samples=samples, seed=seed,
                           squared_chamfer=not unsquared_chamfer)
    except RippleError as exc:
        log.error("%s", exc)
        sys.exit(1)
    text = json.dumps(metrics, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
    click.echo(text)


@main.command("replay")
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("--bins", default=256, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--trace", "trace_dir", default=None, type=click.Path(file_okay=False))
def cmd_replay(inputs, bins, jobs, trace_dir):
    """Replay tokenizer streams through the decoding constraints."""
    if trace_dir:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    rows = _run_jobs(_replay_worker, [(p, bins, trace_dir) for p in sorted(inputs)], jobs)
    for r in rows:
        status = "ok " if r["ok"] else "FAIL"
        click.echo(f"{status} {r['name']} faces={r['faces']}" + (f" ({r['error']})" if r["error"] else ""))
    if any(not r["ok"] for r in rows):
        sys.exit(1)


@main.command("corpus")
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--include-large", is_flag=True, default=False,
              help="Also write the 20k-face benchmark torus.")
def cmd_corpus(out_dir, include_large):
    """Write the procedural demo corpus as OBJ files."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    meshes = build_corpus()
    if include_large:
        meshes.append(("torus_100x100", torus(100, 100)))
    for name, mesh in meshes:
        write_obj(mesh, Path(out_dir) / f"{name}.obj", comment=name)
    click.echo(f"wrote {len(meshes)} meshes -> {out_dir}")


if __name__ == "__main__":
    main()
