"""Figure rendering for the CLI report paths (Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_token_stats_figure(rows: list[dict], path: str | Path) -> None:
    """Tokens-per-face and aggregated frontier-length views of a batch."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    names = [r["name"] for r in rows]
    tpf = [r["tokens_per_face"] for r in rows]
    ax1.barh(range(len(names)), tpf, color="#4878a8")
    ax1.set_yticks(range(len(names)))
    ax1.set_yticklabels(names, fontsize=6)
    ax1.set_xlabel("tokens per face")
    ax1.axvline(9.0, color="gray", linestyle=":", linewidth=1)

    hist = np.zeros(1, dtype=np.int64)
    for r in rows:
        h = np.asarray(r["frontier_histogram"], dtype=np.int64)
        if len(h) > len(hist):
            hist = np.pad(hist, (0, len(h) - len(hist)))
        hist[:len(h)] += h
    ax2.bar(range(len(hist)), hist, width=1.0, color="#a85348")
    ax2.set_xlabel("frontier queue length at emission")
    ax2.set_ylabel("faces")
    ax2.set_yscale("symlog")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_filter_figure(reports: list[dict], path: str | Path) -> None:
    """Per-check pass/fail counts across a filtered corpus."""
    names: list[str] = []
    for rep in reports:
        for chk in rep.get("checks", []):
            if chk["name"] not in names:
                names.append(chk["name"])
    passed = np.zeros(len(names))
    failed = np.zeros(len(names))
    for rep in reports:
        for chk in rep.get("checks", []):
            k = names.index(chk["name"])
            if chk["passed"]:
                passed[k] += 1
            else:
                failed[k] += 1
    fig, ax = plt.subplots(figsize=(8, 0.5 * len(names) + 2))
    y = np.arange(len(names))
    ax.barh(y, passed, color="#5a9e6f", label="pass")
    ax.barh(y, failed, left=passed, color="#c05746", label="fail")
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.set_xlabel("meshes")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mask_figure(dense: np.ndarray, path: str | Path, title: str = "") -> None:
    """Heatmap of a dense frontier mask (0 attendable, -1 masked)."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.imshow(dense, cmap="cividis", interpolation="nearest")
    ax.set_xlabel("key face (window relative)")
    ax.set_ylabel("query face (window relative)")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
