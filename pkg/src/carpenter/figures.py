"""Optional figure rendering for run reports.

Figures are a convenience view over the CSV artifacts, rendered headless
to PNG files next to them.  Rendering is deterministic for a fixed
environment: fixed size, fixed dpi, fixed metadata, no timestamps.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .carpenter import ConstructionResult
from .verify import VerificationReport

_PNG_META = {"Software": "carpenter"}
_DPI = 120


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_META)
    plt.close(fig)
    return path


def surplus_figure(result: ConstructionResult, path: Path) -> Path:
    """Running surplus of the target over the eigenvalues, per index."""
    deltas = []
    total = 0.0
    for lam, d in zip(result.lam, result.targets):
        total += d - lam
        deltas.append(total)
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(range(1, len(deltas) + 1), deltas, lw=1.0, color="#1f6f8b")
    ax.axhline(0.0, color="#888888", lw=0.6)
    ax.set_xlabel("index")
    ax.set_ylabel("surplus")
    ax.set_title(f"running surplus ({result.route})")
    fig.tight_layout()
    return _save(fig, path)


def diagonal_figure(result: ConstructionResult, path: Path) -> Path:
    """Requested versus achieved diagonal entries on constructed slots."""
    slots = sorted(result.constructed)
    want = [result.targets[s - 1] for s in slots]
    got = [result.achieved[s] for s in slots]
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(slots, want, "o", ms=3.5, label="requested", color="#1f6f8b")
    ax.plot(slots, got, "+", ms=5.0, label="achieved", color="#c1440e")
    ax.set_xlabel("slot")
    ax.set_ylabel("diagonal entry")
    ax.set_title("diagonal realization")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def defect_figure(report: VerificationReport, path: Path) -> Path:
    """Completeness defect per frame index, log scale where positive."""
    xs = [row.frame_index for row in report.defect_table]
    ys = [max(row.defect, 0.0) for row in report.defect_table]
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.bar(xs, ys, width=0.8, color="#1f6f8b")
    ax.set_xlabel("frame index")
    ax.set_ylabel("unrealized mass")
    ax.set_title("completeness defect")
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    return _save(fig, path)


def functions_figure(
    samples: Sequence[tuple[str, Sequence[float], Sequence[float]]], path: Path
) -> Path:
    """Overlay of sampled constructed functions on the interval."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for vector_id, xs, values in samples:
        ax.plot(xs, values, lw=0.9, label=vector_id)
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.set_title("constructed basis functions")
    if samples:
        ax.legend(loc="upper right", fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, path)


def render_report_figures(
    result: ConstructionResult,
    report: VerificationReport | None,
    outdir: str | Path,
    *,
    samples: Sequence[tuple[str, Sequence[float], Sequence[float]]] | None = None,
) -> list[Path]:
    """Render the standard figure set next to the CSV artifacts."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        surplus_figure(result, out / "surplus_profile.png"),
        diagonal_figure(result, out / "diagonal_fit.png"),
    ]
    if report is not None and report.defect_table:
        written.append(defect_figure(report, out / "defect_profile.png"))
    if samples:
        written.append(functions_figure(samples, out / "functions.png"))
    return written
