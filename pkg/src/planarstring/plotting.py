"""SVG figures: string snapshots and braid diagrams.

Figures are built on a bare matplotlib Figure (no pyplot state) and saved
with a fixed hash salt and no date stamp, so the same data gives the same
bytes.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
from matplotlib.figure import Figure
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "planarstring"
matplotlib.rcParams["svg.fonttype"] = "path"

_METADATA = {"Date": None, "Creator": None}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_METADATA)
    return path


def string_snapshot(ws, path, slices=None, title=None):
    """Fixed-xi0 string curves in the (X1, X3) plane, cusps marked with dots.

    ``slices`` selects row indices of the world-sheet (default: all rows, at
    most seven evenly spaced).
    """
    n0 = len(ws.xi0)
    if slices is None:
        slices = np.unique(np.linspace(0, n0 - 1, min(n0, 7)).round().astype(int)) if n0 else []
    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.add_subplot()
    for i in slices:
        X = ws.X[i]
        ax.plot(X[:, 1], X[:, 2], lw=1.0, label=f"xi0 = {ws.xi0[i]:.3g}")
        cusp = ws.cusp_mask[i]
        if cusp.any():
            ax.plot(X[cusp, 1], X[cusp, 2], "k.", ms=4)
    ax.set_xlabel("X1")
    ax.set_ylabel("X3")
    ax.set_aspect("equal", adjustable="datalim")
    if len(slices):
        ax.legend(fontsize="small", loc="best")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def braid_diagram(lines, path, events=(), axis="X1", title=None):
    """Cusp world-lines with the time X0 vertical and ``axis`` horizontal."""
    col = {"X1": 3, "X3": 4}[axis]
    fig = Figure(figsize=(4.5, 6.0))
    ax = fig.add_subplot()
    for line in lines:
        p = line.points
        ax.plot(p[:, col], p[:, 2], lw=1.5, label=f"line {line.line_id} (k={line.branch_k})")
    for e in events:
        rec = e.to_record() if hasattr(e, "to_record") else e
        if rec["type"] in ("birth", "death"):
            pts = [l.points for l in lines if l.line_id in rec["line_ids"]]
            if pts:
                ends = np.array([q[0] if rec["type"] == "birth" else q[-1] for q in pts])
                ax.plot(ends[:, col].mean(), ends[:, 2].mean(),
                        "o" if rec["type"] == "birth" else "s", color="k", ms=5)
    ax.set_xlabel(axis)
    ax.set_ylabel("X0")
    if lines:
        ax.legend(fontsize="small", loc="best")
    if title:
        ax.set_title(title)
    return _save(fig, path)
