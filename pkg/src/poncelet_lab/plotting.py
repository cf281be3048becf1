"""Deterministic SVG figures of conics, polygons and point loci."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .dynamics import ellipse_frame
from .errors import EmptyDataset, NotRealNested
from .projective import Conic

CONIC_SEGMENTS = 256
MARGIN = 0.05

STYLE = {
    "svg.hashsalt": "poncelet-lab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.6,
    "lines.linewidth": 0.9,
}

PALETTE = ("#1b4f72", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#2e4053", "#117a65", "#922b21")


def conic_polyline(conic: Conic, segments: int = CONIC_SEGMENTS) -> np.ndarray | None:
    """Closed polyline with ``segments`` segments for a real ellipse, else None."""
    try:
        frame = ellipse_frame(conic)
    except NotRealNested:
        return None
    theta = np.linspace(0.0, 2 * np.pi, segments + 1)
    return np.array([frame.point(t) for t in theta])


@dataclass
class FigureSpec:
    """What to draw: conic outlines, closed polygons and scattered points."""

    conics: list[tuple[Conic, str]] = field(default_factory=list)
    polygons: list[np.ndarray] = field(default_factory=list)
    points: np.ndarray | None = None
    title: str | None = None

    def is_empty(self) -> bool:
        return not self.conics and not self.polygons and (self.points is None or len(self.points) == 0)


def _bbox(chunks: Sequence[np.ndarray]) -> tuple[float, float, float, float]:
    data = np.vstack([c for c in chunks if len(c)])
    (x0, y0), (x1, y1) = data.min(axis=0), data.max(axis=0)
    w, h = x1 - x0, y1 - y0
    pad = MARGIN * max(w, h, 1e-12)
    return x0 - pad, x1 + pad, y0 - pad, y1 + pad


def render_svg(spec: FigureSpec, size: tuple[float, float] = (5.0, 5.0)) -> bytes:
    """Render to SVG bytes; identical input gives identical bytes."""
    if spec.is_empty():
        raise EmptyDataset("nothing to draw")
    chunks: list[np.ndarray] = []
    outlines = []
    for conic, label in spec.conics:
        line = conic_polyline(conic)
        if line is not None:
            outlines.append((line, label))
            chunks.append(line)
    polys = [np.asarray(p, dtype=float) for p in spec.polygons]
    chunks += polys
    pts = None if spec.points is None else np.asarray(spec.points, dtype=float)
    if pts is not None and len(pts):
        chunks.append(pts)
    if not chunks:
        raise EmptyDataset("no drawable real data")
    x0, x1, y0, y1 = _bbox(chunks)

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=size)
        ax = fig.add_subplot(1, 1, 1)
        for i, (line, label) in enumerate(outlines):
            ax.plot(line[:, 0], line[:, 1], color=PALETTE[i % len(PALETTE)], label=label, gid=f"conic_{i}")
        for i, poly in enumerate(polys):
            closed = np.vstack([poly, poly[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color=PALETTE[(i + 2) % len(PALETTE)], linewidth=0.6, alpha=0.8, gid=f"polygon_{i}")
        if pts is not None and len(pts):
            ax.scatter(pts[:, 0], pts[:, 1], s=6, color="#111111", zorder=3, label="samples", gid="points")
        # fixed view box: data bounding box plus the margin
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
        ax.set_aspect("equal", adjustable="box")
        if spec.title:
            ax.set_title(spec.title)
        if outlines or (pts is not None and len(pts)):
            ax.legend(loc="upper right", frameon=False, fontsize=7)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def emit_svg(path: str | Path, spec: FigureSpec) -> Path:
    data = render_svg(spec)
    path = Path(path)
    path.write_bytes(data)
    return path
