"""Plain SVG rendering of critical graphs, one panel per sheet."""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from . import __version__

PANEL = 360
MARGIN = 24
EXTENT = 2.2
COLORS = {
    "edge": "#1f4e9c",
    "infinite": "#7a7a7a",
    "open": "#c0392b",
    "delta1": "#000000",
    "delta2": "#000000",
    "delta3": "#000000",
    "simple": "#d35400",
    "double": "#000000",
}
CUT_SHEETS = {"delta1": (1, 2), "delta2": (1, 3), "delta3": (2, 3)}
CUT_DASH = {"delta1": "none", "delta2": "6,3", "delta3": "2,2"}


def header_line() -> str:
    return f"<!-- cubiccrit {__version__} critical-graph svg schema 1 -->"


def _xy(z: np.ndarray, panel: int) -> tuple[np.ndarray, np.ndarray]:
    scale = (PANEL - 2 * MARGIN) / (2 * EXTENT)
    x0 = panel * PANEL + PANEL / 2
    y0 = PANEL / 2 + 20
    return x0 + scale * z.real, y0 - scale * z.imag


def _path(z: np.ndarray, panel: int) -> str:
    x, y = _xy(np.asarray(z, dtype=complex), panel)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
    return pts


def _runs(z: np.ndarray, sheet: np.ndarray):
    """Split a polyline into maximal pieces lying on one sheet."""
    start = 0
    for k in range(1, len(z) + 1):
        if k == len(z) or sheet[k] != sheet[start]:
            yield int(sheet[start]), z[start:k + 1 if k < len(z) else k]
            start = k


def render_graph(graph, cuts=None, title: Optional[str] = None) -> str:
    """SVG text with three panels; line 2 is the version header."""
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{3 * PANEL}" '
             f'height="{PANEL + 40}" font-family="sans-serif" font-size="12">',
             header_line()]
    label = title or f"critical graph, tau = {graph.tau:.6g}"
    parts.append(f'<text x="8" y="14">{escape(label)}</text>')
    for p in range(3):
        parts.append(f'<g id="sheet{p + 1}">')
        parts.append(f'<rect x="{p * PANEL + 2}" y="22" width="{PANEL - 4}" height="{PANEL - 4}" '
                     f'fill="none" stroke="#cccccc"/>')
        parts.append(f'<text x="{p * PANEL + 8}" y="36">sheet {p + 1}</text>')
        parts.append(f'<polyline class="axis" points="{_path(np.array([-EXTENT, EXTENT]), p)}" '
                     f'stroke="#dddddd" fill="none"/>')
        parts.append("</g>")
    if cuts is not None:
        d3 = cuts.delta3
        geo = {"delta1": np.array(cuts.delta1, dtype=complex), "delta2": cuts.delta2,
               "delta3": np.array(d3, dtype=complex) if d3 else None}
        for name, poly in geo.items():
            if poly is None:
                continue
            for s in CUT_SHEETS[name]:
                parts.append(f'<polyline class="cut" data-cut="{name}" data-sheet="{s}" '
                             f'points="{_path(poly, s - 1)}" stroke="{COLORS[name]}" '
                             f'stroke-width="2.5" stroke-dasharray="{CUT_DASH[name]}" fill="none"/>')
    for e in graph.edges:
        tr = e.trajectory
        kind = "open" if e.end == "open" else ("infinite" if e.end.startswith("inf") else "edge")
        for sheet, piece in _runs(np.asarray(tr.z), np.asarray(tr.sheet)):
            if len(piece) < 2 or sheet not in (1, 2, 3):
                continue
            parts.append(f'<polyline class="{kind}" data-edge="{escape(e.label())}" '
                         f'data-sheet="{sheet}" points="{_path(piece, sheet - 1)}" '
                         f'stroke="{COLORS[kind]}" stroke-width="1.2" fill="none"/>')
    for vid in sorted(graph.vertices):
        v = graph.vertices[vid]
        for s in v.sheets:
            x, y = _xy(np.array([v.z]), s - 1)
            if v.order == 1:
                parts.append(f'<rect class="simple-zero" data-vertex="{escape(vid)}" '
                             f'x="{x[0] - 3.5:.2f}" y="{y[0] - 3.5:.2f}" width="7" height="7" '
                             f'fill="{COLORS["simple"]}"/>')
            else:
                parts.append(f'<circle class="double-zero" data-vertex="{escape(vid)}" '
                             f'cx="{x[0]:.2f}" cy="{y[0]:.2f}" r="4" fill="{COLORS["double"]}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
