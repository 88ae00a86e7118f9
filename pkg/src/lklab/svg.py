"""Minimal deterministic SVG writer for hull traces and curves.

Coordinates are written with 9 significant digits so that identical inputs
give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def fmt(x: float) -> str:
    """Shortest representation of ``x`` rounded to 9 significant digits."""
    s = f"{float(x):.9g}"
    return "0" if s == "-0" else s


class SvgFigure:
    """Collection of polylines in data coordinates, scaled to a square canvas.

    Parameters
    ----------
    size : int
        Width and height in pixels.
    margin : float
        Fraction of the data range added on each side.
    """

    def __init__(self, size: int = 480, margin: float = 0.05, title: str | None = None):
        self.size = int(size)
        self.margin = float(margin)
        self.title = title
        self._lines: list[tuple[np.ndarray, str, bool, float]] = []

    def polyline(self, points, color: str | None = None, closed: bool = False, width: float = 1.0) -> None:
        pts = np.asarray(points, dtype=complex).reshape(-1)
        if pts.size == 0 or not np.all(np.isfinite(pts)):
            raise ValueError("polyline points must be finite and nonempty")
        c = color or PALETTE[len(self._lines) % len(PALETTE)]
        self._lines.append((pts, c, bool(closed), float(width)))

    def _transform(self):
        allp = np.concatenate([p for p, *_ in self._lines])
        lo_x, hi_x = allp.real.min(), allp.real.max()
        lo_y, hi_y = allp.imag.min(), allp.imag.max()
        span = max(hi_x - lo_x, hi_y - lo_y, 1e-12) * (1 + 2 * self.margin)
        cx, cy = 0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y)
        scale = self.size / span

        def tr(p):
            x = (p.real - cx) * scale + 0.5 * self.size
            y = (cy - p.imag) * scale + 0.5 * self.size
            return x, y

        return tr

    def to_string(self) -> str:
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
            f'viewBox="0 0 {self.size} {self.size}">'
        ]
        if self.title:
            out.append(f"<title>{_escape(self.title)}</title>")
        out.append(f'<rect width="{self.size}" height="{self.size}" fill="white"/>')
        if self._lines:
            tr = self._transform()
            for pts, color, closed, width in self._lines:
                x, y = tr(pts)
                coords = " ".join(f"{fmt(a)},{fmt(b)}" for a, b in zip(x, y))
                tag = "polygon" if closed else "polyline"
                out.append(
                    f'<{tag} points="{coords}" fill="none" stroke="{color}" stroke-width="{fmt(width)}"/>'
                )
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_string())
        return path


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def hull_figure(traces: Sequence, title: str | None = None, unit_circle: bool = True) -> SvgFigure:
    """Figure with one closed curve per hull trace (objects with ``points``)."""
    fig = SvgFigure(title=title)
    if unit_circle:
        th = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
        fig.polyline(np.exp(1j * th), color="#999999", closed=True, width=0.5)
    for k, tr in enumerate(traces):
        fig.polyline(tr.points, color=PALETTE[k % len(PALETTE)], closed=True)
    return fig


def curve_figure(x, ys: Sequence, title: str | None = None) -> SvgFigure:
    """Figure of the graphs ``(x, y)`` for each ``y`` in ``ys`` (aspect not preserved)."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for y in ys]
    lo = min(float(y.min()) for y in ys)
    hi = max(float(y.max()) for y in ys)
    sx = 1.0 / max(x.max() - x.min(), 1e-12)
    sy = 1.0 / max(hi - lo, 1e-12)
    fig = SvgFigure(title=title)
    for y in ys:
        fig.polyline((x - x.min()) * sx + 1j * (y - lo) * sy)
    return fig
