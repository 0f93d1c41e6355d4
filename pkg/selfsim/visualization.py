"""
Static SVG figures for selfsim.

The renderer draws the seed and the E-approximation in black strokes, fills
components by similarity class and overlays the witnesses of the final
depth: the separation pair, the worst porosity ball and the path-constant
pair. Output is plain text built line by line with fixed number formatting,
so equal inputs give byte-identical files.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import RenderError
from .ifs import Scene

logger = logging.getLogger(__name__)

CLASS_COLORS = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]


class SceneRenderer:
    """Builds SVG documents for a scene and, optionally, its report."""

    def __init__(self, size: int = 800, margin: int = 20):
        self.size = size
        self.margin = margin
        self.styles: Dict[str, Dict[str, str]] = {
            "seed": {"fill": "#e6e6e6", "stroke": "#000000", "stroke-width": "0.75"},
            "component": {"stroke": "#000000", "stroke-width": "0.5"},
            "polyline": {"fill": "none", "stroke": "#000000", "stroke-width": "0.75"},
            "separation": {"fill": "none", "stroke": "#d62728", "stroke-width": "1.5"},
            "touch": {"fill": "#d62728", "stroke": "none"},
            "porosity": {"fill": "none", "stroke": "#1f77b4", "stroke-width": "1.5", "stroke-dasharray": "4 3"},
            "path": {"fill": "none", "stroke": "#2ca02c", "stroke-width": "1.5"},
            "label": {"font-family": "monospace", "font-size": "11"},
        }
        self._scale = 1.0
        self._x0 = 0.0
        self._y1 = 0.0

    # -- coordinates -------------------------------------------------------

    def _fit(self, bounds: Tuple[float, float, float, float]) -> None:
        xmin, ymin, xmax, ymax = bounds
        extent = max(xmax - xmin, ymax - ymin)
        self._scale = (self.size - 2 * self.margin) / extent if extent > 0 else 1.0
        self._x0 = xmin
        self._y1 = ymax

    def _xy(self, p: Sequence[float]) -> Tuple[str, str]:
        x = self.margin + (float(p[0]) - self._x0) * self._scale
        y = self.margin + (self._y1 - float(p[1])) * self._scale
        return _num(x), _num(y)

    def _points(self, pts: np.ndarray) -> str:
        return " ".join(",".join(self._xy(p)) for p in pts)

    def _style(self, name: str, **extra: str) -> str:
        attrs = dict(self.styles[name], **extra)
        return " ".join(f'{k}="{v}"' for k, v in attrs.items())

    # -- document ----------------------------------------------------------

    def to_svg(self, scene: Scene, report=None, filename: Optional[str] = None) -> str:
        """Render ``scene`` with the witnesses of ``report`` when given."""
        self._fit(scene.bounds)
        lines = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
            f'viewBox="0 0 {self.size} {self.size}">',
            f'  <rect x="0" y="0" width="{self.size}" height="{self.size}" fill="#ffffff"/>',
        ]
        self._build_scene(scene, report, lines)
        if report is not None:
            self._build_overlays(report, lines)
        lines.append("</svg>")
        svg = "\n".join(lines) + "\n"

        if filename:
            try:
                with open(filename, "w", encoding="utf-8", newline="\n") as f:
                    f.write(svg)
            except OSError as e:
                raise RenderError(f"cannot write SVG to {filename}: {e.strerror}", filename) from e
            logger.info("wrote SVG figure to %s", filename)
        return svg

    def _build_scene(self, scene: Scene, report, lines: List[str]) -> None:
        class_of: Dict[int, int] = {}
        if report is not None and report.final.similarity is not None:
            class_of = report.final.similarity.class_of

        lines.append('  <g id="E">')
        if scene.seed is not None:
            lines.append(f'    <polygon points="{self._points(scene.seed)}" {self._style("seed")}/>')
        # boundary = component outlines, extra polylines, then the seed outline
        stop = len(scene.boundary) - (1 if scene.seed is not None else 0)
        for line in scene.boundary[len(scene.components):stop]:
            tag = "polygon" if line.closed else "polyline"
            lines.append(f'    <{tag} points="{self._points(line.points)}" {self._style("polyline")}/>')
        lines.append("  </g>")

        lines.append('  <g id="components">')
        for comp in scene.components:
            color = CLASS_COLORS[class_of.get(comp.id, 0) % len(CLASS_COLORS)]
            lines.append(f'    <polygon data-id="{comp.id}" points="{self._points(comp.polygon)}" '
                         f'{self._style("component", fill=color)}/>')
        lines.append("  </g>")

    def _build_overlays(self, report, lines: List[str]) -> None:
        final = report.final
        lines.append('  <g id="witnesses">')
        sep = final.separation
        if sep is not None:
            (ax, ay), (bx, by) = (self._xy(p) for p in sep.witness_points)
            lines.append(f'    <line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" {self._style("separation")}/>')
            if sep.unbounded:
                lines.append(f'    <circle cx="{ax}" cy="{ay}" r="3" {self._style("touch")}/>')
                text = f"separation UNBOUNDED {sep.witness[0]}-{sep.witness[1]}"
            else:
                text = f"separation C={sep.constant:.6f} {sep.witness[0]}-{sep.witness[1]}"
            lines.append(self._label(sep.witness_points[0], text, "separation"))
        if final.porosity is not None:
            w = final.porosity.worst
            cx, cy = self._xy(w.x)
            lines.append(f'    <circle cx="{cx}" cy="{cy}" r="{_num(w.r * self._scale)}" {self._style("porosity")}/>')
            lines.append(self._label(w.x, f"porosity {w.ratio:.6f} r={w.r:.6g}", "porosity"))
        if final.path:
            worst = max(final.path, key=lambda p: p.k)
            (ax, ay), (bx, by) = self._xy(worst.x), self._xy(worst.y)
            lines.append(f'    <line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" {self._style("path")}/>')
            lines.append(self._label(worst.y, f"path k={worst.k:.6f} id={worst.component_id}", "path"))
        lines.append("  </g>")

    def _label(self, p: Sequence[float], text: str, color_of: str) -> str:
        x, y = self._xy(p)
        fill = self.styles[color_of].get("stroke", "#000000")
        return f'    <text x="{x}" y="{y}" fill="{fill}" {self._style("label")}>{_escape(text)}</text>'


def _num(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(scene: Scene, report=None, path: Optional[str] = None) -> str:
    """Render a scene (and the witnesses of a report) to SVG, writing it to ``path`` when given."""
    return SceneRenderer().to_svg(scene, report, path)


__all__ = ["SceneRenderer", "render_svg", "CLASS_COLORS"]
