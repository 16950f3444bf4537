"""Static SVG drawings of sampled diagrams.

Output depends only on the diagram, so re-rendering a re-run is byte-identical.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .colored import ColoredDiagram
from .core import Diagram

MAX_SEGMENTS = 10_000
PALETTE = ["#1f4e9c", "#c0392b", "#e67e22", "#27ae60", "#8e44ad", "#16a085", "#7f8c8d", "#d35400"]


def _f(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


class _Canvas:
    def __init__(self, width: float, height: float, px: float = 480.0, margin: float = 20.0):
        self.scale = px / max(width, height)
        self.w, self.h = width, height
        self.margin = margin
        self.parts: list[str] = []

    def X(self, x: float) -> str:
        return _f(self.margin + x * self.scale)

    def Y(self, y: float) -> str:
        return _f(self.margin + (self.h - y) * self.scale)

    def line(self, x0, y0, x1, y1, color="#000", width=1.0):
        self.parts.append(f'<line x1="{self.X(x0)}" y1="{self.Y(y0)}" x2="{self.X(x1)}" y2="{self.Y(y1)}" '
                          f'stroke="{color}" stroke-width="{_f(width)}"/>')

    def cross(self, x, y, r=3.0, color="#000"):
        cx, cy = self.margin + x * self.scale, self.margin + (self.h - y) * self.scale
        self.parts.append(f'<path class="nucleation" d="M{_f(cx - r)} {_f(cy - r)}L{_f(cx + r)} {_f(cy + r)}'
                          f'M{_f(cx - r)} {_f(cy + r)}L{_f(cx + r)} {_f(cy - r)}" stroke="{color}" stroke-width="1.5"/>')

    def dot(self, x, y, cls, r=2.5, fill="#000"):
        self.parts.append(f'<circle class="{cls}" cx="{self.X(x)}" cy="{self.Y(y)}" r="{_f(r)}" fill="{fill}"/>')

    def render(self) -> str:
        W = 2 * self.margin + self.w * self.scale
        H = 2 * self.margin + self.h * self.scale
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(W)}" height="{_f(H)}" '
                f'viewBox="0 0 {_f(W)} {_f(H)}">')
        frame = (f'<rect class="axes" x="{_f(self.margin)}" y="{_f(self.margin)}" width="{_f(self.w * self.scale)}" '
                 f'height="{_f(self.h * self.scale)}" fill="none" stroke="#444" stroke-width="1"/>')
        return "\n".join([head, frame, *self.parts, "</svg>"]) + "\n"


def _bits_color(bits: int) -> str:
    return PALETTE[(bits.bit_length() - 1) % len(PALETTE)] if bits else "#000"


def svg_string(diagram, max_segments: int = MAX_SEGMENTS) -> str:
    if isinstance(diagram, ColoredDiagram):
        return _colored(diagram, max_segments)
    if isinstance(diagram, Diagram):
        return _single(diagram, max_segments)
    raise TypeError(f"cannot render {type(diagram).__name__}")


def _single(d: Diagram, max_segments: int) -> str:
    n_seg = len(d.p_x) + len(d.l_y)
    if n_seg > max_segments:
        raise ValueError(f"diagram has {n_seg} segments, above the render limit {max_segments}")
    c = _Canvas(d.width, d.height)
    for x, y0, y1 in zip(d.p_x.tolist(), d.p_y0.tolist(), np.minimum(d.p_y1, d.height).tolist()):
        c.line(x, y0, x, y1, "#c0392b")
    for x0, x1, y in zip(d.l_x0.tolist(), d.l_x1.tolist(), d.l_y.tolist()):
        c.line(x0, y, x1, y, "#c0392b")
    for x, y in d.nucleations.points():
        c.cross(x, y)
    for x, y in zip(d.c_x.tolist(), d.c_y.tolist()):
        c.dot(x, y, "crossing", fill="#27ae60")
    for x, y in zip(d.k_x.tolist(), d.k_y.tolist()):
        c.dot(x, y, "corner", fill="#1f4e9c")
    return c.render()


def _colored(d: ColoredDiagram, max_segments: int) -> str:
    n_seg = len(d.v_segments) + len(d.h_segments)
    if n_seg > max_segments:
        raise ValueError(f"diagram has {n_seg} segments, above the render limit {max_segments}")
    if d.vertices == [] and len(d.nucleations) and not d.h_segments:
        raise ValueError("colored diagram was sampled without geometry; re-run with record_vertices=True")
    c = _Canvas(d.width, d.height)
    for x, y0, y1, b in d.v_segments:
        for bit in range(d.n):
            if b >> bit & 1:
                c.line(x, y0, x, y1, _bits_color(1 << bit), 1.2)
    for x0, x1, y, b in d.h_segments:
        for bit in range(d.n):
            if b >> bit & 1:
                c.line(x0, y, x1, y, _bits_color(1 << bit), 1.2)
    for (x, y), b in zip(d.nucleations.tolist(), d.nucleation_bits):
        c.cross(x, y, color=_bits_color(b))
    for x, y, i, j, k, l in d.vertices:
        if (k, l) != (i, j):
            c.dot(x, y, "corner", 2.0, "#222")
    return c.render()


def render_svg(diagram, path, max_segments: int = MAX_SEGMENTS) -> Path:
    text = svg_string(diagram, max_segments)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
