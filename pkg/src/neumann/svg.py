"""Minimal SVG 1.1 writer for the (K, 2H) bifurcation diagram."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .bifurcation import ScanGrid

WIDTH, HEIGHT = 640, 520
MARGIN = 56


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    """Maps data coordinates ``(K, 2H)`` to the plot box."""

    def __init__(self, k_range, h_range):
        self.k0, self.k1 = k_range
        self.h0, self.h1 = h_range
        self.w = WIDTH - 2 * MARGIN
        self.h = HEIGHT - 2 * MARGIN

    def x(self, k):
        span = self.k1 - self.k0 or 1.0
        return MARGIN + (np.asarray(k) - self.k0) / span * self.w

    def y(self, two_h):
        span = self.h1 - self.h0 or 1.0
        return HEIGHT - MARGIN - (np.asarray(two_h) - self.h0) / span * self.h


def _cell_edges(nodes: np.ndarray) -> np.ndarray:
    if nodes.size == 1:
        return np.array([nodes[0] - 0.5, nodes[0] + 0.5])
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    return np.concatenate([[2 * nodes[0] - mid[0]], mid, [2 * nodes[-1] - mid[-1]]])


def render_scan(grid: ScanGrid, title: str | None = None) -> str:
    """SVG text: shaded regular values, singular curves, fixed-point markers."""
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
    ]
    if grid.cell_count == 0:
        out.append("</svg>")
        return "\n".join(out) + "\n"

    k_edges = _cell_edges(grid.k)
    h_edges = _cell_edges(grid.two_h)
    fr = _Frame((k_edges[0], k_edges[-1]), (h_edges[0], h_edges[-1]))
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="15">{escape(title)}</text>')

    # run-length merge of shaded cells per row
    shaded = grid.regular & grid.realizable
    out.append('<g fill="#c8c8c8" stroke="none">')
    for i in range(shaded.shape[0]):
        row = np.concatenate([[0], shaded[i].astype(int), [0]])
        starts_ends = np.flatnonzero(np.diff(row))
        y_top, y_bot = fr.y(h_edges[i + 1]), fr.y(h_edges[i])
        for s, e in zip(starts_ends[0::2], starts_ends[1::2]):
            x0, x1 = fr.x(k_edges[s]), fr.x(k_edges[e])
            out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y_top)}" width="{_fmt(x1 - x0)}" '
                       f'height="{_fmt(y_bot - y_top)}"/>')
    out.append("</g>")

    out.append('<g fill="none" stroke="black" stroke-width="1.6">')
    for name in sorted(grid.loci):
        for line in grid.loci[name]:
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(fr.x(line[:, 0]), fr.y(line[:, 1])))
            out.append(f'<polyline data-locus="{escape(name)}" points="{pts}"/>')
    out.append("</g>")

    for k0, a in grid.fixed_point_images:
        out.append(f'<circle class="fixed-point" cx="{_fmt(fr.x(k0))}" cy="{_fmt(fr.y(a))}" r="4" '
                   f'fill="black"><title>(0, {a:g})</title></circle>')

    # axes
    x0, x1 = MARGIN, WIDTH - MARGIN
    y0, y1 = HEIGHT - MARGIN, MARGIN
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#444"/>')
    font = 'font-family="sans-serif" font-size="12"'
    for k in np.linspace(grid.k[0], grid.k[-1], 5):
        out.append(f'<text x="{_fmt(fr.x(k))}" y="{y0 + 16}" text-anchor="middle" {font}>{k:.3g}</text>')
    for h in np.linspace(grid.two_h[0], grid.two_h[-1], 6):
        out.append(f'<text x="{x0 - 6}" y="{_fmt(fr.y(h) + 4)}" text-anchor="end" {font}>{h:.3g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 14}" text-anchor="middle" {font}>K</text>')
    out.append(f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" {font} '
               f'transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">2H</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
