"""Self-contained SVG heatmaps for :class:`PhaseGrid` results.

One <rect> per cell, linear colour scale interpolated between
``COLOR_STOPS``, hatched fill for missing cells and a colour bar. Output
is byte-identical for identical input (no timestamps, fixed formatting).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

#: (position in [0, 1], RGB) stops of the linear colour scale
COLOR_STOPS = (
    (0.0, (49, 54, 149)),
    (0.25, (116, 173, 209)),
    (0.5, (255, 255, 191)),
    (0.75, (244, 109, 67)),
    (1.0, (165, 0, 38)),
)

CELL = 12
MARGIN_LEFT, MARGIN_TOP, MARGIN_BOTTOM = 60, 30, 50
BAR_WIDTH, BAR_GAP, BAR_TEXT = 16, 20, 60


def color_for(t: float) -> str:
    """Hex colour at normalized position ``t`` (clipped to [0, 1])."""
    t = min(1.0, max(0.0, float(t)))
    for (t0, c0), (t1, c1) in zip(COLOR_STOPS, COLOR_STOPS[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = [round(a + f * (b - a)) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*COLOR_STOPS[-1][1])


def _num(x: float) -> str:
    return f"{x:.6g}"


def render_heatmap(grid, path=None, title: str | None = None, layer: int = 0,
                   vmin: float | None = None, vmax: float | None = None) -> str:
    """Render one layer of ``grid`` as SVG; written to ``path`` if given.

    g1 runs along x, g2 along y (increasing upwards).
    """
    values = np.asarray(grid.layer(layer), dtype=float)
    if values.size == 0:
        raise ValueError("empty grid")
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise ValueError("every cell of the grid is missing")
    lo = float(finite.min()) if vmin is None else float(vmin)
    hi = float(finite.max()) if vmax is None else float(vmax)
    span = hi - lo if hi > lo else 1.0

    n1, n2 = values.shape
    width_px = n1 * CELL
    height_px = n2 * CELL
    total_w = MARGIN_LEFT + width_px + BAR_GAP + BAR_WIDTH + BAR_TEXT
    total_h = MARGIN_TOP + height_px + MARGIN_BOTTOM
    if title is None:
        title = str(grid.metadata.get("observable", ""))
        if grid.layer_name is not None:
            title += f" ({grid.layer_name}={_num(grid.layer_axis[layer])})"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
        f'viewBox="0 0 {total_w} {total_h}" font-family="sans-serif" font-size="11">',
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6">'
        '<rect width="6" height="6" fill="#ffffff"/>'
        '<path d="M0,6 L6,0" stroke="#808080" stroke-width="1"/></pattern>',
        '<linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">',
    ]
    out += [f'<stop offset="{_num(t)}" stop-color="{color_for(t)}"/>' for t, _ in COLOR_STOPS]
    out += ["</linearGradient>", "</defs>"]
    out.append(f'<text x="{MARGIN_LEFT}" y="{MARGIN_TOP - 10}">{title}</text>')

    out.append('<g id="cells">')
    for i in range(n1):
        for j in range(n2):
            x = MARGIN_LEFT + i * CELL
            y = MARGIN_TOP + (n2 - 1 - j) * CELL
            v = values[i, j]
            if np.isfinite(v):
                fill = color_for((v - lo) / span)
                cls = "cell"
            else:
                fill = "url(#hatch)"
                cls = "missing"
            out.append(f'<rect class="{cls}" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"/>')
    out.append("</g>")

    x0, y0 = MARGIN_LEFT, MARGIN_TOP + height_px
    out.append(f'<rect x="{x0}" y="{MARGIN_TOP}" width="{width_px}" height="{height_px}" '
               'fill="none" stroke="#000000"/>')
    g1, g2 = grid.g1_axis, grid.g2_axis
    out.append(f'<text x="{x0}" y="{y0 + 14}">{_num(g1[0])}</text>')
    out.append(f'<text x="{x0 + width_px}" y="{y0 + 14}" text-anchor="end">{_num(g1[-1])}</text>')
    out.append(f'<text x="{x0 + width_px / 2:g}" y="{y0 + 32}" text-anchor="middle">g1</text>')
    out.append(f'<text x="{x0 - 4}" y="{y0}" text-anchor="end">{_num(g2[0])}</text>')
    out.append(f'<text x="{x0 - 4}" y="{MARGIN_TOP + 10}" text-anchor="end">{_num(g2[-1])}</text>')
    out.append(f'<text x="{x0 - 40}" y="{MARGIN_TOP + height_px / 2:g}">g2</text>')

    bx = MARGIN_LEFT + width_px + BAR_GAP
    out.append(f'<rect id="colorbar" x="{bx}" y="{MARGIN_TOP}" width="{BAR_WIDTH}" height="{height_px}" '
               'fill="url(#scale)" stroke="#000000"/>')
    out.append(f'<text x="{bx + BAR_WIDTH + 4}" y="{MARGIN_TOP + 10}">{_num(hi)}</text>')
    out.append(f'<text x="{bx + BAR_WIDTH + 4}" y="{MARGIN_TOP + height_px}">{_num(lo)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
