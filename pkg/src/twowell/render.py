"""Deterministic SVG emitters for constructions and phase diagrams.

SVG is generated by hand: boundary curves of the cells are low-degree
polynomial graphs that render exactly as sampled polylines, and the output
stays byte-reproducible (no timestamps, no library-dependent ids).
"""

from __future__ import annotations

import math

import numpy as np

from .piecewise import PiecewiseDeformation
from .scaling import PhaseDiagram
from .wells import WellSpec, dist_to_wells

__all__ = ["construction_svg", "phase_svg"]

_WELL_COLORS = {"A": (217, 95, 2), "B": (27, 158, 119)}

_REGIME_COLORS = {
    "A": "#cccccc",
    "BR": "#1b9e77",
    "HL": "#d95f02",
    "VB1": "#7570b3",
    "VB2": "#e7298a",
    "VL": "#66a61e",
}


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _shade(base: tuple[int, int, int], angle: float) -> str:
    # Lighten by the optimal rotation angle so twinned regions are visible.
    f = 0.25 + 0.75 * (0.5 * (1.0 + math.cos(2.0 * angle)))
    r, g, b = (int(255 - (255 - c) * f) for c in base)
    return f"#{r:02x}{g:02x}{b:02x}"


def construction_svg(def_: PiecewiseDeformation, spec: WellSpec,
                     width_px: int = 800) -> str:
    """Domain colored by the nearest well of the gradient (shaded by the
    optimal rotation angle) with the jump curves drawn on top."""
    dom = def_.domain
    sx = width_px / dom.width
    height_px = dom.height * sx
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" '
        f'height="{_fmt(height_px)}" viewBox="0 0 {width_px} {_fmt(height_px)}">',
        f'<rect width="{width_px}" height="{_fmt(height_px)}" fill="white"/>',
    ]

    def to_px(pts: np.ndarray) -> np.ndarray:
        out = np.empty_like(pts)
        out[:, 0] = (pts[:, 0] - dom.x0) * sx
        out[:, 1] = (dom.y1 - pts[:, 1]) * sx
        return out

    for part in def_.parts:
        Q, b, CL, c = part.folded()
        inv = np.linalg.inv(Q)
        for g in part.groups:
            w = g.proto.width
            npts = max(2, min(16, int(round(w / dom.width * 256))))
            xs = np.linspace(0.0, w, npts + 1)
            lo = g.proto.lower.value(xs)
            hi = g.proto.upper.value(xs)
            ring_base = np.vstack([np.column_stack([xs, lo]),
                                   np.column_stack([xs[::-1], hi[::-1]])])
            # Gradient at the cell centre classifies the whole cell.
            xm = np.array([0.5 * w])
            ym = 0.5 * (g.proto.lower.value(xm) + g.proto.upper.value(xm))
            du = np.eye(2) + g.proto.map.grad(xm, ym)[0]
            F = CL @ du @ Q
            wd = dist_to_wells(F, spec)
            fill = _shade(_WELL_COLORS[wd.nearest_well], wd.optimal_angle)
            for k in range(g.count):
                anchor = np.array([g.x0, g.y0 + k * g.dy])
                ring = (ring_base + anchor - b) @ inv.T
                px = to_px(ring)
                path = " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in px)
                lines.append(f'<polygon points="{path}" fill="{fill}" stroke="none"/>')
        for jg in part.jumps:
            proto = jg.proto
            ts = np.linspace(0.0, proto.length_param(), 17)
            jx, jy = proto.points(ts)
            base = np.column_stack([np.broadcast_to(jx, ts.shape),
                                    np.broadcast_to(jy, ts.shape)])
            for k in range(jg.count):
                anchor = np.array([jg.x0, jg.y0 + k * jg.dy])
                world = (base + anchor - b) @ inv.T
                px = to_px(world)
                path = " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in px)
                lines.append(f'<polyline points="{path}" fill="none" '
                             f'stroke="black" stroke-width="0.4"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def phase_svg(diagram: PhaseDiagram, width_px: int = 640) -> str:
    """Regime map in the log10(L/eps), log10(H/eps) plane."""
    n_l = len(diagram.log10_L_over_eps)
    n_h = len(diagram.log10_H_over_eps)
    margin = 60
    plot = width_px - 2 * margin
    cell_w = plot / n_l
    cell_h = plot / n_h
    height_px = width_px
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" '
        f'height="{height_px}" viewBox="0 0 {width_px} {height_px}">',
        f'<rect width="{width_px}" height="{height_px}" fill="white"/>',
    ]
    for j in range(n_h):
        y = margin + plot - (j + 1) * cell_h
        for i in range(n_l):
            color = _REGIME_COLORS.get(str(diagram.regimes[j, i]), "#000000")
            x = margin + i * cell_w
            lines.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
                         f'width="{_fmt(cell_w + 0.5)}" height="{_fmt(cell_h + 0.5)}" '
                         f'fill="{color}"/>')
    lines.append(f'<rect x="{margin}" y="{margin}" width="{plot}" height="{plot}" '
                 f'fill="none" stroke="black"/>')
    lines.append(f'<text x="{margin + plot / 2}" y="{height_px - 15}" '
                 f'text-anchor="middle" font-size="14">log10(L/eps)</text>')
    lines.append(f'<text x="18" y="{margin + plot / 2}" text-anchor="middle" '
                 f'font-size="14" transform="rotate(-90 18 {margin + plot / 2})">'
                 f'log10(H/eps)</text>')
    lines.append(f'<text x="{margin}" y="{margin - 10}" font-size="14">'
                 f'case {diagram.case}, alpha={diagram.alpha}</text>')
    present = sorted(set(str(r) for r in diagram.regimes.ravel()))
    for k, lab in enumerate(present):
        x = margin + plot + 8
        y = margin + 18 * (k + 1)
        lines.append(f'<rect x="{x}" y="{y - 10}" width="12" height="12" '
                     f'fill="{_REGIME_COLORS.get(lab, "#000")}"/>')
        lines.append(f'<text x="{x + 16}" y="{y}" font-size="12">{lab}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
