"""Hand-rolled SVG scatter/hull rendering.

Kept free of plotting libraries on purpose: output depends only on the
input data, so identical inputs produce byte-identical documents, which
the experiment harness relies on for reproducibility checks.
"""

from __future__ import annotations

import numpy as np

from .geometry import ForPolygon
from .sampling import LABELS, LabelledCloud

WIDTH, HEIGHT = 720, 560
MARGIN = 60

LABEL_COLORS = {
    "feasible": "#2ca02c",
    "voltage": "#d62728",
    "current": "#ff7f0e",
    "both": "#9467bd",
    "non-converged": "#7f7f7f",
}
HULL_COLORS = ("#000000", "#1f77b4", "#e377c2", "#17becf", "#bcbd22")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(
    cloud: LabelledCloud,
    hulls: tuple[ForPolygon, ...] = (),
    hull_labels: tuple[str, ...] = (),
    title: str = "",
) -> str:
    """Scatter of a labelled cloud with optional region outlines."""
    if len(cloud) == 0:
        raise ValueError("cloud must not be empty")

    xs = [cloud.p_kw]
    ys = [cloud.q_kvar]
    for hull in hulls:
        v = hull.as_array()
        xs.append(v[:, 0])
        ys.append(v[:, 1])
    x_all = np.concatenate(xs)
    y_all = np.concatenate(ys)
    x_lo, x_hi = float(x_all.min()), float(x_all.max())
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    x_pad = 0.05 * (x_hi - x_lo) or 1.0
    y_pad = 0.05 * (y_hi - y_lo) or 1.0
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x: float) -> str:
        return _fmt(MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN))

    def py(y: float) -> str:
        return _fmt(HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#444444"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="30" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )
    parts.append(
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">P at interconnection (kW)</text>'
    )
    parts.append(
        f'<text x="18" y="{HEIGHT // 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 18 {HEIGHT // 2})">Q at interconnection (kvar)</text>'
    )

    for p, q, code in zip(cloud.p_kw, cloud.q_kvar, cloud.labels):
        color = LABEL_COLORS[LABELS[code]]
        parts.append(f'<circle cx="{px(p)}" cy="{py(q)}" r="1.5" fill="{color}"/>')

    for i, hull in enumerate(hulls):
        color = HULL_COLORS[i % len(HULL_COLORS)]
        pts = " ".join(f"{px(x)},{py(y)}" for x, y in hull.vertices)
        parts.append(
            f'<polygon points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )

    legend_y = MARGIN + 14
    for name in LABELS:
        if (cloud.labels == LABELS.index(name)).any():
            parts.append(
                f'<circle cx="{MARGIN + 10}" cy="{legend_y - 4}" r="3" '
                f'fill="{LABEL_COLORS[name]}"/>'
            )
            parts.append(
                f'<text x="{MARGIN + 20}" y="{legend_y}" font-family="sans-serif" '
                f'font-size="11">{name}</text>'
            )
            legend_y += 16
    for i, label in enumerate(hull_labels):
        color = HULL_COLORS[i % len(HULL_COLORS)]
        parts.append(
            f'<rect x="{MARGIN + 4}" y="{legend_y - 10}" width="12" height="3" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{MARGIN + 20}" y="{legend_y}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
        legend_y += 16

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
