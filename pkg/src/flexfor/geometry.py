"""Convex polygon geometry for flexibility regions in the PQ plane.

Regions are convex by construction (convex hulls of feasible operating
points), so intersection reduces to half-plane clipping and the union
area follows from inclusion-exclusion. That keeps the Jaccard score
exact up to float rounding, with no general polygon-boolean machinery.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class DegenerateRegionError(ValueError):
    """Point set spans no area (fewer than 3 points, or all collinear)."""


@dataclass(frozen=True)
class ForPolygon:
    """Convex polygon, vertices counter-clockwise, no repeated endpoint."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise DegenerateRegionError("polygon needs at least 3 vertices")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def to_json(self) -> str:
        return json.dumps(
            {"vertices": [list(v) for v in self.vertices], "area": area(self)}
        )

    @classmethod
    def from_json(cls, text: str) -> "ForPolygon":
        d = json.loads(text)
        return cls(vertices=tuple((float(x), float(y)) for x, y in d["vertices"]))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> ForPolygon:
    """Monotone-chain convex hull, counter-clockwise, collinear points dropped.

    Raises DegenerateRegionError for fewer than 3 distinct points or a
    collinear point set.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array-like")
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) < 3:
        raise DegenerateRegionError("need at least 3 distinct points")

    lower: list[tuple[float, float]] = []
    for p in uniq:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(uniq):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateRegionError("points are collinear")
    return ForPolygon(vertices=tuple(hull))


def area(poly: ForPolygon | None) -> float:
    """Shoelace area; 0.0 for an empty region."""
    if poly is None:
        return 0.0
    v = poly.as_array()
    x, y = v[:, 0], v[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _clip_halfplane(subject: list, a, b) -> list:
    """Keep the part of ``subject`` left of directed edge a->b."""
    if not subject:
        return []
    ax, ay = a
    bx, by = b
    ex, ey = bx - ax, by - ay
    # tolerance scaled to edge length so on-edge vertices survive verbatim
    eps = 1e-12 * max(abs(ex), abs(ey), 1.0)

    out: list = []
    prev = subject[-1]
    prev_side = ex * (prev[1] - ay) - ey * (prev[0] - ax)
    for cur in subject:
        cur_side = ex * (cur[1] - ay) - ey * (cur[0] - ax)
        if cur_side >= -eps:
            if prev_side < -eps:
                t = prev_side / (prev_side - cur_side)
                out.append(
                    (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
                )
            out.append(cur)
        elif prev_side >= -eps:
            t = prev_side / (prev_side - cur_side)
            out.append(
                (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
            )
        prev, prev_side = cur, cur_side
    return out


def intersect(a: ForPolygon, b: ForPolygon) -> ForPolygon | None:
    """Convex intersection via successive half-plane clipping; None if empty."""
    subject = list(a.vertices)
    clip = list(b.vertices)
    for i in range(len(clip)):
        subject = _clip_halfplane(subject, clip[i], clip[(i + 1) % len(clip)])
        if not subject:
            return None

    # collapse numerically repeated vertices left behind by clipping
    cleaned: list = []
    for p in subject:
        if not cleaned or (
            abs(p[0] - cleaned[-1][0]) > 1e-12 or abs(p[1] - cleaned[-1][1]) > 1e-12
        ):
            cleaned.append(p)
    if len(cleaned) >= 2 and (
        abs(cleaned[0][0] - cleaned[-1][0]) <= 1e-12
        and abs(cleaned[0][1] - cleaned[-1][1]) <= 1e-12
    ):
        cleaned.pop()
    if len(cleaned) < 3:
        return None
    poly = ForPolygon(vertices=tuple(cleaned))
    if area(poly) <= 0.0:
        return None
    return poly


def jaccard(a: ForPolygon, b: ForPolygon) -> float:
    """Intersection over union of two convex regions, in [0, 1]."""
    area_a, area_b = area(a), area(b)
    inter = area(intersect(a, b))
    union = area_a + area_b - inter
    if union <= 0.0:
        raise DegenerateRegionError("both regions are degenerate")
    return inter / union
