"""Rotated-box overlap: BEV polygon clipping, BEV IoU and 3D IoU.

The 3D IoU treats boxes as upright prisms (yaw only), so the volume
intersection factorizes into BEV footprint intersection times vertical
overlap. Boundary contact counts as zero-area intersection (tolerance
1e-9 m).
"""
from __future__ import annotations

from .core import Box3D, bev_corners

_EPS = 1e-9

Point = tuple[float, float]


def polygon_area(vertices: list[Point]) -> float:
    """Signed shoelace area; positive for counter-clockwise order."""
    n = len(vertices)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def _clip_against_edge(polygon: list[Point], a: Point, b: Point) -> list[Point]:
    """Sutherland-Hodgman: keep the part of polygon left of edge a->b."""
    ex, ey = b[0] - a[0], b[1] - a[1]

    def side(p: Point) -> float:
        return ex * (p[1] - a[1]) - ey * (p[0] - a[0])

    out: list[Point] = []
    n = len(polygon)
    for i in range(n):
        cur, nxt = polygon[i], polygon[(i + 1) % n]
        s_cur, s_nxt = side(cur), side(nxt)
        if s_cur >= -_EPS:
            out.append(cur)
            if s_nxt < -_EPS:
                t = s_cur / (s_cur - s_nxt)
                out.append((cur[0] + t * (nxt[0] - cur[0]),
                            cur[1] + t * (nxt[1] - cur[1])))
        elif s_nxt > _EPS:
            t = s_cur / (s_cur - s_nxt)
            out.append((cur[0] + t * (nxt[0] - cur[0]),
                        cur[1] + t * (nxt[1] - cur[1])))
    return out


def convex_intersection_area(a: list[Point], b: list[Point]) -> float:
    """Area of the intersection of two convex CCW polygons, in m^2."""
    if len(a) < 3 or len(b) < 3:
        return 0.0
    clipped = list(a)
    n = len(b)
    for i in range(n):
        clipped = _clip_against_edge(clipped, b[i], b[(i + 1) % n])
        if len(clipped) < 3:
            return 0.0
    area = polygon_area(clipped)
    return area if area > _EPS else 0.0


def iou_bev(a: Box3D, b: Box3D) -> float:
    """IoU of the ground-plane footprints of two boxes."""
    inter = convex_intersection_area(bev_corners(a), bev_corners(b))
    if inter <= 0.0:
        return 0.0
    area_a = a.length * a.width
    area_b = b.length * b.width
    union = area_a + area_b - inter
    return inter / union


def iou_3d(a: Box3D, b: Box3D) -> float:
    """3D IoU of two upright boxes: BEV intersection x vertical overlap."""
    z_overlap = min(a.z_max, b.z_max) - max(a.z_min, b.z_min)
    if z_overlap <= _EPS:
        return 0.0
    inter_bev = convex_intersection_area(bev_corners(a), bev_corners(b))
    if inter_bev <= 0.0:
        return 0.0
    inter = inter_bev * z_overlap
    union = a.volume + b.volume - inter
    return inter / union
