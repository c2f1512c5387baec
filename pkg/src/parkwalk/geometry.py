"""Planar polygon geometry: shoelace areas, convex hulls and convex clipping.

All coordinates are planar meters. Polygons are stored as ``(n, 2)`` float
arrays, counter-clockwise, without a repeated closing vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateGeometryError

MERGE_TOL = 1e-9


def _as_ring(vertices) -> np.ndarray:
    ring = np.asarray(vertices, dtype=float)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise DegenerateGeometryError(f"expected (n, 2) vertex array, got shape {ring.shape}")
    if not np.all(np.isfinite(ring)):
        raise DegenerateGeometryError("non-finite vertex coordinate")
    return ring


def _dedupe(ring: np.ndarray) -> np.ndarray:
    """Drop consecutive vertices closer than MERGE_TOL, including the closing one."""
    if len(ring) == 0:
        return ring
    keep = [ring[0]]
    for p in ring[1:]:
        if np.hypot(*(p - keep[-1])) > MERGE_TOL:
            keep.append(p)
    while len(keep) > 1 and np.hypot(*(keep[-1] - keep[0])) <= MERGE_TOL:
        keep.pop()
    return np.array(keep)


def signed_area(ring: np.ndarray) -> float:
    if len(ring) < 3:
        return 0.0
    x, y = ring[:, 0], ring[:, 1]
    # shift to the first vertex to limit cancellation on large projected coordinates
    x = x - x[0]
    y = y - y[0]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, counter-clockwise, at least three vertices and nonzero area."""

    vertices: np.ndarray

    def __post_init__(self):
        ring = _dedupe(_as_ring(self.vertices))
        if len(ring) < 3:
            raise DegenerateGeometryError("polygon needs at least 3 distinct vertices")
        a = signed_area(ring)
        if abs(a) <= MERGE_TOL * MERGE_TOL:
            raise DegenerateGeometryError("polygon has zero area")
        if a < 0:
            ring = ring[::-1]
        ring = np.ascontiguousarray(ring)
        ring.setflags(write=False)
        object.__setattr__(self, "vertices", ring)

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def translated(self, dx: float, dy: float) -> "Polygon":
        return type(self)(self.vertices + np.array([dx, dy]))

    def wkt(self) -> str:
        ring = list(self.vertices) + [self.vertices[0]]
        return "POLYGON ((" + ", ".join(f"{float(x)!r} {float(y)!r}" for x, y in ring) + "))"


class ConvexPolygon(Polygon):
    """Polygon whose vertices are all strictly convex (no reflex or collinear corners)."""

    def __post_init__(self):
        super().__post_init__()
        v = self.vertices
        e1 = np.roll(v, -1, axis=0) - v
        e2 = np.roll(v, -2, axis=0) - np.roll(v, -1, axis=0)
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        scale = np.abs(e1).max() * np.abs(e2).max()
        if np.any(cross < -1e-12 * max(scale, 1.0)):
            raise DegenerateGeometryError("polygon is not convex")


@dataclass(frozen=True)
class Region:
    """Multi-part area with holes: the shape of a census tract.

    ``parts`` is a sequence of ``(outer, holes)`` pairs.
    """

    parts: tuple = field(default_factory=tuple)

    @classmethod
    def from_polygon(cls, poly: Polygon) -> "Region":
        return cls(((poly, ()),))

    @property
    def area(self) -> float:
        return sum(outer.area - sum(h.area for h in holes) for outer, holes in self.parts)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        b = np.array([outer.bounds for outer, _ in self.parts])
        return float(b[:, 0].min()), float(b[:, 1].min()), float(b[:, 2].max()), float(b[:, 3].max())

    def rings(self) -> Iterable[tuple[Polygon, int]]:
        for outer, holes in self.parts:
            yield outer, 1
            for h in holes:
                yield h, -1


def polygon_area(poly) -> float:
    """Shoelace area of a polygon (or raw vertex array) in square meters.

    >>> polygon_area([(0, 0), (4, 0), (0, 3)])
    6.0
    """
    if not isinstance(poly, Polygon):
        poly = Polygon(poly)
    return poly.area


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain; returns the hull counter-clockwise without collinear vertices."""
    pts = _as_ring(points)
    if len(pts) < 3:
        raise DegenerateGeometryError("convex hull needs at least 3 points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    uniq = [pts[0]]
    for p in pts[1:]:
        if np.hypot(*(p - uniq[-1])) > MERGE_TOL:
            uniq.append(p)
    if len(uniq) < 3:
        raise DegenerateGeometryError("convex hull needs at least 3 distinct points")
    span = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0)
    eps = 1e-12 * span * span

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps:
                out.pop()
            out.append(p)
        return out

    lower = chain(uniq)
    upper = chain(reversed(uniq))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateGeometryError("points are collinear")
    return ConvexPolygon(np.array(hull))


def _clip_ring(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman: clip ``subject`` against each edge of the CCW convex ``clip``."""
    out = subject
    m = len(clip)
    for k in range(m):
        if len(out) == 0:
            break
        a = clip[k]
        b = clip[(k + 1) % m]
        ex, ey = b[0] - a[0], b[1] - a[1]
        # side > 0: left of edge (inside for CCW clip)
        side = ex * (out[:, 1] - a[1]) - ey * (out[:, 0] - a[0])
        inside = side >= 0
        if inside.all():
            continue
        if not inside.any():
            return out[:0]
        res = []
        n = len(out)
        for i in range(n):
            j = (i + 1) % n
            p, q = out[i], out[j]
            sp, sq = side[i], side[j]
            if inside[i]:
                res.append(p)
                if not inside[j]:
                    t = sp / (sp - sq)
                    res.append(p + t * (q - p))
            elif inside[j]:
                t = sp / (sp - sq)
                res.append(p + t * (q - p))
        out = np.array(res) if res else out[:0]
    return out


def _boxes_overlap(a, b) -> bool:
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


def clip_to_convex(subject, clip: ConvexPolygon) -> tuple[float, np.ndarray | None]:
    """Intersect a simple polygon (or a :class:`Region`) with a convex polygon.

    Returns ``(area, ring)``. ``ring`` is the clipped vertex array for a plain
    polygon subject, ``None`` when the intersection is empty or the subject
    is a multi-ring region (only the area is meaningful there).
    """
    if not isinstance(clip, ConvexPolygon):
        clip = ConvexPolygon(clip)
    if isinstance(subject, Region):
        if not _boxes_overlap(subject.bounds, clip.bounds):
            return 0.0, None
        total = 0.0
        for ring, sign in subject.rings():
            total += sign * clip_to_convex(ring, clip)[0]
        return max(total, 0.0), None
    if not isinstance(subject, Polygon):
        subject = Polygon(subject)
    if not _boxes_overlap(subject.bounds, clip.bounds):
        return 0.0, None
    # work relative to a local origin so areas stay accurate at large easting/northing
    origin = clip.vertices[0]
    ring = _clip_ring(subject.vertices - origin, clip.vertices - origin)
    if len(ring) < 3:
        return 0.0, None
    area = signed_area(ring)
    if area <= 0.0:
        return 0.0, None
    return area, ring + origin


def point_in_polygon(points, poly: Polygon) -> np.ndarray:
    """Even-odd rule; points exactly on an edge may fall either way."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = poly.vertices
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x1, y1 = v[:, 0][None, :], v[:, 1][None, :]
    x2, y2 = np.roll(v[:, 0], -1)[None, :], np.roll(v[:, 1], -1)[None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    hits = straddle & (x < xcross)
    return (hits.sum(axis=1) % 2) == 1


def distance_to_boundary(points, poly: Polygon) -> np.ndarray:
    """Euclidean distance from each point to the nearest polygon edge."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = poly.vertices
    b = np.roll(a, -1, axis=0)
    ab = b - a
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab).sum(-1) / (ab * ab).sum(-1), 0.0, 1.0)
    closest = a[None] + t[..., None] * ab[None]
    return np.sqrt(((pts[:, None, :] - closest) ** 2).sum(-1)).min(axis=1)


def hull_contains(hull: ConvexPolygon, points, tol: float = 1e-7) -> np.ndarray:
    """Inside-or-on test for a convex CCW polygon with a small absolute tolerance."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = hull.vertices
    b = np.roll(a, -1, axis=0)
    e = b - a
    rel = pts[:, None, :] - a[None]
    side = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
    lens = np.hypot(e[:, 0], e[:, 1])
    return np.all(side >= -tol * lens[None], axis=1)


__all__: Sequence[str] = [
    "Polygon",
    "ConvexPolygon",
    "Region",
    "polygon_area",
    "convex_hull",
    "clip_to_convex",
    "point_in_polygon",
    "distance_to_boundary",
    "hull_contains",
]
