"""Exact and approximate 2D primitives for tabletop spatial reasoning.

Conventions used everywhere in this package:

* the canonical frame has its origin at the table's front-left corner with
  +y pointing toward the back of the table (the target side);
* angles are measured from the +y axis, positive toward +x, wrapped to
  (-pi, pi], so "straight ahead" is 0;
* areas of region/occupancy overlap are estimated with evenly spaced
  sampling lines rather than exact polygon clipping (speed over exactness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CoincidentPoints, InvalidInterval


@dataclass(frozen=True)
class Point2:
    """A finite point, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def translated(self, dx: float, dy: float) -> "Point2":
        return Point2(self.x + dx, self.y + dy)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by center and strictly positive half extents."""

    center: Point2
    half_w: float
    half_h: float

    def __post_init__(self):
        if not (self.half_w > 0 and self.half_h > 0):
            raise ValueError(f"non-positive half extents ({self.half_w}, {self.half_h})")

    @property
    def x_lo(self) -> float:
        return self.center.x - self.half_w

    @property
    def x_hi(self) -> float:
        return self.center.x + self.half_w

    @property
    def y_lo(self) -> float:
        return self.center.y - self.half_h

    @property
    def y_hi(self) -> float:
        return self.center.y + self.half_h

    @property
    def width(self) -> float:
        return 2.0 * self.half_w

    @property
    def height(self) -> float:
        return 2.0 * self.half_h

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return 2.0 * math.hypot(self.half_w, self.half_h)

    def contains(self, p: Point2, eps: float = 0.0) -> bool:
        return (self.x_lo - eps <= p.x <= self.x_hi + eps
                and self.y_lo - eps <= p.y <= self.y_hi + eps)

    def intersects(self, other: "Rect") -> bool:
        return (self.x_lo < other.x_hi and other.x_lo < self.x_hi
                and self.y_lo < other.y_hi and other.y_lo < self.y_hi)

    def overlap_area(self, other: "Rect") -> float:
        w = overlap_1d(self.x_lo, self.x_hi, other.x_lo, other.x_hi)
        h = overlap_1d(self.y_lo, self.y_hi, other.y_lo, other.y_hi)
        return w * h

    def contains_rect(self, other: "Rect", eps: float = 0.0) -> bool:
        return (self.x_lo - eps <= other.x_lo and other.x_hi <= self.x_hi + eps
                and self.y_lo - eps <= other.y_lo and other.y_hi <= self.y_hi + eps)

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(self.center.translated(dx, dy), self.half_w, self.half_h)

    def moved_to(self, center: Point2) -> "Rect":
        return Rect(center, self.half_w, self.half_h)

    @staticmethod
    def from_bounds(x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> "Rect":
        return Rect(Point2((x_lo + x_hi) / 2.0, (y_lo + y_hi) / 2.0),
                    (x_hi - x_lo) / 2.0, (y_hi - y_lo) / 2.0)


@dataclass(frozen=True)
class LineSeg:
    """Directed segment with distinct endpoints."""

    a: Point2
    b: Point2

    def __post_init__(self):
        if self.a.x == self.b.x and self.a.y == self.b.y:
            raise ValueError("degenerate segment (a == b)")

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)


def dist(p: Point2, q: Point2) -> float:
    """Euclidean distance between two points."""
    return math.hypot(q.x - p.x, q.y - p.y)


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def orientation(frm: Point2, to: Point2) -> float:
    """Angle of the (frm -> to) direction measured from the +y axis.

    Positive toward +x, result in (-pi, pi]. Raises CoincidentPoints for
    identical endpoints.
    """
    dx = to.x - frm.x
    dy = to.y - frm.y
    if dx == 0.0 and dy == 0.0:
        raise CoincidentPoints(f"orientation undefined for coincident points ({frm.x}, {frm.y})")
    return wrap_angle(math.atan2(dx, dy))


def overlap_1d(a_lo: float, a_hi: float, b_lo: float, b_hi: float) -> float:
    """Length of the intersection of [a_lo, a_hi] and [b_lo, b_hi]."""
    if a_lo > a_hi or b_lo > b_hi:
        raise InvalidInterval(f"interval lo > hi: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")
    return max(0.0, min(a_hi, b_hi) - max(a_lo, b_lo))


def seg_rect_clip(s: LineSeg, r: Rect) -> float:
    """Length of the part of segment s inside rectangle r.

    Parametric slab clipping: intersect the parameter intervals where the
    segment is inside the x-slab and the y-slab of the rectangle.
    """
    dx = s.b.x - s.a.x
    dy = s.b.y - s.a.y
    t_lo, t_hi = 0.0, 1.0
    for origin, delta, lo, hi in ((s.a.x, dx, r.x_lo, r.x_hi), (s.a.y, dy, r.y_lo, r.y_hi)):
        if delta == 0.0:
            if origin < lo or origin > hi:
                return 0.0
            continue
        t0 = (lo - origin) / delta
        t1 = (hi - origin) / delta
        if t0 > t1:
            t0, t1 = t1, t0
        t_lo = max(t_lo, t0)
        t_hi = min(t_hi, t1)
        if t_lo >= t_hi:
            return 0.0
    return (t_hi - t_lo) * s.length


def _union_lengths(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Per-row total length of the union of intervals.

    lo/hi have shape (n_lines, n_intervals); empty intervals must be encoded
    with lo == hi (any finite value).
    """
    order = np.argsort(lo, axis=1)
    lo_s = np.take_along_axis(lo, order, axis=1)
    hi_s = np.take_along_axis(hi, order, axis=1)
    cummax = np.maximum.accumulate(hi_s, axis=1)
    prev = np.empty_like(cummax)
    prev[:, 0] = -np.inf
    prev[:, 1:] = cummax[:, :-1]
    contrib = np.clip(hi_s - np.maximum(lo_s, prev), 0.0, None)
    return contrib.sum(axis=1)


def _scanline_overlap(y_lo: float, y_hi: float, span_lo: np.ndarray, span_hi: np.ndarray,
                      occupied: Sequence[Rect], n_lines: int, ys: np.ndarray) -> float:
    """Shared scanline estimator.

    ys are the midpoint scanline ordinates; span_lo/span_hi give the region's
    x interval on each line (span_lo > span_hi marks an empty line). Returns
    sum over lines of (union of occupied x-intervals clipped to the span)
    times the line spacing.
    """
    spacing = (y_hi - y_lo) / n_lines
    valid = span_lo <= span_hi
    if not valid.any() or not occupied:
        return 0.0
    r_xlo = np.array([r.x_lo for r in occupied])
    r_xhi = np.array([r.x_hi for r in occupied])
    r_ylo = np.array([r.y_lo for r in occupied])
    r_yhi = np.array([r.y_hi for r in occupied])
    active = (r_ylo[None, :] <= ys[:, None]) & (ys[:, None] <= r_yhi[None, :]) & valid[:, None]
    lo = np.maximum(r_xlo[None, :], span_lo[:, None])
    hi = np.minimum(r_xhi[None, :], span_hi[:, None])
    empty = ~active | (lo > hi)
    lo = np.where(empty, 0.0, lo)
    hi = np.where(empty, 0.0, hi)
    lengths = _union_lengths(lo, hi)
    return float(lengths.sum() * spacing)


def sampled_overlap_area(region: Rect, occupied: Iterable[Rect], n_lines: int = 64) -> float:
    """Approximate area of region intersected with the union of occupied rects.

    Evenly spaced horizontal sampling lines: each contributes the union
    length of its clipped occupied intervals times the line spacing. The
    result is clamped to [0, area(region)] and is monotone non-decreasing in
    the occupied set.
    """
    if n_lines < 2:
        raise ValueError("n_lines must be >= 2")
    occupied = [r for r in occupied if r.intersects(region)]
    if not occupied:
        return 0.0
    ys = region.y_lo + (np.arange(n_lines) + 0.5) * (region.height / n_lines)
    span_lo = np.full(n_lines, region.x_lo)
    span_hi = np.full(n_lines, region.x_hi)
    area = _scanline_overlap(region.y_lo, region.y_hi, span_lo, span_hi, occupied, n_lines, ys)
    return min(area, region.area)


def convex_hull(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Convex hull (counter-clockwise, Andrew's monotone chain) of a small point set.

    Collinear points are dropped; returns fewer than 3 points for degenerate
    input.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def polygon_area(poly: Sequence[tuple[float, float]]) -> float:
    """Shoelace area of a simple polygon (absolute value)."""
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for (x0, y0), (x1, y1) in zip(poly, list(poly[1:]) + [poly[0]]):
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def sampled_polygon_overlap_area(poly: Sequence[tuple[float, float]], occupied: Iterable[Rect],
                                 n_lines: int = 64) -> float:
    """Scanline overlap estimate between a convex polygon and occupied rects.

    The scan axis is chosen perpendicular to the polygon's longer bounding
    extent (lines across the dominant direction). Degenerate polygons
    (fewer than 3 hull points) have zero area.
    """
    if n_lines < 2:
        raise ValueError("n_lines must be >= 2")
    hull = convex_hull([(float(x), float(y)) for x, y in poly])
    if len(hull) < 3:
        return 0.0
    xs = [p[0] for p in hull]
    ys_h = [p[1] for p in hull]
    flip = (max(xs) - min(xs)) > (max(ys_h) - min(ys_h))
    occupied = list(occupied)
    if flip:
        hull = [(y, x) for x, y in hull]
        occupied = [Rect(Point2(r.center.y, r.center.x), r.half_h, r.half_w) for r in occupied]
    y_lo = min(p[1] for p in hull)
    y_hi = max(p[1] for p in hull)
    if y_hi <= y_lo:
        return 0.0
    if not occupied:
        return 0.0
    n_pts = len(hull)
    ys = y_lo + (np.arange(n_lines) + 0.5) * ((y_hi - y_lo) / n_lines)
    span_lo = np.full(n_lines, np.inf)
    span_hi = np.full(n_lines, -np.inf)
    for i in range(n_pts):
        (px, py) = hull[i]
        (qx, qy) = hull[(i + 1) % n_pts]
        if py == qy:
            continue
        lo, hi = (py, qy) if py < qy else (qy, py)
        mask = (ys >= lo) & (ys < hi)
        if not mask.any():
            continue
        t = (ys[mask] - py) / (qy - py)
        x = px + t * (qx - px)
        span_lo[mask] = np.minimum(span_lo[mask], x)
        span_hi[mask] = np.maximum(span_hi[mask], x)
    area = _scanline_overlap(y_lo, y_hi, span_lo, span_hi, occupied, n_lines, ys)
    return min(area, polygon_area(hull))


def swept_segment_overlap(seg_start: LineSeg, seg_end: LineSeg, occupied: Iterable[Rect],
                          n_lines: int = 64) -> float:
    """Overlap area between a moving segment's swept region and occupied rects.

    The swept region is the convex hull of the segment's endpoints at the
    two poses (an over-approximation of linear interpolation).
    """
    pts = [(seg_start.a.x, seg_start.a.y), (seg_start.b.x, seg_start.b.y),
           (seg_end.a.x, seg_end.a.y), (seg_end.b.x, seg_end.b.y)]
    return sampled_polygon_overlap_area(pts, occupied, n_lines)


def swept_chain_overlap(chain_start: Sequence[Point2], chain_end: Sequence[Point2],
                        occupied: Sequence[Rect], n_lines: int = 64) -> float:
    """Summed swept overlap of each link of a joint chain moving between two poses.

    The chains list joint positions (e.g. shoulder, elbow, hand); link i runs
    from chain[i] to chain[i+1]. Links that are degenerate at both poses
    contribute nothing.
    """
    if len(chain_start) != len(chain_end):
        raise ValueError("chains must have the same number of joints")
    occupied = list(occupied)
    total = 0.0
    for i in range(len(chain_start) - 1):
        pts = [(chain_start[i].x, chain_start[i].y),
               (chain_start[i + 1].x, chain_start[i + 1].y),
               (chain_end[i].x, chain_end[i].y),
               (chain_end[i + 1].x, chain_end[i + 1].y)]
        total += sampled_polygon_overlap_area(pts, occupied, n_lines)
    return total
