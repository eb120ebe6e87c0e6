"""Scene representation and its qualitative decomposition.

A scene is a start position on the front table edge, a target object at the
back, and movable obstacles in between. The decomposition clusters obstacles
into rows (y bands), extracts the free gaps of each row (including the
wall-adjacent ones), and discretizes the neighborhood of each object into
eight direction blocks whose free areas measure local clutter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    DegenerateRows,
    OutOfBoundsError,
    OverlapError,
    SchemaError,
)
from .geometry import Point2, Rect, sampled_overlap_area

WALL_THICKNESS = 0.05
START_EDGE_BAND_FRACTION = 0.15  # start must sit within this fraction of depth from the front edge

# Canonical order of the eight direction classes around an object. FF points
# toward the target side (+y); LL is toward -x.
DIRECTIONS: tuple[str, ...] = ("FF", "FL", "LL", "BL", "BB", "BR", "RR", "FR")

_SQ = math.sqrt(0.5)
DIRECTION_VECTORS: dict[str, tuple[float, float]] = {
    "FF": (0.0, 1.0),
    "FL": (-_SQ, _SQ),
    "LL": (-1.0, 0.0),
    "BL": (-_SQ, -_SQ),
    "BB": (0.0, -1.0),
    "BR": (_SQ, -_SQ),
    "RR": (1.0, 0.0),
    "FR": (_SQ, _SQ),
}

# Octant order by angle from +y (0, pi/4, ... in steps of 45 degrees).
_OCTANTS = ("FF", "FR", "RR", "BR", "BB", "BL", "LL", "FL")

SHAPES = ("box", "cylinder")

WALL_IDS = ("wall_left", "wall_right", "wall_top", "wall_bottom")


def quantize_direction(dx: float, dy: float, half_w: float = 1.0, half_h: float = 1.0) -> str:
    """Quantize a displacement into one of the eight direction classes.

    When half extents are given the displacement is normalized per axis
    first, so the center of every direction block of the matching object
    quantizes back to its own direction regardless of aspect ratio.
    """
    nx = dx / half_w
    ny = dy / half_h
    if nx == 0.0 and ny == 0.0:
        return "FF"
    ang = math.atan2(nx, ny)  # from +y, positive toward +x
    k = int(round(ang / (math.pi / 4.0))) % 8
    return _OCTANTS[k]


@dataclass(frozen=True)
class SceneObject:
    """A tabletop object with an axis-aligned footprint.

    Cylinders are represented by the bounding square of their disc.
    """

    id: str
    footprint: Rect
    shape: str = "box"
    movable: bool = True

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise SchemaError(f"unknown shape {self.shape!r} for object {self.id!r}")

    @property
    def position(self) -> Point2:
        return self.footprint.center

    def moved_to(self, center: Point2) -> "SceneObject":
        return SceneObject(self.id, self.footprint.moved_to(center), self.shape, self.movable)


@dataclass(frozen=True)
class Walls:
    """Four synthetic wall rects flush with the table edges.

    The side walls take the corners so the four rects are pairwise disjoint.
    """

    left: Rect
    right: Rect
    top: Rect
    bottom: Rect

    @property
    def rects(self) -> tuple[Rect, Rect, Rect, Rect]:
        return (self.left, self.right, self.top, self.bottom)

    @staticmethod
    def around(table: Rect, thickness: float = WALL_THICKNESS) -> "Walls":
        t = thickness
        return Walls(
            left=Rect.from_bounds(table.x_lo - t, table.x_lo, table.y_lo - t, table.y_hi + t),
            right=Rect.from_bounds(table.x_hi, table.x_hi + t, table.y_lo - t, table.y_hi + t),
            top=Rect.from_bounds(table.x_lo, table.x_hi, table.y_hi, table.y_hi + t),
            bottom=Rect.from_bounds(table.x_lo, table.x_hi, table.y_lo - t, table.y_lo),
        )


@dataclass(frozen=True)
class Scene:
    start: Point2
    target: SceneObject
    objects: tuple[SceneObject, ...]
    table: Rect

    @property
    def walls(self) -> Walls:
        return Walls.around(self.table)

    def object_by_id(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)

    def with_object_moved(self, object_id: str, center: Point2) -> "Scene":
        objs = tuple(o.moved_to(center) if o.id == object_id else o for o in self.objects)
        return Scene(self.start, self.target, objs, self.table)


def occupied_space(scene: Scene) -> list[Rect]:
    """Occupied space: the N obstacle footprints plus the four walls."""
    return [o.footprint for o in scene.objects] + list(scene.walls.rects)


def placement_space(scene: Scene, exclude: str | None = None) -> list[Rect]:
    """Occupancy for placement queries: obstacles, walls, and the target.

    ``exclude`` drops one object (typically the one being placed).
    """
    rects = [o.footprint for o in scene.objects if o.id != exclude]
    rects.append(scene.target.footprint)
    rects.extend(scene.walls.rects)
    return rects


def collision_space(scene: Scene) -> list[Rect]:
    """Occupancy for arm-collision scoring: obstacle footprints only.

    Walls are excluded (the arm anchor is below the front edge, so every
    sweep crosses the front wall band) and so is the target (reaching it is
    the point).
    """
    return [o.footprint for o in scene.objects]


# ---------------------------------------------------------------------------
# Scene document schema


def _require(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def _as_point(value, what: str) -> Point2:
    _require(isinstance(value, (list, tuple)) and len(value) == 2, f"{what} must be [x, y]")
    x, y = value
    _require(isinstance(x, (int, float)) and isinstance(y, (int, float)),
             f"{what} coordinates must be numbers")
    return Point2(float(x), float(y))


def _as_rect(entry: Mapping, what: str) -> Rect:
    for key in ("pos", "half_w", "half_h"):
        _require(key in entry, f"{what} missing key {key!r}")
    center = _as_point(entry["pos"], f"{what}.pos")
    hw, hh = entry["half_w"], entry["half_h"]
    _require(isinstance(hw, (int, float)) and isinstance(hh, (int, float)),
             f"{what} half extents must be numbers")
    _require(hw > 0 and hh > 0, f"{what} half extents must be positive")
    return Rect(center, float(hw), float(hh))


def load_scene(document: Mapping) -> Scene:
    """Validate a scene document and build the Scene.

    Raises SchemaError for malformed documents, OutOfBoundsError for
    geometry outside the table, OverlapError for intersecting footprints.
    """
    _require(isinstance(document, Mapping), "scene document must be an object")
    expected = {"table", "start", "target", "objects"}
    _require(set(document.keys()) == expected,
             f"scene document keys must be exactly {sorted(expected)}")
    table_doc = document["table"]
    _require(isinstance(table_doc, Mapping) and set(table_doc.keys()) == {"w", "h"},
             "table must be {w, h}")
    w, h = table_doc["w"], table_doc["h"]
    _require(isinstance(w, (int, float)) and isinstance(h, (int, float)) and w > 0 and h > 0,
             "table dimensions must be positive numbers")
    table = Rect.from_bounds(0.0, float(w), 0.0, float(h))

    start = _as_point(document["start"], "start")
    target_doc = document["target"]
    _require(isinstance(target_doc, Mapping) and set(target_doc.keys()) == {"pos", "half_w", "half_h"},
             "target must be {pos, half_w, half_h}")
    target = SceneObject("target", _as_rect(target_doc, "target"), "box", True)

    objects_doc = document["objects"]
    _require(isinstance(objects_doc, list), "objects must be a list")
    objects = []
    for i, entry in enumerate(objects_doc):
        what = f"objects[{i}]"
        _require(isinstance(entry, Mapping), f"{what} must be an object")
        _require(set(entry.keys()) == {"id", "pos", "half_w", "half_h", "shape"},
                 f"{what} keys must be id, pos, half_w, half_h, shape")
        _require(isinstance(entry["id"], str) and entry["id"], f"{what}.id must be a non-empty string")
        _require(entry["shape"] in SHAPES, f"{what}.shape must be one of {SHAPES}")
        objects.append(SceneObject(entry["id"], _as_rect(entry, what), entry["shape"], True))

    ids = [o.id for o in objects]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate object ids")
    if "target" in ids:
        raise SchemaError("object id 'target' is reserved")

    if not (table.x_lo <= start.x <= table.x_hi):
        raise OutOfBoundsError("start x outside the table")
    if not (table.y_lo <= start.y <= table.y_lo + START_EDGE_BAND_FRACTION * table.height):
        raise OutOfBoundsError("start must lie in the front table edge band")
    for obj in objects + [target]:
        if not table.contains_rect(obj.footprint, eps=1e-12):
            raise OutOfBoundsError(f"object {obj.id!r} footprint outside the table")
    everything = objects + [target]
    for i in range(len(everything)):
        for j in range(i + 1, len(everything)):
            if everything[i].footprint.intersects(everything[j].footprint):
                raise OverlapError(
                    f"footprints of {everything[i].id!r} and {everything[j].id!r} overlap")

    return Scene(start, target, tuple(objects), table)


def serialize_scene(scene: Scene) -> dict:
    """Scene document for JSON output; load_scene round-trips it bit-exactly."""
    return {
        "table": {"w": scene.table.width, "h": scene.table.height},
        "start": [scene.start.x, scene.start.y],
        "target": {
            "pos": [scene.target.position.x, scene.target.position.y],
            "half_w": scene.target.footprint.half_w,
            "half_h": scene.target.footprint.half_h,
        },
        "objects": [
            {
                "id": o.id,
                "pos": [o.position.x, o.position.y],
                "half_w": o.footprint.half_w,
                "half_h": o.footprint.half_h,
                "shape": o.shape,
            }
            for o in scene.objects
        ],
    }


def scene_to_json(scene: Scene) -> str:
    return json.dumps(serialize_scene(scene), sort_keys=True, indent=2) + "\n"


def scene_from_json(text: str) -> Scene:
    return load_scene(json.loads(text))


# ---------------------------------------------------------------------------
# Rows and gaps


@dataclass(frozen=True)
class Row:
    """A y-band cluster of obstacles, ordered front to back."""

    index: int
    member_ids: tuple[str, ...]  # ordered by center x
    y_band: tuple[float, float]

    @property
    def depth(self) -> float:
        return self.y_band[1] - self.y_band[0]

    @property
    def center_y(self) -> float:
        return (self.y_band[0] + self.y_band[1]) / 2.0


@dataclass(frozen=True)
class Gap:
    """A maximal free x-interval of a row."""

    id: str
    row_index: int
    left_neighbor: str  # object id or wall id
    right_neighbor: str
    center: Point2
    width: float
    diagonal: float

    @property
    def x_lo(self) -> float:
        return self.center.x - self.width / 2.0

    @property
    def x_hi(self) -> float:
        return self.center.x + self.width / 2.0


def detect_rows(scene: Scene, row_gap_factor: float = 1.5, band_factor: float = 2.0) -> list[Row]:
    """Cluster obstacles into rows via 1D single-linkage on center y.

    The linkage threshold is row_gap_factor times the median object depth;
    DegenerateRows is raised when a cluster's centers span more than
    band_factor times the median depth.
    """
    if not scene.objects:
        return []
    med_depth = _median([o.footprint.height for o in scene.objects])
    tau_row = row_gap_factor * med_depth
    tau_band = band_factor * med_depth
    ordered = sorted(scene.objects, key=lambda o: (o.position.y, o.id))
    clusters: list[list[SceneObject]] = [[ordered[0]]]
    for obj in ordered[1:]:
        if obj.position.y - clusters[-1][-1].position.y > tau_row:
            clusters.append([obj])
        else:
            clusters[-1].append(obj)
    rows = []
    for idx, members in enumerate(clusters):
        span = members[-1].position.y - members[0].position.y
        if span > tau_band:
            raise DegenerateRows(
                f"row {idx} center span {span:.3f} m exceeds band {tau_band:.3f} m")
        lo = min(o.footprint.y_lo for o in members)
        hi = max(o.footprint.y_hi for o in members)
        ordered_x = tuple(o.id for o in sorted(members, key=lambda o: (o.position.x, o.id)))
        rows.append(Row(idx, ordered_x, (lo, hi)))
    return rows


def _median(values: Sequence[float]) -> float:
    s = sorted(values)
    n = len(s)
    mid = n // 2
    return s[mid] if n % 2 else (s[mid - 1] + s[mid]) / 2.0


def extract_gaps(scene: Scene, rows: Sequence[Row], min_width: float = 1e-9) -> list[Gap]:
    """Free x-intervals per row, between members and out to the side walls."""
    gaps: list[Gap] = []
    for row in rows:
        members = [scene.object_by_id(oid) for oid in row.member_ids]
        depth = row.depth
        y_mid = row.center_y
        # Merge x-extents in case staggered members overlap in x.
        intervals: list[tuple[float, float, str, str]] = []  # lo, hi, first id, last id
        for o in sorted(members, key=lambda o: o.footprint.x_lo):
            lo, hi = o.footprint.x_lo, o.footprint.x_hi
            if intervals and lo <= intervals[-1][1]:
                plo, phi, first, _ = intervals[-1]
                intervals[-1] = (plo, max(phi, hi), first, o.id)
            else:
                intervals.append((lo, hi, o.id, o.id))
        bounds = [(scene.table.x_lo, "wall_left")]
        for lo, hi, first, last in intervals:
            bounds.append((lo, first))
            bounds.append((hi, last))
        bounds.append((scene.table.x_hi, "wall_right"))
        k = 0
        for i in range(0, len(bounds), 2):
            lo_x, lo_id = bounds[i]
            hi_x, hi_id = bounds[i + 1]
            width = hi_x - lo_x
            if width <= min_width:
                continue
            gaps.append(Gap(
                id=f"r{row.index}_g{k}",
                row_index=row.index,
                left_neighbor=lo_id,
                right_neighbor=hi_id,
                center=Point2((lo_x + hi_x) / 2.0, y_mid),
                width=width,
                diagonal=math.hypot(width, depth),
            ))
            k += 1
    return gaps


# ---------------------------------------------------------------------------
# Direction blocks


@dataclass(frozen=True)
class DirectionBlocks:
    """Eight blocks tiling the ring around an object footprint.

    ``blocks`` holds the nominal rects (they may stick out past the table);
    ``free_area`` counts only on-table free space inside each block.
    """

    object_id: str
    alpha: float
    blocks: Mapping[str, Rect]
    free_area: Mapping[str, float]

    @property
    def total_free_area(self) -> float:
        return sum(self.free_area[d] for d in DIRECTIONS)

    @property
    def total_block_area(self) -> float:
        return sum(self.blocks[d].area for d in DIRECTIONS)

    def free_fractions(self) -> list[float]:
        """Per-direction free fraction of the nominal block area, in canonical order."""
        return [self.free_area[d] / self.blocks[d].area for d in DIRECTIONS]


def direction_block_rect(footprint: Rect, direction: str, alpha: float) -> Rect:
    """Nominal rect of one direction block for the given footprint and scale."""
    c, hw, hh = footprint.center, footprint.half_w, footprint.half_h
    mx = 2.0 * alpha * hw
    my = 2.0 * alpha * hh
    x_ranges = {
        "L": (c.x - hw - mx, c.x - hw),
        "C": (c.x - hw, c.x + hw),
        "R": (c.x + hw, c.x + hw + mx),
    }
    y_ranges = {
        "B": (c.y - hh - my, c.y - hh),
        "C": (c.y - hh, c.y + hh),
        "F": (c.y + hh, c.y + hh + my),
    }
    col_row = {
        "FF": ("C", "F"), "FL": ("L", "F"), "LL": ("L", "C"), "BL": ("L", "B"),
        "BB": ("C", "B"), "BR": ("R", "B"), "RR": ("R", "C"), "FR": ("R", "F"),
    }
    col, rw = col_row[direction]
    (x0, x1), (y0, y1) = x_ranges[col], y_ranges[rw]
    return Rect.from_bounds(x0, x1, y0, y1)


def _clip_to_table(rect: Rect, table: Rect) -> Rect | None:
    x0 = max(rect.x_lo, table.x_lo)
    x1 = min(rect.x_hi, table.x_hi)
    y0 = max(rect.y_lo, table.y_lo)
    y1 = min(rect.y_hi, table.y_hi)
    if x1 - x0 <= 0.0 or y1 - y0 <= 0.0:
        return None
    return Rect.from_bounds(x0, x1, y0, y1)


def direction_blocks(obj: SceneObject, scene: Scene, alpha: float = 1.0,
                     n_lines: int = 64) -> DirectionBlocks:
    """Eight direction blocks around an object with their free areas.

    Free area of a block is the on-table part of the block minus its sampled
    overlap with everything else (other obstacles, the target, the walls).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    occupied = placement_space(scene, exclude=obj.id)
    blocks: dict[str, Rect] = {}
    free: dict[str, float] = {}
    for d in DIRECTIONS:
        block = direction_block_rect(obj.footprint, d, alpha)
        blocks[d] = block
        clipped = _clip_to_table(block, scene.table)
        if clipped is None:
            free[d] = 0.0
        else:
            free[d] = max(0.0, clipped.area - sampled_overlap_area(clipped, occupied, n_lines))
    return DirectionBlocks(obj.id, alpha, blocks, free)


# ---------------------------------------------------------------------------
# Decomposition bundle and row elements


@dataclass(frozen=True)
class RowElement:
    """A gap or object keypoint candidate within a row."""

    kind: str  # "gap" | "object"
    element_id: str
    row_index: int
    position: Point2


@dataclass(frozen=True)
class Decomposition:
    rows: tuple[Row, ...]
    gaps: tuple[Gap, ...]

    def gaps_in_row(self, index: int) -> list[Gap]:
        return [g for g in self.gaps if g.row_index == index]

    def row_of_object(self, object_id: str) -> Row:
        for row in self.rows:
            if object_id in row.member_ids:
                return row
        raise KeyError(object_id)

    def elements_in_row(self, scene: Scene, index: int, movable_only: bool = True) -> list[RowElement]:
        elements = [RowElement("gap", g.id, index, g.center) for g in self.gaps_in_row(index)]
        for oid in self.rows[index].member_ids:
            obj = scene.object_by_id(oid)
            if movable_only and not obj.movable:
                continue
            elements.append(RowElement("object", oid, index, obj.position))
        return elements

    def gap_by_id(self, gap_id: str) -> Gap:
        for g in self.gaps:
            if g.id == gap_id:
                return g
        raise KeyError(gap_id)


def decompose(scene: Scene) -> Decomposition:
    rows = detect_rows(scene)
    gaps = extract_gaps(scene, rows)
    return Decomposition(tuple(rows), tuple(gaps))
