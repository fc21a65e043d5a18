"""Floorplan data model and pure 2D geometry.

A plan is a shared wall skeleton plus rooms defined as ordered cycles of
wall references. Walls are straight segments or circular arcs parameterized
by a signed bulge ratio; openings (doors/windows) live nested inside their
parent wall, positioned by arc length along the centerline.

Conventions:

* ``curvature`` is the signed sagitta-to-chord ratio. 0 means straight;
  positive bulges to the left of the start->end direction. Magnitude is
  capped at ``MAX_CURVATURE`` (0.5, a semicircle) - beyond that the arc
  would be ambiguous under endpoint swap.
* ``Polygon`` rings are open (closing edge implicit): exterior
  counterclockwise, holes clockwise.
* No type constructor enforces geometric invariants; plans with broken
  geometry must remain constructible so the validator can diagnose them.
  Operations raise the exceptions below when fed degenerate input.

All values are immutable and all functions are pure, so everything here is
safe to call from concurrent workers without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from shapely.geometry import MultiPolygon as _ShMultiPolygon
from shapely.geometry import Polygon as _ShPolygon
from shapely.ops import unary_union

MAX_CURVATURE = 0.5

FRAME_WORLD = "world_mm"
FRAME_PIXEL = "pixel_1024"

# One pixel of drift in the 1024 frame must not break topology; 5 mm plays
# the same role for world-frame plans.
DEFAULT_SNAP_TOL = 1.0
WORLD_SNAP_TOL = 5.0
DEFAULT_CHORD_TOL = 0.5
MANHATTAN_ANGLE_TOL_DEG = 0.5


class GeometryError(ValueError):
    """Base for geometric failures that carry the offending element ids."""

    def __init__(self, message: str, elements: tuple[str, ...] = ()):
        super().__init__(message)
        self.elements = elements


class DegenerateWallError(GeometryError):
    pass


class FootprintError(GeometryError):
    """Offset self-intersection: curvature too large for the thickness."""


class ChainGapError(GeometryError):
    """Consecutive walls of a room cycle do not meet within snap tolerance."""

    def __init__(self, message, elements=(), gap: float = math.inf):
        super().__init__(message, elements)
        self.gap = gap


class SelfIntersectionError(GeometryError):
    pass


class RoomReferenceError(GeometryError):
    """Room references a missing wall or traverses the same wall twice."""


class EmptyPlanError(GeometryError):
    pass


@dataclass(frozen=True)
class Point2:
    x: float
    y: float


@dataclass(frozen=True)
class Opening:
    kind: str  # "door" | "window"
    offset: float  # arc length from wall start to the opening center
    width: float


@dataclass(frozen=True)
class Wall:
    id: str
    start: Point2
    end: Point2
    thickness: float
    curvature: float = 0.0
    openings: tuple[Opening, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "openings", tuple(self.openings))


@dataclass(frozen=True)
class Room:
    label: str
    wall_refs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "wall_refs", tuple(self.wall_refs))


@dataclass(frozen=True)
class Floorplan:
    walls: tuple[Wall, ...]
    rooms: tuple[Room, ...]
    frame: str = FRAME_PIXEL

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))
        object.__setattr__(self, "rooms", tuple(self.rooms))

    def wall_by_id(self) -> dict[str, Wall]:
        return {w.id: w for w in self.walls}


@dataclass(frozen=True)
class Polygon:
    exterior: tuple[Point2, ...]
    holes: tuple[tuple[Point2, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exterior", tuple(self.exterior))
        object.__setattr__(self, "holes", tuple(tuple(h) for h in self.holes))

    def area(self) -> float:
        a = _ring_area(self.exterior)
        for h in self.holes:
            a -= abs(_ring_area(h))
        return a

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [p.x for p in self.exterior]
        ys = [p.y for p in self.exterior]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class BoundaryResult:
    """External boundary plus non-fatal findings (e.g. disjoint components)."""

    polygon: Polygon
    warnings: tuple[str, ...] = ()


def _ring_area(ring) -> float:
    """Signed shoelace area; positive for counterclockwise rings."""
    n = len(ring)
    s = 0.0
    for i in range(n):
        p, q = ring[i], ring[(i + 1) % n]
        s += p.x * q.y - q.x * p.y
    return 0.5 * s


def to_shapely(poly: Polygon) -> _ShPolygon:
    return _ShPolygon(
        [(p.x, p.y) for p in poly.exterior],
        [[(p.x, p.y) for p in h] for h in poly.holes],
    )


def from_shapely(sh: _ShPolygon) -> Polygon:
    ext = [Point2(x, y) for x, y in sh.exterior.coords[:-1]]
    if _ring_area(ext) < 0:
        ext.reverse()
    holes = []
    for ring in sh.interiors:
        h = [Point2(x, y) for x, y in ring.coords[:-1]]
        if _ring_area(h) > 0:
            h.reverse()
        holes.append(tuple(h))
    return Polygon(tuple(ext), tuple(holes))


# --- arc parameterization ------------------------------------------------


@dataclass(frozen=True)
class _Arc:
    cx: float
    cy: float
    radius: float
    start_angle: float
    sweep: float  # signed; negative when the bulge is to the left


def _chord(wall: Wall) -> float:
    return math.hypot(wall.end.x - wall.start.x, wall.end.y - wall.start.y)


def _require_chord(wall: Wall) -> float:
    c = _chord(wall)
    if c <= 1e-12:
        raise DegenerateWallError(
            f"wall {wall.id!r} has coincident endpoints", (wall.id,)
        )
    return c


def _wall_arc(wall: Wall) -> _Arc | None:
    """Circle through the endpoints with sagitta = curvature * chord."""
    c = _require_chord(wall)
    k = wall.curvature
    if k == 0.0:
        return None
    sag = abs(k) * c
    radius = (c * c / 4.0 + sag * sag) / (2.0 * sag)
    ux = (wall.end.x - wall.start.x) / c
    uy = (wall.end.y - wall.start.y) / c
    # left-hand normal of start->end
    nx, ny = -uy, ux
    side = 1.0 if k > 0 else -1.0
    mx = (wall.start.x + wall.end.x) / 2.0
    my = (wall.start.y + wall.end.y) / 2.0
    cx = mx - nx * side * (radius - sag)
    cy = my - ny * side * (radius - sag)
    start_angle = math.atan2(wall.start.y - cy, wall.start.x - cx)
    half = min(1.0, c / (2.0 * radius))
    sweep = -side * 2.0 * math.asin(half)
    return _Arc(cx, cy, radius, start_angle, sweep)


def arc_point(wall: Wall, t: float) -> Point2:
    """Point at normalized arc length t in [0, 1] along the centerline."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must be in [0, 1], got {t}")
    arc = _wall_arc(wall)
    if arc is None:
        return Point2(
            wall.start.x + t * (wall.end.x - wall.start.x),
            wall.start.y + t * (wall.end.y - wall.start.y),
        )
    ang = arc.start_angle + t * arc.sweep
    return Point2(
        arc.cx + arc.radius * math.cos(ang),
        arc.cy + arc.radius * math.sin(ang),
    )


def wall_centerline_length(wall: Wall) -> float:
    c = _require_chord(wall)
    arc = _wall_arc(wall)
    if arc is None:
        return c
    return arc.radius * abs(arc.sweep)


def _arc_segments(arc: _Arc, radius: float, chord_tol: float) -> int:
    """Segment count keeping every emitted chord's sagitta <= chord_tol."""
    ratio = min(1.0, chord_tol / radius)
    max_step = 2.0 * math.acos(1.0 - ratio)
    if max_step <= 0.0:
        return 1
    return max(1, math.ceil(abs(arc.sweep) / max_step))


def discretize_centerline(wall: Wall, chord_tol: float = DEFAULT_CHORD_TOL) -> list[Point2]:
    """Centerline as a polyline; arcs split so segment sagitta <= chord_tol."""
    if chord_tol <= 0:
        raise ValueError("chord_tol must be positive")
    arc = _wall_arc(wall)
    if arc is None:
        return [wall.start, wall.end]
    n = _arc_segments(arc, arc.radius, chord_tol)
    pts = [wall.start]
    for i in range(1, n):
        ang = arc.start_angle + arc.sweep * i / n
        pts.append(Point2(arc.cx + arc.radius * math.cos(ang),
                          arc.cy + arc.radius * math.sin(ang)))
    pts.append(wall.end)
    return pts


def wall_footprint(wall: Wall, chord_tol: float = DEFAULT_CHORD_TOL) -> Polygon:
    """Centerline offset by half the thickness on both sides, flat end caps."""
    if chord_tol <= 0:
        raise ValueError("chord_tol must be positive")
    if wall.thickness <= 0:
        raise DegenerateWallError(
            f"wall {wall.id!r} has nonpositive thickness", (wall.id,)
        )
    c = _require_chord(wall)
    h = wall.thickness / 2.0
    arc = _wall_arc(wall)
    if arc is None:
        ux = (wall.end.x - wall.start.x) / c
        uy = (wall.end.y - wall.start.y) / c
        nx, ny = -uy, ux
        ring = (
            Point2(wall.start.x - nx * h, wall.start.y - ny * h),
            Point2(wall.end.x - nx * h, wall.end.y - ny * h),
            Point2(wall.end.x + nx * h, wall.end.y + ny * h),
            Point2(wall.start.x + nx * h, wall.start.y + ny * h),
        )
        if _ring_area(ring) < 0:
            ring = tuple(reversed(ring))
        return Polygon(ring)
    r_in = arc.radius - h
    if r_in <= 1e-9:
        raise FootprintError(
            f"wall {wall.id!r}: offset self-intersects "
            f"(radius {arc.radius:.3g} <= half thickness {h:.3g})",
            (wall.id,),
        )
    r_out = arc.radius + h
    n = _arc_segments(arc, r_out, chord_tol)
    outer = []
    inner = []
    for i in range(n + 1):
        ang = arc.start_angle + arc.sweep * i / n
        ca, sa = math.cos(ang), math.sin(ang)
        outer.append(Point2(arc.cx + r_out * ca, arc.cy + r_out * sa))
        inner.append(Point2(arc.cx + r_in * ca, arc.cy + r_in * sa))
    ring = tuple(outer + list(reversed(inner)))
    if _ring_area(ring) < 0:
        ring = tuple(reversed(ring))
    return Polygon(ring)


# --- room cycles and the external boundary --------------------------------


def _dist(a: Point2, b: Point2) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def room_polygon(
    plan: Floorplan,
    room: Room,
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> Polygon:
    """Chain the referenced wall centerlines into a closed simple polygon.

    A wall is traversed reversed when its end (not its start) is the nearer
    match for the running chain tail; the nearest-endpoint rule keeps the
    orientation choice independent of snap_tol, so loosening the tolerance
    can never flip a previously valid chain.
    """
    if len(room.wall_refs) < 3:
        raise RoomReferenceError(
            f"room {room.label!r} references {len(room.wall_refs)} walls, need >= 3"
        )
    if len(set(room.wall_refs)) != len(room.wall_refs):
        dupes = sorted({r for r in room.wall_refs if room.wall_refs.count(r) > 1})
        raise RoomReferenceError(
            f"room {room.label!r} traverses walls {dupes} more than once",
            tuple(dupes),
        )
    by_id = plan.wall_by_id()
    try:
        walls = [by_id[r] for r in room.wall_refs]
    except KeyError as exc:
        raise RoomReferenceError(
            f"room {room.label!r} references unknown wall {exc.args[0]!r}",
            (exc.args[0],),
        ) from None

    lines = [discretize_centerline(w, chord_tol) for w in walls]

    # Orient the first wall toward whichever endpoint of the second is nearer.
    w0, w1 = walls[0], walls[1]
    fwd = min(_dist(w0.end, w1.start), _dist(w0.end, w1.end))
    rev = min(_dist(w0.start, w1.start), _dist(w0.start, w1.end))
    ring: list[Point2] = list(lines[0]) if fwd <= rev else list(reversed(lines[0]))

    for i in range(1, len(walls)):
        wall, line = walls[i], lines[i]
        tail = ring[-1]
        d_fwd = _dist(tail, line[0])
        d_rev = _dist(tail, line[-1])
        pts, gap = (line, d_fwd) if d_fwd <= d_rev else (list(reversed(line)), d_rev)
        if gap > snap_tol:
            prev_id = walls[i - 1].id
            raise ChainGapError(
                f"room {room.label!r}: gap {gap:.3g} between walls "
                f"{prev_id!r} and {wall.id!r} exceeds snap tolerance {snap_tol:.3g}",
                (prev_id, wall.id),
                gap=gap,
            )
        ring.extend(pts[1:])

    closing = _dist(ring[-1], ring[0])
    if closing > snap_tol:
        raise ChainGapError(
            f"room {room.label!r}: cycle does not close, gap {closing:.3g} between "
            f"walls {walls[-1].id!r} and {walls[0].id!r}",
            (walls[-1].id, walls[0].id),
            gap=closing,
        )
    ring.pop()

    if len(ring) < 3:
        raise SelfIntersectionError(f"room {room.label!r} collapses to a line")
    if _ring_area(ring) < 0:
        ring.reverse()
    poly = Polygon(tuple(ring))
    sh = to_shapely(poly)
    if not sh.is_valid or sh.area <= 0:
        raise SelfIntersectionError(
            f"room {room.label!r}: wall cycle self-intersects"
        )
    return poly


@lru_cache(maxsize=512)
def _plan_geometry(plan: Floorplan, chord_tol: float, snap_tol: float):
    """Room polygons for a plan, cached: evaluation revisits plans heavily."""
    return tuple(room_polygon(plan, r, chord_tol, snap_tol) for r in plan.rooms)


def plan_room_polygons(
    plan: Floorplan,
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> tuple[Polygon, ...]:
    return _plan_geometry(plan, chord_tol, snap_tol)


def external_boundary(
    plan: Floorplan,
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> BoundaryResult:
    """Outer ring of the union of all room polygons, holes filled.

    A disjoint union keeps the largest component and reports a warning
    instead of failing.
    """
    if not plan.rooms:
        raise EmptyPlanError("plan has no rooms")
    polys = plan_room_polygons(plan, chord_tol, snap_tol)
    merged = unary_union([to_shapely(p) for p in polys])
    warnings: list[str] = []
    if isinstance(merged, _ShMultiPolygon):
        parts = sorted(merged.geoms, key=lambda g: g.area, reverse=True)
        warnings.append(
            f"room union has {len(parts)} disjoint components; keeping largest"
        )
        merged = parts[0]
    outer = _ShPolygon(merged.exterior)
    return BoundaryResult(from_shapely(outer), tuple(warnings))


def polygon_iou(a: Polygon, b: Polygon) -> float:
    sa, sb = to_shapely(a), to_shapely(b)
    inter = sa.intersection(sb).area
    union = sa.union(sb).area
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def is_manhattan(plan: Floorplan, angle_tol: float = MANHATTAN_ANGLE_TOL_DEG) -> bool:
    """True iff every wall is straight and axis-aligned within angle_tol degrees."""
    for w in plan.walls:
        if w.curvature != 0.0:
            return False
        ang = math.degrees(math.atan2(w.end.y - w.start.y, w.end.x - w.start.x)) % 90.0
        if min(ang, 90.0 - ang) > angle_tol:
            return False
    return True


# --- similarity transforms -------------------------------------------------


def scale_shift_plan(
    plan: Floorplan, scale: float, dx: float, dy: float, frame: str
) -> Floorplan:
    """Apply p -> scale*p + (dx, dy); lengths scale, curvature is invariant."""
    if scale <= 0:
        raise ValueError("scale must be positive")

    def mv(p: Point2) -> Point2:
        return Point2(p.x * scale + dx, p.y * scale + dy)

    walls = tuple(
        Wall(
            id=w.id,
            start=mv(w.start),
            end=mv(w.end),
            thickness=w.thickness * scale,
            curvature=w.curvature,
            openings=tuple(
                Opening(o.kind, o.offset * scale, o.width * scale)
                for o in w.openings
            ),
        )
        for w in plan.walls
    )
    return Floorplan(walls=walls, rooms=plan.rooms, frame=frame)


def plan_bounds(plan: Floorplan) -> tuple[float, float, float, float]:
    """Bounding box over wall endpoints and arc extents."""
    if not plan.walls:
        raise EmptyPlanError("plan has no walls")
    xs: list[float] = []
    ys: list[float] = []
    for w in plan.walls:
        for t in (0.0, 0.25, 0.5, 0.75, 1.0):
            p = arc_point(w, t)
            xs.append(p.x)
            ys.append(p.y)
    return min(xs), min(ys), max(xs), max(ys)
