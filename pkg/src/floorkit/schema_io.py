"""Strict parsing and canonical emission of the floorplan JSON schema.

The document format is dependency-ordered: the wall skeleton (with nested
openings) always precedes the rooms that reference it, so a room can never
point at structure that has not been defined yet. See docs/schema.md for
the grammar.

``parse`` checks syntax, document shape, and referential existence only;
geometric soundness (closure, opening fit, curvature range) is the
validator's job, so structurally broken plans still parse into values the
validator can diagnose.

``emit`` is canonical: fixed key order, walls before rooms, coordinates and
lengths printed with one decimal, curvature with three. ``parse(emit(p))``
is the identity for plans already on those grids (the generator's output);
``emit(parse(text))`` is idempotent canonicalization for any valid text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .geometry import (
    FRAME_PIXEL,
    FRAME_WORLD,
    Floorplan,
    Opening,
    Point2,
    Room,
    Wall,
    plan_bounds,
    scale_shift_plan,
)

OPENING_KINDS = ("door", "window")
FRAMES = (FRAME_WORLD, FRAME_PIXEL)

_WALL_KEYS = ("id", "start", "end", "thickness", "curvature", "openings")
_OPENING_KEYS = ("class", "offset", "width")
_ROOM_KEYS = ("label", "walls")


class JSONSyntaxError(ValueError):
    """Malformed JSON; ``offset`` is the character offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


class SchemaError(ValueError):
    """Well-formed JSON that violates the document schema.

    ``code`` is ``"DANGLING_REF"`` for references to undefined walls and
    ``"SCHEMA"`` for everything else; ``path`` locates the offending node.
    """

    def __init__(self, message: str, path: str, code: str = "SCHEMA"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.code = code


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name!r} is not allowed")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {type(value).__name__}", path)
    v = float(value)
    if not math.isfinite(v):
        raise SchemaError("number must be finite", path)
    return v


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"expected a string, got {type(value).__name__}", path)
    return value


def _point(value, path: str) -> Point2:
    if not isinstance(value, list) or len(value) != 2:
        raise SchemaError("expected a [x, y] pair", path)
    return Point2(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def _check_keys(obj: dict, required: tuple[str, ...], path: str) -> None:
    for key in required:
        if key not in obj:
            raise SchemaError(f"missing required field {key!r}", path)
    for key in obj:
        if key not in required:
            raise SchemaError(f"unknown field {key!r}", f"{path}.{key}")


def parse(text: str) -> Floorplan:
    """Parse a schema document into a plan, rejecting any unknown field."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise JSONSyntaxError(f"malformed JSON at offset {exc.pos}: {exc.msg}", exc.pos) from None
    except ValueError as exc:
        raise JSONSyntaxError(str(exc), 0) from None

    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object", "$")
    keys = list(doc.keys())
    if "walls" not in keys:
        raise SchemaError("missing required field 'walls'", "$")
    if "rooms" not in keys:
        raise SchemaError("missing required field 'rooms'", "$")
    for key in keys:
        if key not in ("frame", "walls", "rooms"):
            raise SchemaError(f"unknown field {key!r}", f"$.{key}")
    if keys.index("rooms") < keys.index("walls"):
        raise SchemaError("walls must be serialized before rooms", "$.rooms")

    frame = FRAME_PIXEL
    if "frame" in doc:
        frame = _string(doc["frame"], "$.frame")
        if frame not in FRAMES:
            raise SchemaError(f"frame must be one of {FRAMES}", "$.frame")

    raw_walls = doc["walls"]
    if not isinstance(raw_walls, list):
        raise SchemaError("expected a list", "$.walls")
    walls = []
    seen_ids: set[str] = set()
    for i, w in enumerate(raw_walls):
        path = f"$.walls[{i}]"
        if not isinstance(w, dict):
            raise SchemaError("expected a wall object", path)
        _check_keys(w, _WALL_KEYS, path)
        wid = _string(w["id"], f"{path}.id")
        if wid in seen_ids:
            raise SchemaError(f"duplicate wall id {wid!r}", f"{path}.id")
        seen_ids.add(wid)
        raw_openings = w["openings"]
        if not isinstance(raw_openings, list):
            raise SchemaError("expected a list", f"{path}.openings")
        openings = []
        for j, o in enumerate(raw_openings):
            opath = f"{path}.openings[{j}]"
            if not isinstance(o, dict):
                raise SchemaError("expected an opening object", opath)
            _check_keys(o, _OPENING_KEYS, opath)
            kind = _string(o["class"], f"{opath}.class")
            if kind not in OPENING_KINDS:
                raise SchemaError(f"class must be one of {OPENING_KINDS}", f"{opath}.class")
            openings.append(
                Opening(kind, _number(o["offset"], f"{opath}.offset"), _number(o["width"], f"{opath}.width"))
            )
        walls.append(
            Wall(
                id=wid,
                start=_point(w["start"], f"{path}.start"),
                end=_point(w["end"], f"{path}.end"),
                thickness=_number(w["thickness"], f"{path}.thickness"),
                curvature=_number(w["curvature"], f"{path}.curvature"),
                openings=tuple(openings),
            )
        )

    raw_rooms = doc["rooms"]
    if not isinstance(raw_rooms, list):
        raise SchemaError("expected a list", "$.rooms")
    rooms = []
    for i, r in enumerate(raw_rooms):
        path = f"$.rooms[{i}]"
        if not isinstance(r, dict):
            raise SchemaError("expected a room object", path)
        _check_keys(r, _ROOM_KEYS, path)
        label = _string(r["label"], f"{path}.label")
        refs = r["walls"]
        if not isinstance(refs, list):
            raise SchemaError("expected a list of wall ids", f"{path}.walls")
        for j, ref in enumerate(refs):
            rid = _string(ref, f"{path}.walls[{j}]")
            if rid not in seen_ids:
                raise SchemaError(
                    f"room references undefined wall {rid!r}",
                    f"{path}.walls[{j}]",
                    code="DANGLING_REF",
                )
        rooms.append(Room(label, tuple(refs)))

    return Floorplan(tuple(walls), tuple(rooms), frame)


def _coord(v: float) -> str:
    s = f"{v:.1f}"
    return "0.0" if s == "-0.0" else s


def _curv(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def emit(plan: Floorplan) -> str:
    """Canonical, deterministic serialization (walls strictly before rooms)."""
    parts = [f'{{"frame":{json.dumps(plan.frame)},"walls":[']
    for i, w in enumerate(plan.walls):
        if i:
            parts.append(",")
        ops = ",".join(
            f'{{"class":{json.dumps(o.kind)},"offset":{_coord(o.offset)},"width":{_coord(o.width)}}}'
            for o in w.openings
        )
        parts.append(
            f'{{"id":{json.dumps(w.id)},'
            f'"start":[{_coord(w.start.x)},{_coord(w.start.y)}],'
            f'"end":[{_coord(w.end.x)},{_coord(w.end.y)}],'
            f'"thickness":{_coord(w.thickness)},'
            f'"curvature":{_curv(w.curvature)},'
            f'"openings":[{ops}]}}'
        )
    parts.append('],"rooms":[')
    for i, r in enumerate(plan.rooms):
        if i:
            parts.append(",")
        refs = ",".join(json.dumps(ref) for ref in r.wall_refs)
        parts.append(f'{{"label":{json.dumps(r.label)},"walls":[{refs}]}}')
    parts.append("]}")
    return "".join(parts)


@dataclass(frozen=True)
class NormalizationTransform:
    """World-to-pixel similarity map: pixel = world * scale + shift."""

    scale: float
    shift: Point2

    def apply(self, p: Point2) -> Point2:
        return Point2(p.x * self.scale + self.shift.x, p.y * self.scale + self.shift.y)

    def invert(self, p: Point2) -> Point2:
        return Point2((p.x - self.shift.x) / self.scale, (p.y - self.shift.y) / self.scale)


def normalize(
    plan: Floorplan, image_w: float, image_h: float
) -> tuple[Floorplan, NormalizationTransform]:
    """Rescale a world-frame plan so the longer image edge maps to 1024.

    The world-to-image step fits the plan's bounding box into the image
    canvas with a uniform scale (aspect preserved, bbox corner at the canvas
    origin); the image is then normalized by 1024/max(image_w, image_h).
    Lengths scale with coordinates; curvature is scale-free and unchanged.
    """
    if plan.frame != FRAME_WORLD:
        raise ValueError(f"normalize expects a {FRAME_WORLD} plan, got {plan.frame}")
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dimensions must be positive")
    minx, miny, maxx, maxy = plan_bounds(plan)
    bw, bh = maxx - minx, maxy - miny
    if bw <= 0 or bh <= 0:
        raise ValueError("plan bounding box is degenerate")
    fit = min(image_w / bw, image_h / bh)
    norm = 1024.0 / max(image_w, image_h)
    scale = fit * norm
    shift = Point2(-minx * scale, -miny * scale)
    transform = NormalizationTransform(scale, shift)
    return (
        scale_shift_plan(plan, scale, shift.x, shift.y, FRAME_PIXEL),
        transform,
    )
