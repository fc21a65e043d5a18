"""Seeded synthetic floorplan generator with controllable corruption.

Plans are built by recursive axis-aligned space partitioning of an outer
rectangle. Shared boundaries between neighboring rooms become single wall
segments (split at the points where neighboring rooms start or stop), so
every uncorrupted plan is watertight by construction. Optional per-plan
transforms produce the off-axis population: a rigid rotation or a shear
makes walls slanted, and exterior segments can be turned into outward
arcs. Coordinates land on a 0.1 grid and curvature on a 0.001 grid, so
canonical serialization round-trips exactly.

Per-plan RNG streams are derived from (seed, index): generating plans in
parallel or serially yields identical corpora.

Corruption is deterministic: with total rate r over n plans, exactly
floor(n*r) evenly spaced plans are corrupted, and the ledger records which
and how. Every corruption mode guarantees invalidity:

* ``chain_gap``     - one wall endpoint displaced well past snap tolerance
* ``missing_wall``  - a referenced wall removed (dangling reference)
* ``dangling_ref``  - a nonexistent wall id appended to a room cycle
* ``malformed_json``- the serialized document truncated (text level; the
  in-memory plan stays intact, see ``corpus_documents``)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Floorplan, Opening, Point2, Room, Wall
from .schema_io import emit

ROOM_LABELS = (
    "bedroom",
    "living_room",
    "kitchen",
    "bathroom",
    "balcony",
    "hallway",
    "study",
    "dining_room",
)

CORRUPTION_MODES = ("chain_gap", "missing_wall", "dangling_ref", "malformed_json")

_MIN_ROOM_SIDE = 110.0


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    room_range: tuple[int, int] = (4, 9)
    non_manhattan_p: float = 0.35
    curved_p: float = 0.5  # applied only to plans already chosen non-Manhattan
    opening_density: float = 0.35
    corruption: dict[str, float] = field(default_factory=dict)
    canvas: tuple[int, int] = (1024, 1024)

    def __post_init__(self):
        lo, hi = self.room_range
        if lo < 1 or hi < lo:
            raise ValueError(f"infeasible room range {self.room_range}")
        for p in (self.non_manhattan_p, self.curved_p, self.opening_density):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must be in [0, 1]")
        for mode, rate in self.corruption.items():
            if mode not in CORRUPTION_MODES:
                raise ValueError(f"unknown corruption mode {mode!r}")
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"corruption rate for {mode!r} must be in [0, 1]")
        if sum(self.corruption.values()) > 1.0:
            raise ValueError("corruption rates sum past 1")


@dataclass(frozen=True)
class GeneratedPlan:
    plan: Floorplan
    ledger: dict


def _q1(v: float) -> float:
    return round(v, 1)


def _q3(v: float) -> float:
    return round(v, 3)


def _partition(rng, x0, y0, x1, y1, target: int) -> list[tuple[float, float, float, float]]:
    rects = [(x0, y0, x1, y1)]
    while len(rects) < target:
        # largest room first keeps the partition balanced
        idx = max(range(len(rects)), key=lambda i: (rects[i][2] - rects[i][0]) * (rects[i][3] - rects[i][1]))
        rx0, ry0, rx1, ry1 = rects.pop(idx)
        w, h = rx1 - rx0, ry1 - ry0
        if max(w, h) < 2 * _MIN_ROOM_SIDE:
            rects.append((rx0, ry0, rx1, ry1))
            break
        if w >= h:
            cut = _q1(rx0 + w * rng.uniform(0.38, 0.62))
            cut = min(max(cut, rx0 + _MIN_ROOM_SIDE), rx1 - _MIN_ROOM_SIDE)
            rects.extend([(rx0, ry0, cut, ry1), (cut, ry0, rx1, ry1)])
        else:
            cut = _q1(ry0 + h * rng.uniform(0.38, 0.62))
            cut = min(max(cut, ry0 + _MIN_ROOM_SIDE), ry1 - _MIN_ROOM_SIDE)
            rects.extend([(rx0, ry0, rx1, cut), (rx0, cut, rx1, ry1)])
    return rects


def _boundary_segments(rects):
    """Decompose room-rectangle boundaries into shared elementary segments.

    Walls on the same boundary line are cut at every point where a room
    starts or stops there, so two rooms meeting along a line reference the
    identical segment objects - the shared-skeleton property.
    Returns (segments, per-rect ordered references, exterior flags).
    """
    vertical: dict[float, list[tuple[float, float, int]]] = {}
    horizontal: dict[float, list[tuple[float, float, int]]] = {}
    for i, (rx0, ry0, rx1, ry1) in enumerate(rects):
        vertical.setdefault(rx0, []).append((ry0, ry1, i))
        vertical.setdefault(rx1, []).append((ry0, ry1, i))
        horizontal.setdefault(ry0, []).append((rx0, rx1, i))
        horizontal.setdefault(ry1, []).append((rx0, rx1, i))

    segments: list[tuple[Point2, Point2, bool]] = []
    seg_index: dict[tuple, int] = {}

    def decompose(lines, is_vertical):
        for coord in sorted(lines):
            intervals = lines[coord]
            cuts = sorted({v for a, b, _ in intervals for v in (a, b)})
            for a, b in zip(cuts, cuts[1:]):
                owners = [i for (ia, ib, i) in intervals if ia <= a and b <= ib]
                if not owners:
                    continue
                if is_vertical:
                    key = (coord, a, coord, b)
                    p, q = Point2(coord, a), Point2(coord, b)
                else:
                    key = (a, coord, b, coord)
                    p, q = Point2(a, coord), Point2(b, coord)
                if key not in seg_index:
                    seg_index[key] = len(segments)
                    segments.append((p, q, len(owners) == 1))
        return None

    decompose(vertical, True)
    decompose(horizontal, False)

    def pieces_on(line_map, coord, lo, hi, is_vertical):
        out = []
        intervals = line_map[coord]
        cuts = sorted({v for a, b, _ in intervals for v in (a, b) if lo <= v <= hi})
        for a, b in zip(cuts, cuts[1:]):
            key = (coord, a, coord, b) if is_vertical else (a, coord, b, coord)
            out.append(seg_index[key])
        return out

    rect_refs = []
    for rx0, ry0, rx1, ry1 in rects:
        refs = []
        refs.extend(pieces_on(horizontal, ry0, rx0, rx1, False))  # bottom, left->right
        refs.extend(pieces_on(vertical, rx1, ry0, ry1, True))  # right, bottom->top
        refs.extend(reversed(pieces_on(horizontal, ry1, rx0, rx1, False)))  # top
        refs.extend(reversed(pieces_on(vertical, rx0, ry0, ry1, True)))  # left
        rect_refs.append(refs)
    return segments, rect_refs


def _place_openings(rng, wall: Wall, exterior: bool, density: float, length: float) -> Wall:
    if rng.random() >= density:
        return wall
    if exterior:
        kind = "window" if rng.random() < 0.7 else "door"
        width = rng.uniform(50.0, 110.0)
    else:
        kind = "door"
        width = rng.uniform(45.0, 85.0)
    width = _q1(min(width, length - 20.0))
    if width < 30.0:
        return wall
    margin = width / 2.0 + 3.0
    offset = _q1(rng.uniform(margin, length - margin))
    return replace(wall, openings=(Opening(kind, offset, width),))


def _build_plan(rng, spec: GenSpec) -> Floorplan:
    cw, ch = spec.canvas
    target = int(rng.integers(spec.room_range[0], spec.room_range[1] + 1))
    # leave headroom so rotation/shear/arcs stay inside the canvas
    w = _q1(rng.uniform(0.52, 0.68) * cw)
    h = _q1(rng.uniform(0.52, 0.68) * ch)
    x0 = _q1((cw - w) / 2.0)
    y0 = _q1((ch - h) / 2.0)
    rects = _partition(rng, x0, y0, x0 + w, y0 + h, target)
    segments, rect_refs = _boundary_segments(rects)

    non_manhattan = rng.random() < spec.non_manhattan_p
    transform = None
    if non_manhattan:
        cx, cy = x0 + w / 2.0, y0 + h / 2.0
        if rng.random() < 0.5:
            ang = math.radians(rng.uniform(8.0, 40.0)) * (1 if rng.random() < 0.5 else -1)
            ca, sa = math.cos(ang), math.sin(ang)
            transform = lambda x, y: (cx + (x - cx) * ca - (y - cy) * sa, cy + (x - cx) * sa + (y - cy) * ca)
        else:
            lam = rng.uniform(0.15, 0.35) * (1 if rng.random() < 0.5 else -1)
            transform = lambda x, y: (x + lam * (y - cy), y)

    tau_ext = _q1(rng.uniform(10.0, 14.0))
    tau_int = _q1(rng.uniform(6.0, 10.0))

    walls = []
    for k, (p, q, exterior) in enumerate(segments):
        if transform is not None:
            px, py = transform(p.x, p.y)
            qx, qy = transform(q.x, q.y)
        else:
            px, py, qx, qy = p.x, p.y, q.x, q.y
        walls.append(
            Wall(
                id=f"wall_{k + 1}",
                start=Point2(_q1(px), _q1(py)),
                end=Point2(_q1(qx), _q1(qy)),
                thickness=tau_ext if exterior else tau_int,
                curvature=0.0,
            )
        )

    if non_manhattan and rng.random() < spec.curved_p:
        candidates = [
            k
            for k, (p, q, exterior) in enumerate(segments)
            if exterior and math.hypot(q.x - p.x, q.y - p.y) >= 160.0
        ]
        if candidates:
            picks = rng.choice(candidates, size=min(len(candidates), int(rng.integers(1, 4))), replace=False)
            for k in sorted(int(v) for v in picks):
                wall = walls[k]
                owner = next(i for i, refs in enumerate(rect_refs) if k in refs)
                rx0, ry0, rx1, ry1 = rects[owner]
                ccx, ccy = (rx0 + rx1) / 2.0, (ry0 + ry1) / 2.0
                if transform is not None:
                    ccx, ccy = transform(ccx, ccy)
                mx, my = (wall.start.x + wall.end.x) / 2.0, (wall.start.y + wall.end.y) / 2.0
                ux, uy = wall.end.x - wall.start.x, wall.end.y - wall.start.y
                norm = math.hypot(ux, uy)
                nx, ny = -uy / norm, ux / norm
                inward = (ccx - mx) * nx + (ccy - my) * ny
                sign = -1.0 if inward > 0 else 1.0
                walls[k] = replace(wall, curvature=_q3(sign * rng.uniform(0.18, 0.5)))

    density = spec.opening_density
    for k, (p, q, exterior) in enumerate(segments):
        wall = walls[k]
        # chord length: for arcs the true centerline is longer, so the
        # chord-based placement bound stays safe
        length = math.hypot(wall.end.x - wall.start.x, wall.end.y - wall.start.y)
        if length >= 70.0:
            walls[k] = _place_openings(rng, wall, exterior, density, length)

    rooms = []
    for refs in rect_refs:
        label = str(rng.choice(ROOM_LABELS))
        rooms.append(Room(label, tuple(f"wall_{k + 1}" for k in refs)))

    return Floorplan(tuple(walls), tuple(rooms), "pixel_1024")


def _corrupt_plan(plan: Floorplan, mode: str, rng) -> Floorplan:
    if mode == "chain_gap":
        referenced = {r for room in plan.rooms for r in room.wall_refs}
        ids = [w.id for w in plan.walls if w.id in referenced]
        wid = str(rng.choice(sorted(ids)))
        ang = rng.uniform(0.0, 2.0 * math.pi)
        dist = rng.uniform(4.0, 9.0)
        dx, dy = _q1(dist * math.cos(ang)), _q1(dist * math.sin(ang))
        walls = tuple(
            replace(w, end=Point2(_q1(w.end.x + dx), _q1(w.end.y + dy))) if w.id == wid else w
            for w in plan.walls
        )
        return replace(plan, walls=walls)
    if mode == "missing_wall":
        referenced = {r for room in plan.rooms for r in room.wall_refs}
        wid = str(rng.choice(sorted(referenced)))
        return replace(plan, walls=tuple(w for w in plan.walls if w.id != wid))
    if mode == "dangling_ref":
        idx = int(rng.integers(0, len(plan.rooms)))
        rooms = tuple(
            Room(r.label, r.wall_refs + ("wall_9999",)) if i == idx else r
            for i, r in enumerate(plan.rooms)
        )
        return replace(plan, rooms=rooms)
    if mode == "malformed_json":
        return plan  # applied at the text level by corpus_documents
    raise ValueError(f"unknown corruption mode {mode!r}")


def _corruption_schedule(spec: GenSpec, n: int) -> dict[int, str]:
    """Evenly spaced plan indices -> mode, exactly floor(n * total_rate) hits."""
    counts = [(mode, round(n * spec.corruption[mode])) for mode in sorted(spec.corruption)]
    modes = [mode for mode, c in counts for _ in range(c)]
    total = len(modes)
    if total == 0:
        return {}
    schedule = {}
    for j, mode in enumerate(modes):
        schedule[math.floor(j * n / total)] = mode
    return schedule


def generate(spec: GenSpec, n: int) -> list[GeneratedPlan]:
    """n seeded plans with a per-plan corruption ledger."""
    if n < 1:
        raise ValueError("n must be >= 1")
    schedule = _corruption_schedule(spec, n)
    out = []
    for i in range(n):
        rng = np.random.default_rng([spec.seed, i])
        plan = _build_plan(rng, spec)
        mode = schedule.get(i)
        if mode is not None:
            plan = _corrupt_plan(plan, mode, rng)
        out.append(GeneratedPlan(plan, {"index": i, "seed": spec.seed, "corruption": mode}))
    return out


def corpus_documents(spec: GenSpec, n: int) -> list[tuple[str, dict]]:
    """Serialized corpus; text-level corruption modes are applied here."""
    docs = []
    for gp in generate(spec, n):
        text = emit(gp.plan)
        if gp.ledger["corruption"] == "malformed_json":
            text = text[:-12]
        docs.append((text, gp.ledger))
    return docs
