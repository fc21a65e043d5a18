"""Watertightness validation: the binary predicate behind validity scoring.

``validate`` runs staged checks over a document:

    syntax -> schema -> invariants -> rooms -> boundary

The first stage that fails short-circuits the later geometric stages (their
inputs would be meaningless) but the report records how far checking got.
Failures are data, never exceptions; each carries one of the codes below
plus the offending element ids.

Codes: SYNTAX, SCHEMA, DANGLING_REF, DEGENERATE_WALL, OPENING_OVERHANG,
CHAIN_GAP, SELF_INTERSECT, NO_ROOMS. Range violations (curvature beyond the
semicircle cap, nonpositive widths, too-short room cycles) map to SCHEMA;
duplicate walls and a disjoint room union are warnings, not failures, so
they do not perturb the validity rate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import (
    DEFAULT_CHORD_TOL,
    DEFAULT_SNAP_TOL,
    MAX_CURVATURE,
    ChainGapError,
    EmptyPlanError,
    Floorplan,
    RoomReferenceError,
    SelfIntersectionError,
    Wall,
    _chord,
    external_boundary,
    room_polygon,
    wall_centerline_length,
)
from .schema_io import JSONSyntaxError, SchemaError, parse

STAGES = ("syntax", "schema", "invariants", "rooms", "boundary", "complete")


@dataclass(frozen=True)
class ValidationFailure:
    code: str
    message: str
    elements: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "elements": list(self.elements)}


@dataclass(frozen=True)
class ValidityReport:
    is_valid: bool
    failures: tuple[ValidationFailure, ...]
    warnings: tuple[ValidationFailure, ...] = ()
    stage_reached: str = "complete"

    def to_dict(self) -> dict:
        return {
            "is_valid": self.is_valid,
            "stage_reached": self.stage_reached,
            "failures": [f.to_dict() for f in self.failures],
            "warnings": [w.to_dict() for w in self.warnings],
        }


def _fail(failures: list[ValidationFailure], stage: str) -> ValidityReport:
    return ValidityReport(False, tuple(failures), (), stage)


def validate(
    text: str,
    snap_tol: float = DEFAULT_SNAP_TOL,
    chord_tol: float = DEFAULT_CHORD_TOL,
) -> ValidityReport:
    """Full pipeline over a raw document string."""
    try:
        plan = parse(text)
    except JSONSyntaxError as exc:
        return _fail([ValidationFailure("SYNTAX", str(exc))], "syntax")
    except SchemaError as exc:
        return _fail([ValidationFailure(exc.code, str(exc))], "schema")
    return validate_plan(plan, snap_tol=snap_tol, chord_tol=chord_tol)


def _wall_invariants(wall: Wall, failures: list[ValidationFailure]) -> bool:
    """Per-wall checks; returns False when later opening checks make no sense."""
    ok = True
    if _chord(wall) <= 1e-9:
        failures.append(
            ValidationFailure(
                "DEGENERATE_WALL", f"wall {wall.id!r} has coincident endpoints", (wall.id,)
            )
        )
        ok = False
    if wall.thickness <= 0:
        failures.append(
            ValidationFailure(
                "DEGENERATE_WALL",
                f"wall {wall.id!r} thickness must be positive, got {wall.thickness}",
                (wall.id,),
            )
        )
    if abs(wall.curvature) > MAX_CURVATURE:
        failures.append(
            ValidationFailure(
                "SCHEMA",
                f"wall {wall.id!r} curvature {wall.curvature} exceeds +/-{MAX_CURVATURE}",
                (wall.id,),
            )
        )
        ok = False
    return ok


def validate_plan(
    plan: Floorplan,
    snap_tol: float = DEFAULT_SNAP_TOL,
    chord_tol: float = DEFAULT_CHORD_TOL,
) -> ValidityReport:
    """Geometric stages for an already-parsed plan."""
    failures: list[ValidationFailure] = []
    warnings: list[ValidationFailure] = []

    for wall in plan.walls:
        if not _wall_invariants(wall, failures):
            continue
        length = wall_centerline_length(wall)
        for i, op in enumerate(wall.openings):
            where = f"wall {wall.id!r} opening {i}"
            if op.width <= 0:
                failures.append(
                    ValidationFailure(
                        "SCHEMA", f"{where}: width must be positive, got {op.width}", (wall.id,)
                    )
                )
                continue
            if op.offset - op.width / 2 < 0 or op.offset + op.width / 2 > length:
                failures.append(
                    ValidationFailure(
                        "OPENING_OVERHANG",
                        f"{where}: span [{op.offset - op.width / 2:.3g}, "
                        f"{op.offset + op.width / 2:.3g}] exceeds centerline length {length:.6g}",
                        (wall.id,),
                    )
                )

    known = {w.id for w in plan.walls}
    for room in plan.rooms:
        if len(room.wall_refs) < 3:
            failures.append(
                ValidationFailure(
                    "SCHEMA",
                    f"room {room.label!r} references {len(room.wall_refs)} walls, need >= 3",
                )
            )
        dupes = sorted({r for r in room.wall_refs if room.wall_refs.count(r) > 1})
        if dupes:
            failures.append(
                ValidationFailure(
                    "SCHEMA",
                    f"room {room.label!r} traverses walls {dupes} more than once",
                    tuple(dupes),
                )
            )
        missing = sorted({r for r in room.wall_refs if r not in known})
        if missing:
            failures.append(
                ValidationFailure(
                    "DANGLING_REF",
                    f"room {room.label!r} references undefined walls {missing}",
                    tuple(missing),
                )
            )
    if failures:
        return _fail(failures, "invariants")

    for room in plan.rooms:
        try:
            room_polygon(plan, room, chord_tol, snap_tol)
        except ChainGapError as exc:
            failures.append(ValidationFailure("CHAIN_GAP", str(exc), exc.elements))
        except SelfIntersectionError as exc:
            failures.append(ValidationFailure("SELF_INTERSECT", str(exc), exc.elements))
        except RoomReferenceError as exc:
            failures.append(ValidationFailure("SCHEMA", str(exc), exc.elements))
    if failures:
        return _fail(failures, "rooms")

    try:
        boundary = external_boundary(plan, chord_tol, snap_tol)
    except EmptyPlanError as exc:
        return _fail([ValidationFailure("NO_ROOMS", str(exc))], "boundary")
    for note in boundary.warnings:
        warnings.append(ValidationFailure("MULTI_COMPONENT", note))

    for i, a in enumerate(plan.walls):
        for b in plan.walls[i + 1 :]:
            if _duplicate_walls(a, b):
                warnings.append(
                    ValidationFailure(
                        "DUPLICATE_WALL",
                        f"walls {a.id!r} and {b.id!r} coincide",
                        (a.id, b.id),
                    )
                )

    return ValidityReport(True, (), tuple(warnings), "complete")


def _duplicate_walls(a: Wall, b: Wall) -> bool:
    if a.thickness != b.thickness:
        return False
    same = a.start == b.start and a.end == b.end and a.curvature == b.curvature
    flipped = a.start == b.end and a.end == b.start and a.curvature == -b.curvature
    return same or flipped


def validity_rate(reports) -> float:
    reports = list(reports)
    if not reports:
        raise ValueError("validity_rate requires at least one report")
    return sum(1 for r in reports if r.is_valid) / len(reports)
