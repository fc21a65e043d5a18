from __future__ import annotations

import json
import math

import pytest

from floorkit.generator import GenSpec, generate
from floorkit.geometry import (
    Floorplan,
    Point2,
    arc_point,
    external_boundary,
    is_manhattan,
    polygon_iou,
    wall_centerline_length,
)
from floorkit.schema_io import (
    JSONSyntaxError,
    NormalizationTransform,
    SchemaError,
    emit,
    normalize,
    parse,
)

from conftest import square_plan

MINIMAL = """
{
  "walls": [
    {"id": "wall_1", "start": [0.0, 0.0], "end": [100.0, 0.0], "thickness": 6.0, "curvature": 0.0, "openings": []},
    {"id": "wall_2", "start": [100.0, 0.0], "end": [100.0, 100.0], "thickness": 6.0, "curvature": 0.0, "openings": []},
    {"id": "wall_3", "start": [100.0, 100.0], "end": [0.0, 100.0], "thickness": 6.0, "curvature": 0.0, "openings": []},
    {"id": "wall_4", "start": [0.0, 100.0], "end": [0.0, 0.0], "thickness": 6.0, "curvature": 0.0, "openings": []}
  ],
  "rooms": [
    {"label": "living_room", "walls": ["wall_1", "wall_2", "wall_3", "wall_4"]}
  ]
}
"""


def test_parse_minimal_square():
    plan = parse(MINIMAL)
    assert len(plan.walls) == 4
    assert len(plan.rooms) == 1
    assert plan.frame == "pixel_1024"
    assert plan.rooms[0].wall_refs == ("wall_1", "wall_2", "wall_3", "wall_4")


def test_parse_dangling_reference():
    doc = MINIMAL.replace('"wall_4"]', '"wall_9"]')
    with pytest.raises(SchemaError) as exc:
        parse(doc)
    assert exc.value.code == "DANGLING_REF"
    assert "wall_9" in str(exc.value)


def test_parse_malformed_json_reports_offset():
    with pytest.raises(JSONSyntaxError) as exc:
        parse('{"walls": [}')
    assert exc.value.offset == 11


def test_parse_rejects_unknown_fields():
    doc = json.loads(MINIMAL)
    doc["walls"][0]["color"] = "red"
    with pytest.raises(SchemaError) as exc:
        parse(json.dumps(doc))
    assert "color" in str(exc.value)


def test_parse_rejects_rooms_before_walls():
    doc = json.loads(MINIMAL)
    flipped = {"rooms": doc["rooms"], "walls": doc["walls"]}
    with pytest.raises(SchemaError) as exc:
        parse(json.dumps(flipped))
    assert "before rooms" in str(exc.value)


def test_parse_rejects_duplicate_ids():
    doc = json.loads(MINIMAL)
    doc["walls"][1]["id"] = "wall_1"
    with pytest.raises(SchemaError):
        parse(json.dumps(doc))


def test_parse_rejects_nonfinite_numbers():
    doc = MINIMAL.replace("6.0", "NaN", 1)
    with pytest.raises(JSONSyntaxError):
        parse(doc)


def test_parse_rejects_bad_class():
    doc = json.loads(MINIMAL)
    doc["walls"][0]["openings"] = [{"class": "hatch", "offset": 50.0, "width": 10.0}]
    with pytest.raises(SchemaError):
        parse(json.dumps(doc))


def test_emit_deterministic_and_ordered():
    plan = parse(MINIMAL)
    a, b = emit(plan), emit(plan)
    assert a == b
    wall_obj = json.loads(a)["walls"][0]
    assert list(wall_obj.keys()) == ["id", "start", "end", "thickness", "curvature", "openings"]
    doc = json.loads(a)
    assert list(doc.keys()) == ["frame", "walls", "rooms"]
    assert a.index('"walls"') < a.index('"rooms"')


def test_emit_parse_round_trip_generated():
    plans = [gp.plan for gp in generate(GenSpec(seed=13), 40)]
    for plan in plans:
        text = emit(plan)
        assert parse(text) == plan
        # canonicalization is idempotent
        assert emit(parse(text)) == text


def test_emit_one_decimal_coordinates():
    plan = square_plan(100.0)
    text = emit(plan)
    assert '"start":[0.0,0.0]' in text
    assert '"curvature":0.000' in text


# --- normalize ----------------------------------------------------------------


def world(plan: Floorplan) -> Floorplan:
    return Floorplan(plan.walls, plan.rooms, "world_mm")


def test_normalize_longer_edge_to_1024():
    # plan bbox 4096x2048 mm rendered on a 2048x1024 image: the world
    # corner that lands on pixel (2048, 1024) normalizes to (1024, 512)
    from floorkit.geometry import Room, Wall

    walls = (
        Wall("wall_1", Point2(0, 0), Point2(4096, 0), 10.0),
        Wall("wall_2", Point2(4096, 0), Point2(4096, 2048), 10.0),
        Wall("wall_3", Point2(4096, 2048), Point2(0, 2048), 10.0),
        Wall("wall_4", Point2(0, 2048), Point2(0, 0), 10.0),
    )
    plan = Floorplan(walls, (Room("hall", tuple(w.id for w in walls)),), "world_mm")
    normed, t = normalize(plan, 2048, 1024)
    assert t.scale == pytest.approx(0.25)
    corner = t.apply(Point2(4096, 2048))
    assert (corner.x, corner.y) == (pytest.approx(1024.0), pytest.approx(512.0))
    assert normed.frame == "pixel_1024"
    assert normed.walls[1].end.x == pytest.approx(1024.0)


def test_normalize_square_identity_scale():
    plan = world(square_plan(1024.0))
    normed, t = normalize(plan, 1024, 1024)
    assert t.scale == pytest.approx(1.0)
    assert normed.walls[0].end.x == pytest.approx(1024.0)


def test_normalize_preserves_curvature_and_arc_shape():
    plans = [gp.plan for gp in generate(GenSpec(seed=21, non_manhattan_p=1.0, curved_p=1.0), 100)]
    for plan in plans:
        wplan = Floorplan(plan.walls, plan.rooms, "world_mm")
        normed, t = normalize(wplan, 800, 600)
        for w0, w1 in zip(wplan.walls, normed.walls):
            assert w1.curvature == w0.curvature
            # apex of the mapped arc equals the mapped apex of the original
            apex0 = t.apply(arc_point(w0, 0.5))
            apex1 = arc_point(w1, 0.5)
            assert math.hypot(apex0.x - apex1.x, apex0.y - apex1.y) < 1e-6
            assert wall_centerline_length(w1) == pytest.approx(
                wall_centerline_length(w0) * t.scale, rel=1e-9
            )


def test_normalize_preserves_manhattan(mixed_corpus):
    for plan in mixed_corpus[:10]:
        wplan = Floorplan(plan.walls, plan.rooms, "world_mm")
        normed, _ = normalize(wplan, 1600, 1200)
        assert is_manhattan(wplan) == is_manhattan(normed)


def test_normalize_iou_between_two_plans_invariant(mixed_corpus):
    # prediction and target share one image frame, so mapping both through
    # the image's normalization transform leaves their IoU unchanged; the
    # discretization tolerance is a length, so it scales with the frame to
    # keep the ring vertices in one-to-one correspondence
    from floorkit.geometry import scale_shift_plan

    for a, b in zip(mixed_corpus[:6], mixed_corpus[6:12]):
        wa = Floorplan(a.walls, a.rooms, "world_mm")
        wb = Floorplan(b.walls, b.rooms, "world_mm")
        before = polygon_iou(external_boundary(wa).polygon, external_boundary(wb).polygon)
        na, t = normalize(wa, 1600, 1200)
        nb = scale_shift_plan(wb, t.scale, t.shift.x, t.shift.y, "pixel_1024")
        ct, st = 0.5 * t.scale, 1.0 * t.scale
        after = polygon_iou(
            external_boundary(na, chord_tol=ct, snap_tol=st).polygon,
            external_boundary(nb, chord_tol=ct, snap_tol=st).polygon,
        )
        assert after == pytest.approx(before, abs=1e-9)


def test_normalize_transform_round_trip():
    t = NormalizationTransform(0.37, Point2(11.0, -4.0))
    p = Point2(123.456, -78.9)
    q = t.invert(t.apply(p))
    assert q.x == pytest.approx(p.x, rel=1e-9)
    assert q.y == pytest.approx(p.y, rel=1e-9)


def test_normalize_rejects_degenerate():
    from floorkit.geometry import Room, Wall

    walls = (
        Wall("wall_1", Point2(0, 0), Point2(10, 0), 1.0),
        Wall("wall_2", Point2(10, 0), Point2(0, 0), 1.0),
        Wall("wall_3", Point2(0, 0), Point2(10, 0), 1.0),
    )
    flat = Floorplan(walls, (), "world_mm")
    with pytest.raises(ValueError):
        normalize(flat, 100, 100)
    with pytest.raises(ValueError):
        normalize(Floorplan(square_plan(10).walls, (), "world_mm"), 0, 100)
    with pytest.raises(ValueError):
        normalize(square_plan(10), 100, 100)  # wrong frame
