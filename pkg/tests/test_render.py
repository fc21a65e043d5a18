from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from floorkit.geometry import (
    Floorplan,
    Opening,
    Point2,
    Polygon,
    Room,
    Wall,
    external_boundary,
    polygon_iou,
)
from floorkit.render import (
    RenderStyle,
    RenderTransform,
    project,
    raster_iou,
    rasterize,
    rasterize_polygon,
    render_svg,
    unproject,
    write_pgm,
)

from conftest import square_plan

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def golden_plan() -> Floorplan:
    walls = (
        Wall("wall_1", Point2(0, 0), Point2(100, 0), 6.0, -0.5),
        Wall("wall_2", Point2(100, 0), Point2(100, 100), 6.0, 0.0, (Opening("window", 50.0, 40.0),)),
        Wall("wall_3", Point2(100, 100), Point2(0, 100), 6.0),
        Wall("wall_4", Point2(0, 100), Point2(0, 0), 6.0, 0.0, (Opening("door", 50.0, 30.0),)),
    )
    return Floorplan(
        walls, (Room("living_room", ("wall_1", "wall_2", "wall_3", "wall_4")),), "pixel_1024"
    )


# --- projection ----------------------------------------------------------------


def test_project_identity():
    plan = square_plan()
    t = RenderTransform(1.0, Point2(0.0, 0.0))
    assert project(plan, t).walls == plan.walls


def test_project_arithmetic():
    t = RenderTransform(0.1, Point2(50.0, 50.0))
    p = t.apply(Point2(1000.0, 2000.0))
    assert (p.x, p.y) == (pytest.approx(150.0), pytest.approx(250.0))


def test_project_round_trip_many(mixed_corpus):
    t = RenderTransform(0.37, Point2(19.5, -44.25))
    for plan in mixed_corpus[:30]:
        world = Floorplan(plan.walls, plan.rooms, "world_mm")
        back = unproject(project(world, t), t)
        for w0, w1 in zip(world.walls, back.walls):
            assert math.hypot(w1.start.x - w0.start.x, w1.start.y - w0.start.y) < 1e-9
            assert math.hypot(w1.end.x - w0.end.x, w1.end.y - w0.end.y) < 1e-9
            assert w1.thickness == pytest.approx(w0.thickness, rel=1e-12)
            assert w1.curvature == w0.curvature


def test_project_preserves_iou(mixed_corpus):
    a, b = mixed_corpus[0], mixed_corpus[3]
    t = RenderTransform(0.25, Point2(7.0, 13.0))
    before = polygon_iou(external_boundary(a).polygon, external_boundary(b).polygon)
    after = polygon_iou(
        external_boundary(project(a, t)).polygon,
        external_boundary(project(b, t)).polygon,
    )
    assert after == pytest.approx(before, abs=1e-12)


# --- rasterization ---------------------------------------------------------------


def test_rasterize_unit_square_cell_count():
    # unit room drawn on a 100-unit canvas at 100x100: one cell's worth of
    # area, up to the boundary band
    plan = square_plan(1.0)
    grid = rasterize(plan, 100, bounds=(0.0, 0.0, 100.0, 100.0), snap_tol=0.01)
    assert grid.shape == (100, 100)
    assert 0 <= grid.sum() <= 4


def test_rasterize_full_canvas_square():
    plan = square_plan(64.0)
    grid = rasterize(plan, 64, bounds=(0.0, 0.0, 64.0, 64.0), snap_tol=0.01)
    assert grid.sum() == 64 * 64  # every cell center inside


def test_rasterized_iou_tracks_polygon_iou(mixed_corpus):
    rng = np.random.default_rng(14)
    plans = mixed_corpus[:10]
    for _ in range(10):
        i, j = rng.integers(0, len(plans), 2)
        a = external_boundary(plans[i]).polygon
        b = external_boundary(plans[j]).polygon
        exact = polygon_iou(a, b)
        approx = raster_iou(a, b, resolution=512)
        assert approx == pytest.approx(exact, abs=2 / 512 * 10)


def test_rasterized_iou_empty_intersection():
    a = Polygon((Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)))
    b = Polygon((Point2(5, 5), Point2(6, 5), Point2(6, 6), Point2(5, 6)))
    assert raster_iou(a, b, 256) == 0.0


def test_rasterize_polygon_respects_holes():
    outer = (Point2(0, 0), Point2(4, 0), Point2(4, 4), Point2(0, 4))
    hole = (Point2(1, 1), Point2(1, 3), Point2(3, 3), Point2(3, 1))
    grid = rasterize_polygon(Polygon(outer, (hole,)), 128)
    frac = grid.sum() / grid.size
    assert frac == pytest.approx((16 - 4) / 16, abs=0.02)


def test_rasterize_resolution_floor():
    with pytest.raises(ValueError):
        rasterize(square_plan(), 32)


# --- SVG -------------------------------------------------------------------------


def test_svg_matches_golden(tmp_path):
    svg = render_svg(golden_plan(), RenderStyle(snap_tol=0.01))
    golden = (GOLDEN_DIR / "curved_room.svg").read_text(encoding="utf-8")
    assert svg == golden


def test_svg_deterministic(mixed_corpus):
    plan = mixed_corpus[0]
    assert render_svg(plan) == render_svg(plan)


def test_svg_curved_wall_uses_arc_command():
    svg = render_svg(golden_plan(), RenderStyle(snap_tol=0.01))
    walls_group = svg.split('<g id="walls">')[1].split("</g>")[0]
    assert " A " in walls_group  # native arc, not a polyline
    assert "living_room" in svg


def test_svg_well_formed_xml(mixed_corpus):
    for plan in mixed_corpus[:5]:
        ET.fromstring(render_svg(plan))


def test_svg_rejects_invalid_plan():
    plan = square_plan()
    broken = Floorplan(plan.walls[:-1], plan.rooms)  # dangling room reference
    with pytest.raises(ValueError):
        render_svg(broken)


def test_write_pgm(tmp_path):
    grid = rasterize(square_plan(64.0), 64, bounds=(0.0, 0.0, 64.0, 64.0), snap_tol=0.01)
    path = tmp_path / "plan.pgm"
    write_pgm(grid, path)
    text = path.read_text(encoding="ascii").split()
    assert text[0] == "P2"
    assert text[1] == "64" and text[2] == "64"
    assert text[3] == "255"
    assert set(text[4:]) == {"0"}  # fully occupied -> all black
