from __future__ import annotations

import pytest

from floorkit.generator import GenSpec, generate
from floorkit.geometry import Floorplan, Point2, Room, Wall


def square_plan(side: float = 100.0, label: str = "living_room") -> Floorplan:
    """Axis-aligned square room, walls chained counterclockwise."""
    s = side
    walls = (
        Wall("wall_1", Point2(0, 0), Point2(s, 0), 6.0),
        Wall("wall_2", Point2(s, 0), Point2(s, s), 6.0),
        Wall("wall_3", Point2(s, s), Point2(0, s), 6.0),
        Wall("wall_4", Point2(0, s), Point2(0, 0), 6.0),
    )
    return Floorplan(walls, (Room(label, ("wall_1", "wall_2", "wall_3", "wall_4")),))


def curved_square_plan(side: float = 100.0, curvature: float = -0.5) -> Floorplan:
    """Square room whose bottom wall is an arc bulging outward (down)."""
    plan = square_plan(side)
    walls = list(plan.walls)
    walls[0] = Wall("wall_1", Point2(0, 0), Point2(side, 0), 6.0, curvature)
    return Floorplan(tuple(walls), plan.rooms)


@pytest.fixture(scope="session")
def mixed_corpus():
    """60 uncorrupted plans: Manhattan, rotated/sheared, and curved."""
    return [gp.plan for gp in generate(GenSpec(seed=101), 60)]


@pytest.fixture(scope="session")
def small_corpus():
    return [gp.plan for gp in generate(GenSpec(seed=77, room_range=(4, 6)), 12)]
