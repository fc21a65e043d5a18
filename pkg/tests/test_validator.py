from __future__ import annotations

import json

import pytest

from floorkit.generator import GenSpec, corpus_documents
from floorkit.geometry import Floorplan, Opening, Point2, Room, Wall
from floorkit.schema_io import emit
from floorkit.validator import validate, validate_plan, validity_rate

from conftest import square_plan


def test_valid_square_fixture():
    report = validate(emit(square_plan()), snap_tol=1.0)
    assert report.is_valid
    assert report.failures == ()
    assert report.stage_reached == "complete"


def test_chain_gap_names_wall_pair():
    plan = square_plan(100.0)
    walls = list(plan.walls)
    w = walls[1]
    walls[1] = Wall(w.id, Point2(w.start.x + 5, w.start.y), w.end, w.thickness)
    report = validate(emit(Floorplan(tuple(walls), plan.rooms)), snap_tol=1.0)
    assert not report.is_valid
    assert report.stage_reached == "rooms"
    assert report.failures[0].code == "CHAIN_GAP"
    assert set(report.failures[0].elements) == {"wall_1", "wall_2"}


def test_opening_overhang():
    # span [offset - w/2, offset + w/2] = [-1, 3] on a length-3 wall
    walls = (
        Wall("wall_1", Point2(0, 0), Point2(3, 0), 0.5, 0.0, (Opening("door", 1.0, 4.0),)),
        Wall("wall_2", Point2(3, 0), Point2(3, 3), 0.5),
        Wall("wall_3", Point2(3, 3), Point2(0, 3), 0.5),
        Wall("wall_4", Point2(0, 3), Point2(0, 0), 0.5),
    )
    plan = Floorplan(walls, (Room("a", tuple(w.id for w in walls)),))
    report = validate_plan(plan, snap_tol=0.1)
    assert not report.is_valid
    assert report.failures[0].code == "OPENING_OVERHANG"
    assert report.stage_reached == "invariants"


def test_failure_codes_by_stage():
    assert validate("{not json").failures[0].code == "SYNTAX"
    assert validate("{not json").stage_reached == "syntax"
    assert validate('{"walls": [], "extra": 1, "rooms": []}').failures[0].code == "SCHEMA"

    degenerate = Floorplan(
        (
            Wall("wall_1", Point2(0, 0), Point2(0, 0), 1.0),
            Wall("wall_2", Point2(0, 0), Point2(1, 0), 1.0),
            Wall("wall_3", Point2(1, 0), Point2(1, 1), 1.0),
        ),
        (Room("a", ("wall_1", "wall_2", "wall_3")),),
    )
    report = validate_plan(degenerate)
    assert report.failures[0].code == "DEGENERATE_WALL"

    over_curved = Floorplan(
        (Wall("wall_1", Point2(0, 0), Point2(1, 0), 1.0, 0.75),),
        (),
    )
    assert validate_plan(over_curved).failures[0].code == "SCHEMA"

    no_rooms = Floorplan(square_plan().walls, ())
    report = validate_plan(no_rooms, snap_tol=0.1)
    assert report.failures[0].code == "NO_ROOMS"
    assert report.stage_reached == "boundary"


def test_dangling_ref_via_validate():
    plan = square_plan()
    rooms = (Room("a", plan.rooms[0].wall_refs + ("wall_404",)),)
    text = emit(Floorplan(plan.walls, rooms))
    report = validate(text)
    assert not report.is_valid
    assert report.failures[0].code == "DANGLING_REF"
    assert report.stage_reached == "schema"


def test_duplicate_wall_is_warning_not_failure():
    plan = square_plan(100.0)
    dup = Wall("wall_5", plan.walls[0].end, plan.walls[0].start, plan.walls[0].thickness)
    doubled = Floorplan(plan.walls + (dup,), plan.rooms)
    report = validate_plan(doubled, snap_tol=1.0)
    assert report.is_valid
    assert any(w.code == "DUPLICATE_WALL" for w in report.warnings)


def test_generator_soundness_no_corruption():
    docs = corpus_documents(GenSpec(seed=19), 200)
    reports = [validate(text) for text, _ in docs]
    assert validity_rate(reports) == 1.0


def test_snap_tol_monotonicity(mixed_corpus):
    # loosening the tolerance never invalidates a valid plan
    for plan in mixed_corpus[:20]:
        text = emit(plan)
        assert validate(text, snap_tol=1.0).is_valid
        assert validate(text, snap_tol=2.0).is_valid
        assert validate(text, snap_tol=5.0).is_valid


def test_validate_deterministic():
    docs = corpus_documents(GenSpec(seed=23, corruption={"chain_gap": 0.5}), 10)
    for text, _ in docs:
        a = validate(text).to_dict()
        b = validate(text).to_dict()
        assert a == b


def test_validity_rate_trivia():
    docs = corpus_documents(GenSpec(seed=29), 4)
    reports = [validate(t) for t, _ in docs]
    assert validity_rate(reports) == 1.0
    bad = validate("{")
    assert validity_rate(reports[:2] + [bad, bad]) == 0.5
    with pytest.raises(ValueError):
        validity_rate([])


@pytest.mark.parametrize("rate", [0.05, 0.10, 0.25])
def test_corrupted_corpus_rate_matches_ledger(rate):
    n = 80
    spec = GenSpec(seed=31, corruption={"chain_gap": rate / 2, "malformed_json": rate / 2})
    docs = corpus_documents(spec, n)
    reports = [validate(text) for text, _ in docs]
    corrupted = [ledger["corruption"] for _, ledger in docs]
    # every corrupted document is invalid, every clean one valid
    for report, mode in zip(reports, corrupted):
        assert report.is_valid == (mode is None)
    assert validity_rate(reports) == 1.0 - rate


def test_report_serializes_to_json():
    report = validate(emit(square_plan()))
    payload = json.loads(json.dumps(report.to_dict()))
    assert payload["is_valid"] is True
