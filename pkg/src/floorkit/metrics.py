"""Benchmark evaluation: validity rate, boundary/room IoU, room/opening F1.

``eval_pair`` scores one prediction document against a ground-truth plan.
An invalid prediction scores zero on every geometric metric rather than
being dropped, so refusing to answer is never rewarded. For valid
predictions:

* external IoU compares the two external boundaries;
* rooms are matched greedily by descending IoU among pairs above the
  threshold (ties broken by earliest ground-truth index, then prediction
  index); a matched pair counts toward room F1 only when the labels agree,
  while room IoU averages the geometric overlap of matched pairs (or over
  all ground-truth rooms when ``iou_room_over_all_gt`` is set);
* walls match one-to-one when both endpoints agree within tolerance
  (either orientation; curvature compares sign-flipped when reversed);
* openings count as true positives only on matched walls, with equal
  class, nearby physical centers, and widths within a relative tolerance.

F1 of an empty-vs-empty set is 1.0 (nothing to find, nothing hallucinated).
Aggregation stratifies by whether the ground truth is a Manhattan layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import (
    DEFAULT_CHORD_TOL,
    DEFAULT_SNAP_TOL,
    Floorplan,
    Point2,
    Wall,
    arc_point,
    external_boundary,
    is_manhattan,
    plan_room_polygons,
    polygon_iou,
    to_shapely,
    wall_centerline_length,
)
from .schema_io import parse
from .validator import validate, validate_plan


@dataclass(frozen=True)
class MatchConfig:
    room_iou_threshold: float = 0.5
    wall_endpoint_tol: float = 12.0  # ~1% of the 1024 frame
    opening_center_tol: float = 12.0
    opening_width_rel_tol: float = 0.2
    curvature_tol: float = 0.05
    iou_room_over_all_gt: bool = False

    def __post_init__(self):
        if not 0.0 < self.room_iou_threshold < 1.0:
            raise ValueError("room_iou_threshold must be in (0, 1)")
        for name in ("wall_endpoint_tol", "opening_center_tol", "opening_width_rel_tol", "curvature_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class MatchResult:
    """Detailed pairing outcome shared by evaluation and reward scoring."""

    iou_ext: float
    room_pairs: tuple[tuple[int, int, float], ...]  # (pred idx, gt idx, iou)
    room_tp: int
    room_fp: int
    room_fn: int
    iou_room: float
    f1_room: float
    wall_pairs: tuple[tuple[int, int], ...]
    wall_f1: float
    opening_tp: int
    opening_fp: int
    opening_fn: int
    f1_op: float


@dataclass(frozen=True)
class SampleRecord:
    sample_id: str
    valid: bool
    iou_ext: float
    iou_room: float
    f1_room: float
    f1_op: float
    manhattan: bool

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "valid": self.valid,
            "iou_ext": self.iou_ext,
            "iou_room": self.iou_room,
            "f1_room": self.f1_room,
            "f1_op": self.f1_op,
            "manhattan": self.manhattan,
        }


def _f1(tp: int, fp: int, fn: int) -> float:
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def _walls_match(p: Wall, g: Wall, cfg: MatchConfig) -> float | None:
    """Match cost (max endpoint distance) or None; orientation-insensitive."""
    d_ss = math.hypot(p.start.x - g.start.x, p.start.y - g.start.y)
    d_ee = math.hypot(p.end.x - g.end.x, p.end.y - g.end.y)
    d_se = math.hypot(p.start.x - g.end.x, p.start.y - g.end.y)
    d_es = math.hypot(p.end.x - g.start.x, p.end.y - g.start.y)
    best = None
    if (
        d_ss <= cfg.wall_endpoint_tol
        and d_ee <= cfg.wall_endpoint_tol
        and abs(p.curvature - g.curvature) <= cfg.curvature_tol
    ):
        best = max(d_ss, d_ee)
    if (
        d_se <= cfg.wall_endpoint_tol
        and d_es <= cfg.wall_endpoint_tol
        and abs(p.curvature + g.curvature) <= cfg.curvature_tol
    ):
        rev = max(d_se, d_es)
        best = rev if best is None else min(best, rev)
    return best


def _opening_center(wall: Wall, offset: float) -> Point2:
    length = wall_centerline_length(wall)
    return arc_point(wall, min(1.0, max(0.0, offset / length)))


def match_plans(
    pred: Floorplan,
    gt: Floorplan,
    cfg: MatchConfig = MatchConfig(),
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> MatchResult:
    """Pair rooms, walls and openings of two geometrically valid plans."""
    ext_p = external_boundary(pred, chord_tol, snap_tol).polygon
    ext_g = external_boundary(gt, chord_tol, snap_tol).polygon
    iou_ext = polygon_iou(ext_p, ext_g)

    pred_polys = [to_shapely(p) for p in plan_room_polygons(pred, chord_tol, snap_tol)]
    gt_polys = [to_shapely(p) for p in plan_room_polygons(gt, chord_tol, snap_tol)]

    candidates = []
    for gi, gp in enumerate(gt_polys):
        for pi, pp in enumerate(pred_polys):
            if not gp.intersects(pp):
                continue
            inter = gp.intersection(pp).area
            union = gp.union(pp).area
            iou = inter / union if union > 0 else 0.0
            if iou > cfg.room_iou_threshold:
                candidates.append((-iou, gi, pi, iou))
    candidates.sort()
    pred_used: set[int] = set()
    gt_used: set[int] = set()
    room_pairs: list[tuple[int, int, float]] = []
    room_tp = 0
    for _, gi, pi, iou in candidates:
        if gi in gt_used or pi in pred_used:
            continue
        gt_used.add(gi)
        pred_used.add(pi)
        room_pairs.append((pi, gi, iou))
        if pred.rooms[pi].label == gt.rooms[gi].label:
            room_tp += 1
    room_fp = len(pred.rooms) - room_tp
    room_fn = len(gt.rooms) - room_tp
    if cfg.iou_room_over_all_gt:
        iou_room = sum(iou for _, _, iou in room_pairs) / len(gt.rooms) if gt.rooms else 0.0
    else:
        iou_room = (
            sum(iou for _, _, iou in room_pairs) / len(room_pairs) if room_pairs else 0.0
        )
    f1_room = _f1(room_tp, room_fp, room_fn)

    wall_candidates = []
    for gi, gw in enumerate(gt.walls):
        for pi, pw in enumerate(pred.walls):
            cost = _walls_match(pw, gw, cfg)
            if cost is not None:
                wall_candidates.append((cost, gi, pi))
    wall_candidates.sort()
    wp_used: set[int] = set()
    wg_used: set[int] = set()
    wall_pairs: list[tuple[int, int]] = []
    for _, gi, pi in wall_candidates:
        if gi in wg_used or pi in wp_used:
            continue
        wg_used.add(gi)
        wp_used.add(pi)
        wall_pairs.append((pi, gi))
    wall_tp = len(wall_pairs)
    wall_f1 = _f1(wall_tp, len(pred.walls) - wall_tp, len(gt.walls) - wall_tp)

    op_candidates = []
    for pi, gi in wall_pairs:
        pw, gw = pred.walls[pi], gt.walls[gi]
        for oi, po in enumerate(pw.openings):
            pc = _opening_center(pw, po.offset)
            for oj, go in enumerate(gw.openings):
                if po.kind != go.kind:
                    continue
                if abs(po.width - go.width) > cfg.opening_width_rel_tol * go.width:
                    continue
                gc = _opening_center(gw, go.offset)
                d = math.hypot(pc.x - gc.x, pc.y - gc.y)
                if d <= cfg.opening_center_tol:
                    op_candidates.append((d, gi, oj, pi, oi))
    op_candidates.sort()
    po_used: set[tuple[int, int]] = set()
    go_used: set[tuple[int, int]] = set()
    op_tp = 0
    for _, gi, oj, pi, oi in op_candidates:
        if (gi, oj) in go_used or (pi, oi) in po_used:
            continue
        go_used.add((gi, oj))
        po_used.add((pi, oi))
        op_tp += 1
    n_pred_ops = sum(len(w.openings) for w in pred.walls)
    n_gt_ops = sum(len(w.openings) for w in gt.walls)
    f1_op = _f1(op_tp, n_pred_ops - op_tp, n_gt_ops - op_tp)

    return MatchResult(
        iou_ext=iou_ext,
        room_pairs=tuple(room_pairs),
        room_tp=room_tp,
        room_fp=room_fp,
        room_fn=room_fn,
        iou_room=iou_room,
        f1_room=f1_room,
        wall_pairs=tuple(wall_pairs),
        wall_f1=wall_f1,
        opening_tp=op_tp,
        opening_fp=n_pred_ops - op_tp,
        opening_fn=n_gt_ops - op_tp,
        f1_op=f1_op,
    )


def eval_pair(
    pred_text: str,
    gt: Floorplan,
    cfg: MatchConfig = MatchConfig(),
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
    sample_id: str = "",
) -> SampleRecord:
    gt_report = validate_plan(gt, snap_tol=snap_tol, chord_tol=chord_tol)
    if not gt_report.is_valid:
        codes = ", ".join(f.code for f in gt_report.failures)
        raise ValueError(f"ground truth plan is invalid: {codes}")
    manhattan = is_manhattan(gt)
    report = validate(pred_text, snap_tol=snap_tol, chord_tol=chord_tol)
    if not report.is_valid:
        return SampleRecord(sample_id, False, 0.0, 0.0, 0.0, 0.0, manhattan)
    m = match_plans(parse(pred_text), gt, cfg, chord_tol, snap_tol)
    return SampleRecord(
        sample_id, True, m.iou_ext, m.iou_room, m.f1_room, m.f1_op, manhattan
    )


@dataclass(frozen=True)
class AggregateRow:
    n: int
    validity_rate: float | None
    iou_ext: float | None
    iou_room: float | None
    f1_room: float | None
    f1_op: float | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "validity_rate": self.validity_rate,
            "iou_ext": self.iou_ext,
            "iou_room": self.iou_room,
            "f1_room": self.f1_room,
            "f1_op": self.f1_op,
        }


STRATA = ("manhattan", "non_manhattan", "overall")


def _aggregate(records: list[SampleRecord]) -> AggregateRow:
    n = len(records)
    if n == 0:
        return AggregateRow(0, None, None, None, None, None)
    return AggregateRow(
        n=n,
        validity_rate=sum(r.valid for r in records) / n,
        iou_ext=sum(r.iou_ext for r in records) / n,
        iou_room=sum(r.iou_room for r in records) / n,
        f1_room=sum(r.f1_room for r in records) / n,
        f1_op=sum(r.f1_op for r in records) / n,
    )


@dataclass(frozen=True)
class EvalReport:
    records: tuple[SampleRecord, ...]
    aggregates: dict[str, AggregateRow]

    def to_dict(self) -> dict:
        return {
            "aggregates": {k: v.to_dict() for k, v in self.aggregates.items()},
            "records": [r.to_dict() for r in self.records],
        }

    def to_table(self) -> str:
        """Aligned text table, one row per stratum."""
        headers = ("Subset", "rho_val (%)", "IoU_ext", "IoU_room", "F1_room", "F1_op")
        names = {"manhattan": "Manhattan", "non_manhattan": "Non-Manhattan", "overall": "Overall"}

        def cell(v, pct=False):
            if v is None:
                return "-"
            return f"{100.0 * v:.2f}" if pct else f"{v:.4f}"

        rows = [headers]
        for key in STRATA:
            agg = self.aggregates[key]
            rows.append(
                (
                    names[key],
                    cell(agg.validity_rate, pct=True),
                    cell(agg.iou_ext),
                    cell(agg.iou_room),
                    cell(agg.f1_room),
                    cell(agg.f1_op),
                )
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
        lines = []
        for i, row in enumerate(rows):
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def eval_benchmark(
    pairs,
    cfg: MatchConfig = MatchConfig(),
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
    jobs: int = 1,
) -> EvalReport:
    """Evaluate (sample_id, pred_text, gt_plan) triples and stratify.

    Per-pair scoring is pure, so ``jobs > 1`` fans it out over a thread
    pool; record order always follows the input order.
    """
    pairs = list(pairs)

    def one(item):
        sid, pred_text, gt = item
        return eval_pair(pred_text, gt, cfg, chord_tol, snap_tol, sample_id=sid)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, pairs))
    else:
        records = [one(p) for p in pairs]
    if not records:
        raise ValueError("eval_benchmark requires at least one pair")
    aggregates = {
        "manhattan": _aggregate([r for r in records if r.manhattan]),
        "non_manhattan": _aggregate([r for r in records if not r.manhattan]),
        "overall": _aggregate(records),
    }
    return EvalReport(tuple(records), aggregates)
