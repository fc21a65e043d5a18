"""Deterministic vector rendering and rasterization.

Three concerns live here:

* ``project``/``unproject``: exact similarity transforms between the world
  frame and the pixel frame, with the transform matrix kept explicit so the
  mapping is invertible to float precision.
* ``rasterize`` and the ``raster_*`` helpers: an even-odd crossing-parity
  scanline fill, deliberately independent of the polygon-boolean backend so
  it can serve as an oracle for area and IoU computations.
* ``render_svg``: a CAD-style SVG writer. Output is assembled from fixed
  format strings, so identical plans yield byte-identical documents.

PGM (P2) is the only raster interchange format: plain text, no codec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEFAULT_CHORD_TOL,
    DEFAULT_SNAP_TOL,
    FRAME_PIXEL,
    FRAME_WORLD,
    Floorplan,
    Point2,
    Polygon,
    Wall,
    _wall_arc,
    arc_point,
    plan_bounds,
    plan_room_polygons,
    scale_shift_plan,
    to_shapely,
    wall_centerline_length,
    wall_footprint,
)


@dataclass(frozen=True)
class RenderTransform:
    """Similarity transform p -> scale*p + shift onto a pixel canvas."""

    scale: float
    shift: Point2
    canvas: tuple[int, int] = (1024, 1024)

    def apply(self, p: Point2) -> Point2:
        return Point2(p.x * self.scale + self.shift.x, p.y * self.scale + self.shift.y)

    def invert(self, p: Point2) -> Point2:
        return Point2((p.x - self.shift.x) / self.scale, (p.y - self.shift.y) / self.scale)


def project(plan: Floorplan, transform: RenderTransform) -> Floorplan:
    """Map a world-frame plan into pixel space; curvature is untouched."""
    return scale_shift_plan(
        plan, transform.scale, transform.shift.x, transform.shift.y, FRAME_PIXEL
    )


def unproject(plan: Floorplan, transform: RenderTransform) -> Floorplan:
    inv = 1.0 / transform.scale
    return scale_shift_plan(
        plan, inv, -transform.shift.x * inv, -transform.shift.y * inv, FRAME_WORLD
    )


# --- crossing-parity rasterization -----------------------------------------


def _ring_crossings(rings, oy: float, cell: float, ny: int):
    """All (row, x) intersections of ring edges with the scan-row centers.

    Rows are the half-open span [y_lo, y_hi) of each edge, so shared
    vertices and horizontal edges never double-count. Fully vectorized:
    edges expand into their per-row crossings via a ragged repeat.
    """
    all_rows = []
    all_xs = []
    for ring in rings:
        pts = np.asarray([(p.x, p.y) for p in ring], dtype=float)
        if len(pts) < 3:
            continue
        closed = np.vstack([pts, pts[:1]])
        x0, y0 = closed[:-1, 0], closed[:-1, 1]
        x1, y1 = closed[1:, 0], closed[1:, 1]
        swap = y0 > y1
        x0s = np.where(swap, x1, x0)
        y0s = np.where(swap, y1, y0)
        x1s = np.where(swap, x0, x1)
        y1s = np.where(swap, y0, y1)
        r_lo = np.maximum(np.ceil((y0s - oy) / cell - 0.5), 0).astype(np.int64)
        r_hi = np.minimum(np.ceil((y1s - oy) / cell - 0.5), ny).astype(np.int64)
        counts = np.maximum(r_hi - r_lo, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        edge_of = np.repeat(np.arange(len(counts)), counts)
        base = np.repeat(np.cumsum(counts) - counts, counts)
        rows = np.repeat(r_lo, counts) + (np.arange(total) - base)
        yc = oy + (rows + 0.5) * cell
        dy = y1s[edge_of] - y0s[edge_of]
        xs = x0s[edge_of] + (yc - y0s[edge_of]) * (x1s[edge_of] - x0s[edge_of]) / dy
        all_rows.append(rows)
        all_xs.append(xs)
    if not all_rows:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return np.concatenate(all_rows), np.concatenate(all_xs)


def _fill_rings(rings, ox: float, oy: float, cell: float, nx: int, ny: int) -> np.ndarray:
    """Even-odd fill of cell centers against a set of rings.

    Crossings become parity flips at the first cell center right of each
    crossing; a cumulative sum recovers inside/outside. uint8 wraparound is
    harmless: parity survives mod 256.
    """
    rows, xs = _ring_crossings(rings, oy, cell, ny)
    flips = np.zeros((ny, nx + 1), dtype=np.uint8)
    if len(rows):
        cols = np.ceil((xs - ox) / cell - 0.5).astype(np.int64)
        np.clip(cols, 0, nx, out=cols)
        np.add.at(flips, (rows, cols), 1)
    return (np.cumsum(flips, axis=1)[:, :nx] % 2).astype(bool)


def _grid_geometry(bounds, resolution: int):
    minx, miny, maxx, maxy = bounds
    w, h = maxx - minx, maxy - miny
    if w <= 0 or h <= 0:
        raise ValueError("degenerate bounds for rasterization")
    cell = max(w, h) / resolution
    nx = max(1, math.ceil(w / cell - 1e-9))
    ny = max(1, math.ceil(h / cell - 1e-9))
    return minx, miny, cell, nx, ny


def rasterize_polygon(poly: Polygon, resolution: int, bounds=None) -> np.ndarray:
    """Occupancy grid of a polygon (holes respected via even-odd parity)."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    ox, oy, cell, nx, ny = _grid_geometry(bounds or poly.bounds(), resolution)
    rings = [poly.exterior, *poly.holes]
    return _fill_rings(rings, ox, oy, cell, nx, ny)


def raster_polygon_area(poly: Polygon, resolution: int = 4096) -> float:
    """Scanline area: per row, exact covered x-intervals times row height.

    Discretization only happens across rows, so the estimate converges
    quadratically in the resolution.
    """
    bounds = poly.bounds()
    _, oy, cell, _, ny = _grid_geometry(bounds, resolution)
    rows, xs = _ring_crossings([poly.exterior, *poly.holes], oy, cell, ny)
    if len(rows) == 0:
        return 0.0
    order = np.lexsort((xs, rows))
    rows, xs = rows[order], xs[order]
    # rank of each crossing within its row: even ranks enter, odd ranks exit
    first = np.concatenate([[True], rows[1:] != rows[:-1]])
    idx = np.arange(len(rows))
    start = np.maximum.accumulate(np.where(first, idx, 0))
    rank = idx - start
    signs = np.where(rank % 2 == 0, -1.0, 1.0)
    return float(np.sum(signs * xs)) * cell


def raster_iou(a: Polygon, b: Polygon, resolution: int = 2048) -> float:
    """Grid-sampled IoU over the joint bounding box of both polygons."""
    ba, bb = a.bounds(), b.bounds()
    bounds = (min(ba[0], bb[0]), min(ba[1], bb[1]), max(ba[2], bb[2]), max(ba[3], bb[3]))
    ga = rasterize_polygon(a, resolution, bounds)
    gb = rasterize_polygon(b, resolution, bounds)
    union = np.logical_or(ga, gb).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(ga, gb).sum()) / float(union)


def rasterize(
    plan: Floorplan,
    resolution: int,
    bounds=None,
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> np.ndarray:
    """Binary occupancy of the union of room interiors.

    Rooms are filled independently and OR-ed so overlapping interiors (a
    pathological but representable input) cannot cancel by parity.
    """
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    polys = plan_room_polygons(plan, chord_tol, snap_tol)
    if bounds is None:
        bounds = plan_bounds(plan)
    ox, oy, cell, nx, ny = _grid_geometry(bounds, resolution)
    grid = np.zeros((ny, nx), dtype=bool)
    for poly in polys:
        grid |= _fill_rings([poly.exterior, *poly.holes], ox, oy, cell, nx, ny)
    return grid


def write_pgm(grid: np.ndarray, path) -> None:
    """Plain (P2) PGM, occupied cells black on white, row 0 at the top."""
    flipped = np.flipud(grid)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"P2\n{grid.shape[1]} {grid.shape[0]}\n255\n")
        for row in flipped:
            fh.write(" ".join("0" if v else "255" for v in row))
            fh.write("\n")


# --- SVG rendering ----------------------------------------------------------


@dataclass(frozen=True)
class RenderStyle:
    margin: float = 20.0
    wall_fill: str = "#1a1a1a"
    opening_gap_fill: str = "#ffffff"
    glyph_stroke: str = "#1a1a1a"
    glyph_width: float = 1.2
    label_fill: str = "#555555"
    font_size: float = 14.0
    precision: int = 2
    chord_tol: float = DEFAULT_CHORD_TOL
    snap_tol: float = DEFAULT_SNAP_TOL


def _fmt(v: float, precision: int) -> str:
    s = f"{v:.{precision}f}"
    return "0." + "0" * precision if s == "-" + "0." + "0" * precision else s


class _Canvas:
    """Plan-to-screen mapping: y flips so +y in the plan points up."""

    def __init__(self, plan: Floorplan, style: RenderStyle):
        minx, miny, maxx, maxy = plan_bounds(plan)
        pad = style.margin + max(w.thickness for w in plan.walls) / 2.0
        self.minx, self.maxy, self.pad = minx, maxy, pad
        self.width = (maxx - minx) + 2 * pad
        self.height = (maxy - miny) + 2 * pad
        self.precision = style.precision

    def pt(self, p: Point2) -> tuple[float, float]:
        return (p.x - self.minx + self.pad, self.maxy - p.y + self.pad)

    def fmt(self, p: Point2) -> str:
        x, y = self.pt(p)
        return f"{_fmt(x, self.precision)} {_fmt(y, self.precision)}"


def _wall_path(wall: Wall, canvas: _Canvas, chord_tol: float) -> str:
    fp = wall_footprint(wall, chord_tol)
    arc = _wall_arc(wall)
    if arc is None:
        coords = " L ".join(canvas.fmt(p) for p in fp.exterior)
        return f"M {coords} Z"
    # Native arcs: outer offset start->end, flat cap, inner offset end->start.
    h = wall.thickness / 2.0
    r_out, r_in = arc.radius + h, arc.radius - h
    a0, a1 = arc.start_angle, arc.start_angle + arc.sweep

    def at(radius: float, ang: float) -> Point2:
        return Point2(arc.cx + radius * math.cos(ang), arc.cy + radius * math.sin(ang))

    # After the y-flip, a left bulge (positive curvature) sweeps positive
    # screen angles along start->end.
    sw_fwd = "1" if wall.curvature > 0 else "0"
    sw_rev = "0" if wall.curvature > 0 else "1"
    p = canvas.precision
    ro, ri = _fmt(r_out, p), _fmt(r_in, p)
    return (
        f"M {canvas.fmt(at(r_out, a0))} "
        f"A {ro} {ro} 0 0 {sw_fwd} {canvas.fmt(at(r_out, a1))} "
        f"L {canvas.fmt(at(r_in, a1))} "
        f"A {ri} {ri} 0 0 {sw_rev} {canvas.fmt(at(r_in, a0))} Z"
    )


def _opening_frame(wall: Wall, offset: float) -> tuple[Point2, Point2, Point2]:
    """Center, unit tangent, unit left normal at an arc-length offset."""
    length = wall_centerline_length(wall)
    t = min(1.0, max(0.0, offset / length))
    center = arc_point(wall, t)
    arc = _wall_arc(wall)
    if arc is None:
        c = math.hypot(wall.end.x - wall.start.x, wall.end.y - wall.start.y)
        tx, ty = (wall.end.x - wall.start.x) / c, (wall.end.y - wall.start.y) / c
    else:
        ang = arc.start_angle + t * arc.sweep
        sgn = 1.0 if arc.sweep >= 0 else -1.0
        tx, ty = -math.sin(ang) * sgn, math.cos(ang) * sgn
    return center, Point2(tx, ty), Point2(-ty, tx)


def _quad(canvas: _Canvas, corners) -> str:
    return " ".join(canvas.fmt(c) for c in corners)


def _line(canvas: _Canvas, a: Point2, b: Point2, stroke: str, width: float) -> str:
    ax, ay = canvas.pt(a)
    bx, by = canvas.pt(b)
    p = canvas.precision
    return (
        f'<line x1="{_fmt(ax, p)}" y1="{_fmt(ay, p)}" '
        f'x2="{_fmt(bx, p)}" y2="{_fmt(by, p)}" '
        f'stroke="{stroke}" stroke-width="{width}"/>'
    )


def render_svg(plan: Floorplan, style: RenderStyle = RenderStyle()) -> str:
    """CAD-style SVG document; byte-identical across runs for equal inputs.

    Glyph conventions (see docs/render_style.md): doors draw a jamb gap plus
    a quarter-arc swing, windows a jamb gap plus three parallel lines.
    """
    from .validator import validate_plan  # local import: validator builds on this package

    report = validate_plan(plan, snap_tol=style.snap_tol, chord_tol=style.chord_tol)
    if not report.is_valid:
        codes = ", ".join(f.code for f in report.failures)
        raise ValueError(f"refusing to render invalid plan: {codes}")

    canvas = _Canvas(plan, style)
    p = style.precision
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(canvas.width, p)}" height="{_fmt(canvas.height, p)}" '
        f'viewBox="0 0 {_fmt(canvas.width, p)} {_fmt(canvas.height, p)}">',
        f'<rect width="{_fmt(canvas.width, p)}" height="{_fmt(canvas.height, p)}" fill="#ffffff"/>',
        '<g id="walls">',
    ]
    for wall in plan.walls:
        out.append(f'<path d="{_wall_path(wall, canvas, style.chord_tol)}" fill="{style.wall_fill}"/>')
    out.append("</g>")

    out.append('<g id="openings">')
    for wall in plan.walls:
        h = wall.thickness / 2.0
        for op in wall.openings:
            center, tan, nrm = _opening_frame(wall, op.offset)
            hw = op.width / 2.0
            gap = 1.02 * h  # slightly past the faces so the gap reads clean
            corners = (
                Point2(center.x - tan.x * hw - nrm.x * gap, center.y - tan.y * hw - nrm.y * gap),
                Point2(center.x + tan.x * hw - nrm.x * gap, center.y + tan.y * hw - nrm.y * gap),
                Point2(center.x + tan.x * hw + nrm.x * gap, center.y + tan.y * hw + nrm.y * gap),
                Point2(center.x - tan.x * hw + nrm.x * gap, center.y - tan.y * hw + nrm.y * gap),
            )
            out.append(f'<polygon points="{_quad(canvas, corners)}" fill="{style.opening_gap_fill}"/>')
            if op.kind == "door":
                hinge = Point2(center.x - tan.x * hw, center.y - tan.y * hw)
                leaf_tip = Point2(hinge.x + nrm.x * op.width, hinge.y + nrm.y * op.width)
                jamb = Point2(center.x + tan.x * hw, center.y + tan.y * hw)
                r = _fmt(op.width, style.precision)
                out.append(
                    f'<path d="M {canvas.fmt(leaf_tip)} A {r} {r} 0 0 1 {canvas.fmt(jamb)}" '
                    f'fill="none" stroke="{style.glyph_stroke}" stroke-width="{style.glyph_width}"/>'
                )
                out.append(_line(canvas, hinge, leaf_tip, style.glyph_stroke, style.glyph_width))
            else:
                for lane in (-0.5, 0.0, 0.5):
                    a = Point2(center.x - tan.x * hw + nrm.x * h * lane, center.y - tan.y * hw + nrm.y * h * lane)
                    b = Point2(center.x + tan.x * hw + nrm.x * h * lane, center.y + tan.y * hw + nrm.y * h * lane)
                    out.append(_line(canvas, a, b, style.glyph_stroke, style.glyph_width))
    out.append("</g>")

    out.append('<g id="labels">')
    for room, poly in zip(plan.rooms, plan_room_polygons(plan, style.chord_tol, style.snap_tol)):
        c = to_shapely(poly).centroid
        x, y = canvas.pt(Point2(c.x, c.y))
        out.append(
            f'<text x="{_fmt(x, p)}" y="{_fmt(y, p)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="{_fmt(style.font_size, 1)}" '
            f'fill="{style.label_fill}">{_escape(room.label)}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
