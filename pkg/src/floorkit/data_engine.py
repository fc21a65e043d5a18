"""Structure-aware corpus features, clustering, and rebalanced sampling.

Two complementary views describe a plan:

* a frequency-domain contour descriptor of the external boundary - the
  centroid-distance signature of the uniformly resampled outline, with
  spectrum magnitudes normalized by the DC term, making it invariant to
  translation, rotation, and uniform scale (reflection is deliberately not
  factored out);
* a layout vector of sorted pairwise room-centroid distances, normalized
  by the boundary's bounding-box diagonal - exactly invariant to room
  order.

Corpus clustering is agglomerative with average linkage (Lance-Williams
update, exact for this linkage) under Euclidean distance; merge ties break
toward the pair whose clusters contain the smallest original indices, so
the merge sequence is deterministic for a fixed input order. Balanced
sampling assigns near-equal per-cluster quotas, drawing with replacement
from clusters smaller than their quota and without replacement otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEFAULT_CHORD_TOL,
    DEFAULT_SNAP_TOL,
    Floorplan,
    Polygon,
    external_boundary,
    plan_room_polygons,
    to_shapely,
)

DEFAULT_DESCRIPTOR_SIZE = 16
DEFAULT_CONTOUR_SAMPLES = 256
DEFAULT_LAYOUT_SIZE = 32
DEFAULT_CONTOUR_WEIGHT = 0.6
DEFAULT_LAYOUT_WEIGHT = 0.4


@dataclass(frozen=True)
class ContourDescriptor:
    magnitudes: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.magnitudes, dtype=float)


@dataclass(frozen=True)
class LayoutVector:
    values: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Merge:
    """One agglomeration step; ``a`` and ``b`` are cluster ids (originals
    0..n-1, merged clusters n, n+1, ... in creation order)."""

    a: int
    b: int
    distance: float
    size: int


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]
    sizes: tuple[int, ...]
    k: int
    linkage: str
    merges: tuple[Merge, ...]


def resample_ring(points: np.ndarray, n: int) -> np.ndarray:
    """n points at uniform arc length along a closed ring (row-per-point)."""
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = cum[-1]
    if perimeter <= 0:
        raise ValueError("ring has zero perimeter")
    targets = np.linspace(0.0, perimeter, n, endpoint=False)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    denom = np.where(seg[idx] > 0, seg[idx], 1.0)
    t = (targets - cum[idx]) / denom
    return closed[idx] + (closed[idx + 1] - closed[idx]) * t[:, None]


def _area_centroid(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2.0
    if abs(area) < 1e-12:
        return points.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return np.array([cx, cy])


def contour_descriptor(
    boundary: Polygon,
    n_samples: int = DEFAULT_CONTOUR_SAMPLES,
    m: int = DEFAULT_DESCRIPTOR_SIZE,
) -> ContourDescriptor:
    """Normalized spectrum magnitudes of the centroid-distance signature."""
    if n_samples < 2 * m or n_samples & (n_samples - 1):
        raise ValueError("n_samples must be a power of two and >= 2*m")
    pts = np.asarray([(p.x, p.y) for p in boundary.exterior], dtype=float)
    samples = resample_ring(pts, n_samples)
    signature = np.linalg.norm(samples - _area_centroid(samples), axis=1)
    spectrum = np.abs(np.fft.rfft(signature))
    if spectrum[0] <= 0:
        raise ValueError("degenerate signature (zero mean radius)")
    mags = spectrum[1 : m + 1] / spectrum[0]
    return ContourDescriptor(tuple(float(v) for v in mags))


def layout_vector(
    plan: Floorplan,
    size: int = DEFAULT_LAYOUT_SIZE,
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> LayoutVector:
    """Sorted normalized room-centroid distances, padded/truncated to size."""
    if not plan.rooms:
        raise ValueError("layout_vector requires at least one room")
    polys = plan_room_polygons(plan, chord_tol, snap_tol)
    centroids = [to_shapely(p).centroid for p in polys]
    boundary = external_boundary(plan, chord_tol, snap_tol).polygon
    minx, miny, maxx, maxy = boundary.bounds()
    diag = math.hypot(maxx - minx, maxy - miny)
    dists = sorted(
        (
            math.hypot(a.x - b.x, a.y - b.y) / diag
            for i, a in enumerate(centroids)
            for b in centroids[i + 1 :]
        ),
        reverse=True,
    )
    vals = (dists[:size] + [0.0] * size)[:size]
    return LayoutVector(tuple(vals))


def plan_features(
    plans,
    contour_weight: float = DEFAULT_CONTOUR_WEIGHT,
    layout_weight: float = DEFAULT_LAYOUT_WEIGHT,
    n_samples: int = DEFAULT_CONTOUR_SAMPLES,
    m: int = DEFAULT_DESCRIPTOR_SIZE,
    layout_size: int = DEFAULT_LAYOUT_SIZE,
    chord_tol: float = DEFAULT_CHORD_TOL,
    snap_tol: float = DEFAULT_SNAP_TOL,
) -> np.ndarray:
    """Weighted concatenation of the two views, z-scored per dimension."""
    rows = []
    for plan in plans:
        boundary = external_boundary(plan, chord_tol, snap_tol).polygon
        u = contour_descriptor(boundary, n_samples, m).as_array()
        v = layout_vector(plan, layout_size, chord_tol, snap_tol).as_array()
        rows.append(np.concatenate([u, v]))
    X = np.asarray(rows)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    Z = (X - mean) / std
    Z[:, :m] *= contour_weight
    Z[:, m:] *= layout_weight
    return Z


def _min_members(members: dict[int, list[int]], cid: int) -> int:
    return members[cid][0]


def average_linkage_merges(features: np.ndarray) -> list[Merge]:
    """Full agglomeration schedule under average linkage.

    Cluster-to-cluster distances follow the Lance-Williams update
    d(k, i+j) = (n_i d(k,i) + n_j d(k,j)) / (n_i + n_j), which reproduces
    the mean pairwise point distance exactly.
    """
    X = np.asarray(features, dtype=float)
    n = len(X)
    if n == 0:
        raise ValueError("empty corpus")
    if n == 1:
        return []
    # slot arrays: slot i holds a live cluster or is retired
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(D, np.inf)
    alive = np.ones(n, dtype=bool)
    slot_id = list(range(n))  # slot -> cluster id
    slot_size = np.ones(n, dtype=float)
    members = {i: [i] for i in range(n)}  # cluster id -> sorted original indices
    merges: list[Merge] = []
    next_id = n
    for _ in range(n - 1):
        masked = np.where(np.outer(alive, alive), D, np.inf)
        d_min = masked.min()
        ties = np.argwhere(masked == d_min)
        best = None
        for si, sj in ties:
            if si >= sj:
                continue
            a, b = slot_id[si], slot_id[sj]
            key = tuple(sorted((_min_members(members, a), _min_members(members, b))))
            if best is None or key < best[0]:
                best = (key, si, sj)
        _, si, sj = best
        a, b = slot_id[si], slot_id[sj]
        na, nb = slot_size[si], slot_size[sj]
        lo, hi = (a, b) if a < b else (b, a)
        merges.append(Merge(lo, hi, float(d_min), int(na + nb)))
        # Lance-Williams update into slot si; retire slot sj
        D[si, :] = (na * D[si, :] + nb * D[sj, :]) / (na + nb)
        D[:, si] = D[si, :]
        D[si, si] = np.inf
        alive[sj] = False
        slot_id[si] = next_id
        slot_size[si] = na + nb
        members[next_id] = sorted(members[a] + members[b])
        next_id += 1
    return merges


def cluster(features: np.ndarray, k: int) -> ClusterAssignment:
    """Cut the average-linkage dendrogram at k clusters."""
    X = np.asarray(features, dtype=float)
    n = len(X)
    if n == 0:
        raise ValueError("empty corpus")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    merges = average_linkage_merges(X)
    parent = list(range(n)) + [0] * len(merges)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step, mg in enumerate(merges[: n - k]):
        new = n + step
        parent[new] = new
        parent[find(mg.a)] = new
        parent[find(mg.b)] = new

    roots: dict[int, int] = {}
    labels = []
    for i in range(n):
        r = find(i)
        if r not in roots:
            roots[r] = len(roots)  # first-appearance order: smallest member first
        labels.append(roots[r])
    sizes = [0] * len(roots)
    for lab in labels:
        sizes[lab] += 1
    return ClusterAssignment(tuple(labels), tuple(sizes), len(roots), "average", tuple(merges))


def balanced_sample(assignment: ClusterAssignment, target: int, seed: int) -> list[int]:
    """Near-equal per-cluster quotas; rare clusters upsample with replacement."""
    k = assignment.k
    if target < k:
        raise ValueError(f"target {target} must be >= cluster count {k}")
    base, rem = divmod(target, k)
    quotas = [base + (1 if c < rem else 0) for c in range(k)]
    members: list[list[int]] = [[] for _ in range(k)]
    for idx, lab in enumerate(assignment.labels):
        members[lab].append(idx)
    rng = np.random.default_rng(seed)
    out: list[int] = []
    for c in range(k):
        pool = members[c]
        quota = quotas[c]
        if len(pool) < quota:
            picks = rng.choice(pool, size=quota, replace=True)
        else:
            picks = rng.choice(pool, size=quota, replace=False)
        out.extend(int(v) for v in picks)
    return out
