"""
Planar geometry kernels for selfsim.

Polygons are ``(n, 2)`` float64 arrays, closed implicitly (the last vertex
connects back to the first). Most functions are vectorized over many points
or many segments at once; callers pass whole batches instead of looping.
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import ValidationError

# Absolute tolerance for coordinate comparisons.
EPS = 1e-9
# Tolerance below which two sets are considered touching.
TOUCH_EPS = 1e-12

# Upper bound on the number of float64 entries in one broadcast block.
_BLOCK = 2_000_000


def as_points(points: Iterable[Sequence[float]]) -> np.ndarray:
    """Convert a sequence of 2-vectors to an ``(n, 2)`` float64 array."""
    arr = np.array(points, dtype=np.float64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"expected a list of 2-vectors, got shape {arr.shape}",
                              type_name="points", constraint="shape (n, 2)")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("coordinates must be finite", type_name="points", constraint="finite")
    return arr


def frozen_points(points: Iterable[Sequence[float]]) -> np.ndarray:
    """Return a read-only copy of ``points``."""
    arr = as_points(points).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Polyline:
    """A polyline in the plane; ``closed`` joins the last vertex to the first."""
    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "points", frozen_points(self.points))

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return segment start and end arrays."""
        p = self.points
        if len(p) == 0:
            return p, p
        if self.closed and len(p) > 1:
            return p, np.roll(p, -1, axis=0)
        return p[:-1], p[1:]

    def length(self) -> float:
        a, b = self.segments()
        return float(np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1]).sum())

    def to_dict(self):
        return {"points": self.points.tolist(), "closed": self.closed}


def polyline_segments(polylines: Sequence[Polyline]) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenate the segments of many polylines."""
    starts = []
    ends = []
    for line in polylines:
        a, b = line.segments()
        if len(a):
            starts.append(a)
            ends.append(b)
    if not starts:
        empty = np.zeros((0, 2))
        return empty, empty
    return np.concatenate(starts), np.concatenate(ends)


# ---------------------------------------------------------------------------
# Polygon measures
# ---------------------------------------------------------------------------

def signed_area(poly: np.ndarray) -> float:
    """Shoelace signed area; positive for counterclockwise vertex order."""
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def perimeter(poly: np.ndarray) -> float:
    d = np.roll(poly, -1, axis=0) - poly
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def centroid(poly: np.ndarray) -> np.ndarray:
    """Area centroid of a simple polygon (vertex mean for degenerate input)."""
    x = poly[:, 0]
    y = poly[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    if abs(area) < TOUCH_EPS:
        return poly.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return np.array([cx, cy])


def bbox(points: np.ndarray) -> Tuple[float, float, float, float]:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def is_convex(poly: np.ndarray) -> bool:
    """True when a counterclockwise polygon has no reflex vertex."""
    e = np.roll(poly, -1, axis=0) - poly
    en = np.roll(e, -1, axis=0)
    cross = e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]
    scale = float(np.abs(e).max()) ** 2 or 1.0
    return bool(np.all(cross >= -EPS * scale))


def is_simple(poly: np.ndarray) -> bool:
    """True when no two non-adjacent edges meet and no edge folds back."""
    n = len(poly)
    if n < 3:
        return False
    a = poly
    b = np.roll(poly, -1, axis=0)
    if np.any(np.hypot(*(b - a).T) < TOUCH_EPS):
        return False
    dist = segment_distance_matrix(a, b, a, b)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    nonadjacent = (gap > 1) & (gap < n - 1)
    if np.any(dist[nonadjacent] <= TOUCH_EPS):
        return False
    # adjacent edges folding back onto each other
    e = b - a
    en = np.roll(e, -1, axis=0)
    cross = e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]
    dot = (e * en).sum(axis=1)
    return not np.any((np.abs(cross) <= TOUCH_EPS) & (dot < 0))


def validate_polygon(poly: np.ndarray, name: str = "polygon") -> None:
    """Raise ValidationError unless ``poly`` is simple with positive area."""
    if len(poly) < 3:
        raise ValidationError(f"{name} needs at least 3 vertices", type_name=name,
                              constraint="at least 3 vertices")
    if not is_simple(poly):
        raise ValidationError(f"{name} is not simple", type_name=name, constraint="simple")
    if abs(signed_area(poly)) < TOUCH_EPS:
        raise ValidationError(f"{name} has zero area", type_name=name, constraint="area > 0")


def counterclockwise(poly: np.ndarray) -> np.ndarray:
    """Return ``poly`` with counterclockwise orientation."""
    if signed_area(poly) < 0:
        return poly[::-1].copy()
    return poly


# ---------------------------------------------------------------------------
# Hull and diameter
# ---------------------------------------------------------------------------

def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counterclockwise, collinear points dropped."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=np.float64).tolist())))
    if len(pts) <= 2:
        return np.array(pts, dtype=np.float64).reshape(-1, 2)

    lower: List[Tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)

    upper: List[Tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)

    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def diameter(points: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """Largest pairwise distance, attained at convex hull vertices.

    Returns the distance and the two points attaining it; ties go to the
    first pair in hull order.
    """
    hull = convex_hull(points)
    if len(hull) == 1:
        return 0.0, hull[0], hull[0]
    diff = hull[:, None, :] - hull[None, :, :]
    d2 = (diff ** 2).sum(axis=-1)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    return float(np.sqrt(d2[i, j])), hull[i], hull[j]


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def point_segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray
                            ) -> Tuple[np.ndarray, np.ndarray]:
    """Distances from every point to every segment.

    Returns ``(dist, closest)`` with shapes ``(P, S)`` and ``(P, S, 2)``.
    """
    ab = b - a
    denom = (ab ** 2).sum(axis=1)
    safe = np.where(denom > 0, denom, 1.0)
    ap = points[:, None, :] - a[None, :, :]
    t = (ap * ab[None, :, :]).sum(axis=-1) / safe
    t = np.where(denom > 0, np.clip(t, 0.0, 1.0), 0.0)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    diff = points[:, None, :] - closest
    return np.hypot(diff[..., 0], diff[..., 1]), closest


def nearest_on_segments(points: np.ndarray, a: np.ndarray, b: np.ndarray
                        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimum distance from each point to a set of segments.

    Returns ``(dist, segment_index, closest_point)`` per point, processing the
    points in blocks so memory stays bounded.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(points)
    dist = np.full(n, np.inf)
    index = np.full(n, -1, dtype=np.int64)
    closest = np.zeros((n, 2))
    if len(a) == 0 or n == 0:
        return dist, index, closest
    step = max(1, _BLOCK // (3 * len(a)))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        d, c = point_segment_distances(points[lo:hi], a, b)
        k = np.argmin(d, axis=1)
        rows = np.arange(hi - lo)
        dist[lo:hi] = d[rows, k]
        index[lo:hi] = k
        closest[lo:hi] = c[rows, k]
    return dist, index, closest


def _orient(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def segment_distance_matrix(a1: np.ndarray, a2: np.ndarray, b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """Exact distances between every segment of one set and every segment of another."""
    d_a1, _ = point_segment_distances(a1, b1, b2)
    d_a2, _ = point_segment_distances(a2, b1, b2)
    d_b1, _ = point_segment_distances(b1, a1, a2)
    d_b2, _ = point_segment_distances(b2, a1, a2)
    dist = np.minimum(np.minimum(d_a1, d_a2), np.minimum(d_b1.T, d_b2.T))
    A1, A2 = a1[:, None, :], a2[:, None, :]
    B1, B2 = b1[None, :, :], b2[None, :, :]
    o1 = _orient(A1, A2, B1)
    o2 = _orient(A1, A2, B2)
    o3 = _orient(B1, B2, A1)
    o4 = _orient(B1, B2, A2)
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    return np.where(crossing, 0.0, dist)


def polygon_distance(p: np.ndarray, q: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """Exact distance between the boundaries of two polygons, with closest points.

    For polygons with disjoint interiors this is the distance between the sets.
    """
    pa, pb = p, np.roll(p, -1, axis=0)
    qa, qb = q, np.roll(q, -1, axis=0)
    d_pq, c_pq = point_segment_distances(p, qa, qb)
    d_qp, c_qp = point_segment_distances(q, pa, pb)
    best = float("inf")
    best_pair = (p[0], q[0])

    i, j = np.unravel_index(int(np.argmin(d_pq)), d_pq.shape)
    if d_pq[i, j] < best:
        best = float(d_pq[i, j])
        best_pair = (p[i], c_pq[i, j])
    i, j = np.unravel_index(int(np.argmin(d_qp)), d_qp.shape)
    if d_qp[i, j] < best:
        best = float(d_qp[i, j])
        best_pair = (c_qp[i, j], q[i])

    # proper crossings have distance zero at the intersection point
    o1 = _orient(pa[:, None], pb[:, None], qa[None])
    o2 = _orient(pa[:, None], pb[:, None], qb[None])
    o3 = _orient(qa[None], qb[None], pa[:, None])
    o4 = _orient(qa[None], qb[None], pb[:, None])
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    if crossing.any():
        i, j = map(int, np.argwhere(crossing)[0])
        t = o3[i, j] / (o3[i, j] - o4[i, j])
        point = pa[i] + t * (pb[i] - pa[i])
        return 0.0, point, point.copy()
    return best, np.array(best_pair[0]), np.array(best_pair[1])


def polygon_pair_distances(polys_a: np.ndarray, polys_b: np.ndarray) -> np.ndarray:
    """Batched boundary distances for ``K`` polygon pairs.

    ``polys_a`` has shape ``(K, n, 2)`` and ``polys_b`` shape ``(K, m, 2)``.
    """
    k, n, _ = polys_a.shape
    m = polys_b.shape[1]
    out = np.empty(k)
    step = max(1, _BLOCK // (4 * n * m))
    for lo in range(0, k, step):
        hi = min(k, lo + step)
        P = polys_a[lo:hi]
        Q = polys_b[lo:hi]
        pa, pb = P, np.roll(P, -1, axis=1)
        qa, qb = Q, np.roll(Q, -1, axis=1)
        d1 = _batched_point_segment(P, qa, qb)
        d2 = _batched_point_segment(Q, pa, pb)
        best = np.minimum(d1.min(axis=(1, 2)), d2.min(axis=(1, 2)))
        A1, A2 = pa[:, :, None, :], pb[:, :, None, :]
        B1, B2 = qa[:, None, :, :], qb[:, None, :, :]
        crossing = ((_orient(A1, A2, B1) * _orient(A1, A2, B2) < 0)
                    & (_orient(B1, B2, A1) * _orient(B1, B2, A2) < 0))
        best[crossing.any(axis=(1, 2))] = 0.0
        out[lo:hi] = best
    return out


def _batched_point_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # points (K, P, 2); segments (K, S, 2) -> (K, P, S)
    ab = b - a
    denom = (ab ** 2).sum(axis=-1)
    safe = np.where(denom > 0, denom, 1.0)
    ap = points[:, :, None, :] - a[:, None, :, :]
    t = (ap * ab[:, None, :, :]).sum(axis=-1) / safe[:, None, :]
    t = np.where(denom[:, None, :] > 0, np.clip(t, 0.0, 1.0), 0.0)
    diff = ap - t[..., None] * ab[:, None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


# ---------------------------------------------------------------------------
# Point location
# ---------------------------------------------------------------------------

def winding_numbers(poly: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Crossing-rule winding number of ``poly`` around each point.

    Works for non-simple closed polygons; a point is outside exactly when the
    winding number is zero.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    v0 = poly
    v1 = np.roll(poly, -1, axis=0)
    out = np.zeros(len(points), dtype=np.int64)
    step = max(1, _BLOCK // max(1, len(poly)))
    for lo in range(0, len(points), step):
        px = points[lo:lo + step, 0:1]
        py = points[lo:lo + step, 1:2]
        is_left = (v1[:, 0] - v0[:, 0]) * (py - v0[:, 1]) - (px - v0[:, 0]) * (v1[:, 1] - v0[:, 1])
        up = (v0[:, 1] <= py) & (v1[:, 1] > py) & (is_left > 0)
        down = (v0[:, 1] > py) & (v1[:, 1] <= py) & (is_left < 0)
        out[lo:lo + step] = up.sum(axis=1) - down.sum(axis=1)
    return out


def points_in_polygon(poly: np.ndarray, points: np.ndarray, strict: bool = True,
                      tol: float = TOUCH_EPS) -> np.ndarray:
    """Point-in-polygon test for many points.

    ``strict`` excludes points within ``tol`` of the boundary; otherwise such
    points count as inside.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    inside = winding_numbers(poly, points) != 0
    dist, _, _ = nearest_on_segments(points, poly, np.roll(poly, -1, axis=0))
    near = dist <= tol
    if strict:
        return inside & ~near
    return inside | near


def interior_point(poly: np.ndarray) -> np.ndarray:
    """A point strictly inside a simple polygon."""
    c = centroid(poly)
    if points_in_polygon(poly, c[None, :])[0]:
        return c
    n = len(poly)
    for i in range(n):
        tri = np.array([poly[i - 1], poly[i], poly[(i + 1) % n]])
        c = tri.mean(axis=0)
        if points_in_polygon(poly, c[None, :])[0]:
            return c
    raise ValidationError("polygon has no interior point", type_name="polygon", constraint="area > 0")


def interiors_overlap(p: np.ndarray, q: np.ndarray) -> bool:
    """True when two simple polygons share interior points."""
    pa, pb = p, np.roll(p, -1, axis=0)
    qa, qb = q, np.roll(q, -1, axis=0)
    o1 = _orient(pa[:, None], pb[:, None], qa[None])
    o2 = _orient(pa[:, None], pb[:, None], qb[None])
    o3 = _orient(qa[None], qb[None], pa[:, None])
    o4 = _orient(qa[None], qb[None], pb[:, None])
    scale = max(float(np.abs(p).max()), float(np.abs(q).max()), 1.0) ** 2
    tol = EPS * scale
    if np.any((o1 * o2 < -tol * tol) & (o3 * o4 < -tol * tol)):
        return True
    if points_in_polygon(q, p, tol=EPS).any() or points_in_polygon(p, q, tol=EPS).any():
        return True
    if points_in_polygon(q, interior_point(p)[None, :], tol=EPS)[0]:
        return True
    return bool(points_in_polygon(p, interior_point(q)[None, :], tol=EPS)[0])


def segment_inside_intervals(p0: np.ndarray, p1: np.ndarray, poly: np.ndarray,
                             tol: float = TOUCH_EPS) -> List[Tuple[float, float]]:
    """Parameter intervals of the segment ``p0 -> p1`` lying in the open polygon.

    Adjacent intervals are merged, so each returned interval is one maximal
    crossing whose endpoints lie on the polygon boundary (or at ``p0``/``p1``).
    """
    d = p1 - p0
    length = float(np.hypot(*d))
    if length <= tol:
        return []
    a = poly
    b = np.roll(poly, -1, axis=0)
    e = b - a
    denom = d[0] * e[:, 1] - d[1] * e[:, 0]
    w = a - p0
    ok = np.abs(denom) > TOUCH_EPS * max(1.0, length)
    safe = np.where(ok, denom, 1.0)
    t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / safe
    u = (w[:, 0] * d[1] - w[:, 1] * d[0]) / safe
    hit = ok & (u >= -EPS) & (u <= 1 + EPS) & (t >= 0) & (t <= 1)
    # polygon vertices touching the segment (covers collinear edges)
    s = ((a - p0) @ d) / (length * length)
    foot = p0 + np.clip(s, 0, 1)[:, None] * d
    on = np.hypot(*(a - foot).T) <= EPS
    params = np.concatenate([[0.0, 1.0], t[hit], np.clip(s[on], 0, 1)])
    params = np.unique(np.clip(params, 0.0, 1.0))

    intervals: List[Tuple[float, float]] = []
    if len(params) < 2:
        return intervals
    mids = p0 + 0.5 * (params[:-1] + params[1:])[:, None] * d
    inside = points_in_polygon(poly, mids, tol=tol)
    span = (params[1:] - params[:-1]) * length > tol
    for k in np.nonzero(inside & span)[0]:
        lo, hi = float(params[k]), float(params[k + 1])
        if intervals and abs(intervals[-1][1] - lo) * length <= tol:
            intervals[-1] = (intervals[-1][0], hi)
        else:
            intervals.append((lo, hi))
    return intervals


def boundary_geodesic(poly: np.ndarray, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, float]:
    """Shorter of the two boundary arcs joining boundary points ``a`` and ``b``.

    Returns the arc as a polyline starting at ``a`` and ending at ``b`` and its
    length. Ties go to the counterclockwise arc.
    """
    starts = poly
    ends = np.roll(poly, -1, axis=0)
    lengths = np.hypot(*(ends - starts).T)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = float(cum[-1])

    def locate(p):
        dist, closest = point_segment_distances(p[None, :], starts, ends)
        k = int(np.argmin(dist[0]))
        offset = float(np.hypot(*(closest[0, k] - starts[k])))
        return (float(cum[k]) + offset) % total

    sa = locate(a)
    sb = locate(b)
    forward = (sb - sa) % total
    backward = total - forward
    rel = (cum[:-1] - sa) % total
    tol = EPS
    keep = (rel > tol) & (rel < total - tol) & (np.abs(rel - forward) > tol)
    if forward <= backward:
        idx = np.nonzero(keep & (rel < forward))[0]
        idx = idx[np.argsort(rel[idx], kind="stable")]
        length = forward
    else:
        idx = np.nonzero(keep & (rel > forward))[0]
        idx = idx[np.argsort(-rel[idx], kind="stable")]
        length = backward
    path = np.vstack([a[None, :], poly[idx], b[None, :]])
    return path, float(length)


__all__ = [
    "EPS", "TOUCH_EPS", "Polyline", "as_points", "frozen_points", "polyline_segments",
    "signed_area", "perimeter", "centroid", "bbox", "is_convex", "is_simple",
    "validate_polygon", "counterclockwise", "convex_hull", "diameter",
    "point_segment_distances", "nearest_on_segments", "segment_distance_matrix",
    "polygon_distance", "polygon_pair_distances", "winding_numbers",
    "points_in_polygon", "interior_point", "interiors_overlap",
    "segment_inside_intervals", "boundary_geodesic",
]
