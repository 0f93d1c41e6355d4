"""
Scale-invariant constants of complementary components.

Shape metrics and roundness, the separation constant between components,
porosity and component-in-ball constants, boundary path constants and the
path-pushing procedure, similarity classes and measure summaries.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BoundsError, DomainError
from .geometry import (
    EPS,
    TOUCH_EPS,
    Polyline,
    as_points,
    boundary_geodesic,
    centroid,
    diameter,
    is_convex,
    nearest_on_segments,
    points_in_polygon,
    polygon_distance,
    polygon_pair_distances,
    segment_inside_intervals,
    signed_area,
)
from .ifs import Component, Scene
from .raster import DistanceField, Grid

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES_PER_EDGE = 32
DEFAULT_THINNING = 1 / 8
DEFAULT_SIMILARITY_TOLERANCE = 1e-6
PATH_CONVERGENCE_LIMIT = 1e-3

_TIE = 1e-12
_BLOCK = 1_000_000
# directions sampled on a disk's rim where it leaves the grid
_RIM_DIRECTIONS = 64
# convex polygons up to this size get the exact triple enumeration
_TRIPLE_LIMIT = 24


def _pt(p) -> Tuple[float, float]:
    return float(p[0]), float(p[1])


# ---------------------------------------------------------------------------
# Shape metrics
# ---------------------------------------------------------------------------

@dataclass
class ShapeMetrics:
    """Diameter, inradius and their ratio for one component."""
    component_id: int
    diameter: float
    inradius: float
    roundness: float
    center: Tuple[float, float]
    exact: bool = True
    inradius_error: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.component_id,
            "diameter": self.diameter,
            "inradius": self.inradius,
            "roundness": self.roundness,
            "center": list(self.center),
            "exact": self.exact,
            "inradius_error": self.inradius_error,
        }


def _edge_frames(poly: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Inward unit normals and offsets: a point c is inside iff normal . c >= offset."""
    e = np.roll(poly, -1, axis=0) - poly
    length = np.hypot(e[:, 0], e[:, 1])
    normal = np.stack([-e[:, 1], e[:, 0]], axis=1) / length[:, None]
    return normal, (normal * poly).sum(axis=1)


def _clip_halfplane(points: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to normal . p >= offset."""
    if not len(points):
        return points
    vals = points @ normal - offset
    nxt = np.roll(points, -1, axis=0)
    nvals = np.roll(vals, -1)
    keep = vals >= 0
    cross = keep != (nvals >= 0)
    t = np.where(cross, vals / np.where(cross, vals - nvals, 1.0), 0.0)
    inter = points + t[:, None] * (nxt - points)
    stacked = np.stack([points, inter], axis=1)
    mask = np.stack([keep, cross], axis=1)
    return stacked[mask]


def convex_inradius(poly: np.ndarray) -> Tuple[float, np.ndarray]:
    """Exact largest inscribed circle (Chebyshev centre) of a convex CCW polygon."""
    normal, offset = _edge_frames(poly)
    n = len(poly)
    scale = float(np.abs(poly - poly.mean(axis=0)).max()) or 1.0

    if n <= _TRIPLE_LIMIT:
        # the optimum is a vertex of the (cx, cy, r) polytope: three tangent edges
        idx = np.array(list(combinations(range(n), 3)))
        M = np.concatenate([normal[idx], -np.ones((len(idx), 3, 1))], axis=2)
        rhs = offset[idx]
        ok = np.abs(np.linalg.det(M)) > 1e-12
        sol = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        slack = sol[:, :2] @ normal.T - offset
        feasible = np.all(slack >= sol[:, 2:3] - 1e-9 * scale, axis=1) & (sol[:, 2] > 0)
        sol = sol[feasible]
        best = float(sol[:, 2].max())
        k = int(np.nonzero(sol[:, 2] >= best - _TIE * scale)[0][0])
        return float(sol[k, 2]), sol[k, :2].copy()

    lo, hi = 0.0, diameter(poly)[0] / 2
    region = poly
    while hi - lo > 1e-13 * scale:
        mid = 0.5 * (lo + hi)
        clipped = poly
        for i in range(n):
            clipped = _clip_halfplane(clipped, normal[i], offset[i] + mid)
            if len(clipped) < 3:
                break
        if len(clipped) >= 3:
            lo, region = mid, clipped
        else:
            hi = mid
    return lo, region.mean(axis=0)


def field_inradius(poly: np.ndarray, field: DistanceField) -> Tuple[float, np.ndarray]:
    """Largest distance-field value over cells strictly inside ``poly``."""
    grid = field.grid
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    c_lo = max(int(math.ceil((lo[0] - grid.origin[0]) * grid.resolution)), 0)
    c_hi = min(int(math.floor((hi[0] - grid.origin[0]) * grid.resolution)), grid.width - 1)
    r_lo = max(int(math.ceil((lo[1] - grid.origin[1]) * grid.resolution)), 0)
    r_hi = min(int(math.floor((hi[1] - grid.origin[1]) * grid.resolution)), grid.height - 1)
    if c_lo > c_hi or r_lo > r_hi:
        return 0.0, centroid(poly)
    rows, cols = np.mgrid[r_lo:r_hi + 1, c_lo:c_hi + 1]
    centers = grid.centers(rows.ravel(), cols.ravel())
    inside = points_in_polygon(poly, centers, strict=True, tol=EPS)
    if not inside.any():
        return 0.0, centroid(poly)
    values = field.dist[rows.ravel()[inside], cols.ravel()[inside]]
    k = int(np.argmax(values))
    return float(values[k]), centers[inside][k]


def shape_metrics(component: Component, field: Optional[DistanceField] = None) -> ShapeMetrics:
    """Diameter, inradius and roundness of a component."""
    poly = component.polygon
    if abs(signed_area(poly)) < 1e-12:
        raise DomainError(f"component {component.id} is degenerate (area < 1e-12)", "shape_metrics")
    diam = component.diameter
    if is_convex(poly):
        r, c = convex_inradius(poly)
        exact, err = True, 0.0
    else:
        if field is None:
            raise DomainError(f"component {component.id} is not convex; its inradius needs a distance field",
                              "shape_metrics")
        r, c = field_inradius(poly, field)
        exact, err = False, field.grid.h * math.sqrt(2)
    return ShapeMetrics(component.id, diam, r, r / diam, _pt(c), exact, err)


# ---------------------------------------------------------------------------
# Separation constant
# ---------------------------------------------------------------------------

@dataclass
class SeparationReport:
    """Largest min(diam V, diam W) / dist(V, W) over distinct component pairs."""
    constant: Optional[float]
    unbounded: bool
    witness: Tuple[int, int]
    min_gap: float
    witness_points: Tuple[Tuple[float, float], Tuple[float, float]]
    pairs_evaluated: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.constant,
            "unbounded": self.unbounded,
            "witness": list(self.witness),
            "min_gap": self.min_gap,
            "witness_points": [list(p) for p in self.witness_points],
            "pairs_evaluated": self.pairs_evaluated,
        }


def _bbox_gaps(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    dx = np.maximum(0.0, np.maximum(boxes_b[None, :, 0] - boxes_a[:, None, 2],
                                    boxes_a[:, None, 0] - boxes_b[None, :, 2]))
    dy = np.maximum(0.0, np.maximum(boxes_b[None, :, 1] - boxes_a[:, None, 3],
                                    boxes_a[:, None, 1] - boxes_b[None, :, 3]))
    return np.hypot(dx, dy)


class _PolygonStacks:
    """Component polygons stacked by vertex count for batched distances."""

    def __init__(self, components: Sequence[Component]):
        self.counts = np.array([len(c.polygon) for c in components])
        self.position = np.zeros(len(components), dtype=np.int64)
        self.stacks: Dict[int, np.ndarray] = {}
        for n in np.unique(self.counts):
            idx = np.nonzero(self.counts == n)[0]
            self.stacks[int(n)] = np.stack([components[i].polygon for i in idx])
            self.position[idx] = np.arange(len(idx))

    def distances(self, I: np.ndarray, J: np.ndarray) -> np.ndarray:
        out = np.empty(len(I))
        keys = np.stack([self.counts[I], self.counts[J]], axis=1)
        for ni, nj in np.unique(keys, axis=0) if len(I) else []:
            sel = np.nonzero((keys[:, 0] == ni) & (keys[:, 1] == nj))[0]
            A = self.stacks[int(ni)][self.position[I[sel]]]
            B = self.stacks[int(nj)][self.position[J[sel]]]
            out[sel] = polygon_pair_distances(A, B)
        return out


def _nearest_pairs(boxes: np.ndarray, neighbours: int) -> Tuple[np.ndarray, np.ndarray]:
    K = len(boxes)
    k = min(neighbours, K - 1)
    step = max(1, _BLOCK // K)
    pairs = []
    for lo in range(0, K, step):
        hi = min(K, lo + step)
        gaps = _bbox_gaps(boxes[lo:hi], boxes)
        gaps[np.arange(hi - lo), np.arange(lo, hi)] = np.inf
        nearest = np.argpartition(gaps, k - 1, axis=1)[:, :k]
        for r, row in enumerate(nearest):
            i = lo + r
            pairs.extend((min(i, j), max(i, j)) for j in row.tolist())
    uniq = np.unique(np.array(pairs, dtype=np.int64), axis=0)
    return uniq[:, 0], uniq[:, 1]


def _candidate_pairs(diam: np.ndarray, boxes: np.ndarray, c0: float) -> Tuple[np.ndarray, np.ndarray]:
    K = len(boxes)
    step = max(1, _BLOCK // K)
    I_parts, J_parts = [], []
    for lo in range(0, K, step):
        hi = min(K, lo + step)
        gaps = _bbox_gaps(boxes[lo:hi], boxes)
        upper = np.arange(K)[None, :] > np.arange(lo, hi)[:, None]
        if math.isinf(c0):
            keep = upper & (gaps <= TOUCH_EPS)
        else:
            min_d = np.minimum(diam[lo:hi, None], diam[None, :])
            keep = upper & (min_d >= c0 * gaps * (1 - 1e-9))
        r, c = np.nonzero(keep)
        I_parts.append(r + lo)
        J_parts.append(c)
    return np.concatenate(I_parts), np.concatenate(J_parts)


def separation_constant(scene: Scene, prune: bool = True) -> SeparationReport:
    """Separation constant C with its witness pair.

    Pairs whose closures touch (distance <= 1e-12) make the constant
    unbounded; the witness is then the smallest touching id pair.
    """
    comps = sorted(scene.components, key=lambda c: c.id)
    K = len(comps)
    if K < 2:
        raise DomainError("separation needs at least two components", "separation_constant")
    diam = np.array([c.diameter for c in comps])
    boxes = np.array([c.bbox for c in comps])
    stacks = _PolygonStacks(comps)

    if prune:
        I0, J0 = _nearest_pairs(boxes, 4)
        d0 = stacks.distances(I0, J0)
        if np.any(d0 <= TOUCH_EPS):
            c0 = math.inf
        else:
            c0 = float((np.minimum(diam[I0], diam[J0]) / d0).max())
        I, J = _candidate_pairs(diam, boxes, c0)
    else:
        I, J = np.triu_indices(K, 1)
    # lexicographic pair order fixes the tie-break
    order = np.lexsort((J, I))
    I, J = I[order], J[order]
    dist = stacks.distances(I, J)
    logger.debug("separation: %d components, %d candidate pairs", K, len(I))

    touching = np.nonzero(dist <= TOUCH_EPS)[0]
    if touching.size:
        w = int(touching[0])
        unbounded = True
        constant = None
    else:
        ratio = np.minimum(diam[I], diam[J]) / dist
        best = float(ratio.max())
        w = int(np.nonzero(ratio >= best * (1 - _TIE))[0][0])
        unbounded = False
        constant = best
    a, b = comps[int(I[w])], comps[int(J[w])]
    gap, pa, pb = polygon_distance(a.polygon, b.polygon)
    return SeparationReport(
        constant=constant,
        unbounded=unbounded,
        witness=(a.id, b.id),
        min_gap=0.0 if unbounded else float(dist.min()),
        witness_points=(_pt(pa), _pt(pb)),
        pairs_evaluated=int(len(I)),
    )


# ---------------------------------------------------------------------------
# Radial constants
# ---------------------------------------------------------------------------

@dataclass
class RadialWitness:
    x: Tuple[float, float]
    r: float
    ratio: float
    component_id: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"x": list(self.x), "r": self.r, "ratio": self.ratio, "component_id": self.component_id}


@dataclass
class RadialConstant:
    """Infimum over tested (x, r) of a radial ratio; one witness per scale."""
    name: str
    value: float
    witnesses: List[RadialWitness]
    scales_tested: List[float]
    per_scale: List[float]
    samples_tested: int
    qualitative_fraction: Optional[float] = None

    @property
    def worst(self) -> RadialWitness:
        return self.witnesses[int(np.argmin(self.per_scale))]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "scales_tested": list(self.scales_tested),
            "per_scale": list(self.per_scale),
            "samples_tested": self.samples_tested,
            "qualitative_fraction": self.qualitative_fraction,
            "witness": self.worst.to_dict(),
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def default_scales(size: float, floor: float = 0.0) -> List[float]:
    """Dyadic radii size * 2^-k, stopping before r < max(floor, size / 32)."""
    stop = max(floor, size / 32)
    scales = []
    r = size
    while r >= stop * (1 - 1e-12) and r > 0:
        scales.append(r)
        r /= 2
    return scales


def _resolve_scales(scales: Optional[Sequence[float]], size: float, floor: float, operation: str) -> List[float]:
    if scales is None:
        scales = default_scales(size, floor)
        if not scales:
            raise DomainError(f"no admissible scales between {floor} and {size}", operation)
        return scales
    scales = [float(r) for r in scales]
    if not scales:
        raise DomainError("empty scale list", operation)
    for r in scales:
        if not (floor * (1 - 1e-9) <= r <= size * (1 + 1e-9)) or r <= 0:
            raise BoundsError(f"scale {r} outside [{floor}, {size}]", parameter="scales", value=r,
                              limits=(floor, size))
    return scales


def dedupe_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Keep the first point of every ``tol``-sized bucket, then sort lexicographically."""
    if not len(points):
        return points.reshape(0, 2)
    if tol > 0:
        keys = np.floor(points / tol).astype(np.int64)
    else:
        keys = points
    _, idx = np.unique(keys, axis=0, return_index=True)
    kept = points[np.sort(idx)]
    return kept[np.lexsort((kept[:, 1], kept[:, 0]))]


def boundary_samples(scene: Scene, tol: float) -> np.ndarray:
    """Sample points on E: boundary vertices and edge midpoints, deduplicated within ``tol``."""
    a, b = scene.segments
    pts = np.concatenate([a, b, 0.5 * (a + b)]) if len(a) else np.zeros((0, 2))
    return dedupe_points(pts, tol)


def _thin(base: np.ndarray, tol: float, floor: float) -> np.ndarray:
    if tol <= floor:
        return base
    return dedupe_points(base, tol)


def _disk_maxima(field: DistanceField, xs: np.ndarray, r: float) -> np.ndarray:
    """Max field value over cells whose centre lies in the closed disk B(x, r)."""
    grid = field.grid
    W, H = grid.width, grid.height
    flat = field.dist.ravel()
    res = grid.resolution
    nr = int(math.ceil(r * res)) + 1
    offsets = np.arange(-nr, nr + 1)
    rr = r * (1 + _TIE)
    out = np.zeros(len(xs))
    step = max(1, 4 * _BLOCK // (len(offsets) ** 2))
    for lo in range(0, len(xs), step):
        x = xs[lo:lo + step]
        crow = np.floor((x[:, 1] - grid.origin[1]) * res + 0.5).astype(np.int64)
        rows = crow[:, None] + offsets[None, :]
        dy = grid.origin[1] + rows / res - x[:, 1:2]
        half = np.sqrt(np.maximum(rr * rr - dy * dy, 0.0))
        c_lo = np.ceil((x[:, 0:1] - half - grid.origin[0]) * res).astype(np.int64)
        c_hi = np.floor((x[:, 0:1] + half - grid.origin[0]) * res).astype(np.int64)
        c_lo = np.maximum(c_lo, 0)
        c_hi = np.minimum(c_hi, W - 1)
        valid = (np.abs(dy) <= rr) & (rows >= 0) & (rows < H) & (c_lo <= c_hi)
        if not valid.any():
            continue
        # row spans of every disk, gathered into one contiguous buffer
        owner = np.broadcast_to(np.arange(len(x))[:, None], rows.shape)[valid]
        starts = rows[valid] * W + c_lo[valid]
        lengths = c_hi[valid] - c_lo[valid] + 1
        offs = np.cumsum(lengths) - lengths
        idx = np.arange(int(lengths.sum())) - np.repeat(offs - starts, lengths)
        span_max = np.maximum.reduceat(flat[idx], offs)
        who, first = np.unique(owner, return_index=True)
        out[lo + who] = np.maximum.reduceat(span_max, first)
    return out


def _rim_maxima(scene: Scene, grid: Grid, xs: np.ndarray, r: float) -> np.ndarray:
    """Max exact dist(., E) over rim points of B(x, r) lying outside the grid; 0 when none do."""
    out = np.zeros(len(xs))
    h = grid.h
    lo = grid.origin - h / 2
    hi = grid.origin + np.array([grid.width - 0.5, grid.height - 0.5]) * h
    reach = np.nonzero(((xs - r < lo) | (xs + r > hi)).any(axis=1))[0]
    if not reach.size:
        return out
    theta = 2 * math.pi * np.arange(_RIM_DIRECTIONS) / _RIM_DIRECTIONS
    rim = r * np.column_stack([np.cos(theta), np.sin(theta)])
    step = max(1, 65536 // _RIM_DIRECTIONS)
    for start in range(0, reach.size, step):
        sel = reach[start:start + step]
        pts = (xs[sel][:, None, :] + rim[None, :, :]).reshape(-1, 2)
        outside = ((pts < lo) | (pts > hi)).any(axis=1)
        d = np.zeros(len(pts))
        if outside.any():
            d[outside] = scene.distance_to_E(pts[outside])
        out[sel] = d.reshape(len(sel), _RIM_DIRECTIONS).max(axis=1)
    return out


def porosity_constant(scene: Scene, grid: Grid, field: DistanceField,
                      scales: Optional[Sequence[float]] = None,
                      thinning: float = DEFAULT_THINNING) -> RadialConstant:
    """Porosity: min over sampled (x, r) of max_{B(x, r)} dist(., E) / r.

    Inside the grid the maximum is taken over cell centres of the distance
    field; where a disk leaves the grid its rim is sampled with the exact
    distance to E.
    """
    h = grid.h
    scales = _resolve_scales(scales, scene.diameter, 8 * h, "porosity_constant")
    base = boundary_samples(scene, h / 2)
    if not len(base):
        raise DomainError("E empty", "porosity_constant")
    witnesses, per_scale = [], []
    tested = 0
    for r in scales:
        xs = _thin(base, thinning * r, h / 2)
        ratio = np.maximum(_disk_maxima(field, xs, r), _rim_maxima(scene, grid, xs, r)) / r
        k = int(np.argmin(ratio))
        witnesses.append(RadialWitness(_pt(xs[k]), r, float(ratio[k])))
        per_scale.append(float(ratio[k]))
        tested += len(xs)
        logger.debug("porosity r=%.6g: %d samples, min ratio %.6g", r, len(xs), ratio[k])
    return RadialConstant("porosity", float(min(per_scale)), witnesses, list(scales), per_scale, tested)


def component_in_ball_constant(scene: Scene, scales: Optional[Sequence[float]] = None,
                               thinning: float = DEFAULT_THINNING) -> RadialConstant:
    """Min over sampled (x, r) of the largest diam(V) / r with V inside B(x, r)."""
    scales = _resolve_scales(scales, scene.diameter, 0.0, "component_in_ball_constant")
    base = boundary_samples(scene, EPS)
    comps = list(scene.components)
    order = sorted(range(len(comps)), key=lambda i: (-comps[i].diameter, comps[i].id))
    comps = [comps[i] for i in order]
    K = len(comps)
    diam = np.array([c.diameter for c in comps])
    cent = np.array([c.centroid for c in comps]).reshape(-1, 2)
    nmax = max((len(c.polygon) for c in comps), default=0)
    verts = np.zeros((K, nmax, 2))
    for i, c in enumerate(comps):
        n = len(c.polygon)
        verts[i, :n] = c.polygon
        verts[i, n:] = c.polygon[0]

    witnesses, per_scale = [], []
    tested = hits = 0
    for r in scales:
        xs = _thin(base, thinning * r, EPS)
        rr = r * (1 + _TIE)
        best = np.zeros(len(xs))
        owner = np.full(len(xs), -1, dtype=np.int64)
        open_q = np.arange(len(xs))
        pos = int(np.searchsorted(-diam, -2 * rr, side="left"))
        chunk = 64
        while pos < K and open_q.size:
            sl = slice(pos, min(K, pos + chunk))
            C = sl.stop - sl.start
            qstep = max(1, _BLOCK // (C * max(nmax, 1)))
            resolved = []
            for qlo in range(0, len(open_q), qstep):
                q = open_q[qlo:qlo + qstep]
                dc = np.hypot(cent[sl][None, :, 0] - xs[q, None, 0], cent[sl][None, :, 1] - xs[q, None, 1])
                qi, ci = np.nonzero(dc <= rr)
                if not qi.size:
                    continue
                diff = verts[sl][ci] - xs[q][qi][:, None, :]
                far = np.hypot(diff[..., 0], diff[..., 1]).max(axis=1)
                inside = far <= rr
                qi, ci = qi[inside], ci[inside]
                if not qi.size:
                    continue
                # nonzero is row-major, so the first hit per query has the largest diameter
                uq, first = np.unique(qi, return_index=True)
                target = q[uq]
                best[target] = diam[pos + ci[first]] / r
                owner[target] = pos + ci[first]
                resolved.append(target)
            if resolved:
                open_q = np.setdiff1d(open_q, np.concatenate(resolved), assume_unique=True)
            pos += chunk
            chunk *= 2
        k = int(np.argmin(best)) if len(best) else 0
        value = float(best[k]) if len(best) else 0.0
        cid = comps[int(owner[k])].id if len(best) and owner[k] >= 0 else None
        x = _pt(xs[k]) if len(xs) else (0.0, 0.0)
        witnesses.append(RadialWitness(x, r, value, cid))
        per_scale.append(value)
        tested += len(xs)
        hits += int((owner >= 0).sum())
    fraction = hits / tested if tested else 0.0
    return RadialConstant("component_in_ball", float(min(per_scale)), witnesses, list(scales), per_scale,
                          tested, fraction)


# ---------------------------------------------------------------------------
# Boundary paths
# ---------------------------------------------------------------------------

@dataclass
class PathReport:
    """Largest boundary-geodesic / chord ratio over sampled boundary pairs."""
    k: float
    x: Tuple[float, float]
    y: Tuple[float, float]
    geodesic: float
    chord: float
    samples_per_edge: int
    component_id: Optional[int] = None
    refined_k: Optional[float] = None
    converged: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.component_id,
            "k": self.k,
            "witness": [list(self.x), list(self.y)],
            "geodesic": self.geodesic,
            "chord": self.chord,
            "samples_per_edge": self.samples_per_edge,
            "refined_k": self.refined_k,
            "converged": self.converged,
        }


def _polygon_of(shape: Union[Component, np.ndarray, Sequence]) -> Tuple[np.ndarray, Optional[int]]:
    if isinstance(shape, Component):
        return shape.polygon, shape.id
    return as_points(shape), None


def boundary_points(poly: np.ndarray, samples_per_edge: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Equally spaced points on every edge with their arclength positions."""
    e = np.roll(poly, -1, axis=0) - poly
    length = np.hypot(e[:, 0], e[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(length)[:-1]])
    t = np.arange(samples_per_edge) / samples_per_edge
    pts = (poly[:, None, :] + t[None, :, None] * e[:, None, :]).reshape(-1, 2)
    arc = (cum[:, None] + t[None, :] * length[:, None]).ravel()
    return pts, arc, float(length.sum())


def boundary_path_constant(component: Union[Component, np.ndarray],
                           samples_per_edge: int = DEFAULT_SAMPLES_PER_EDGE) -> PathReport:
    """k = max over sampled boundary pairs of geodesic / chord; first maximum wins."""
    if samples_per_edge < 1:
        raise BoundsError("samples_per_edge must be >= 1", parameter="samples_per_edge",
                          value=samples_per_edge, limits=(1, None))
    poly, cid = _polygon_of(component)
    pts, arc, total = boundary_points(poly, int(samples_per_edge))
    N = len(pts)
    best, bi, bj = -1.0, 0, 0
    step = max(1, _BLOCK // N)
    cols = np.arange(N)
    for lo in range(0, N, step):
        hi = min(N, lo + step)
        d = pts[lo:hi, None, :] - pts[None, :, :]
        chord = np.hypot(d[..., 0], d[..., 1])
        delta = np.abs(arc[lo:hi, None] - arc[None, :])
        geo = np.minimum(delta, total - delta)
        valid = (cols[None, :] > np.arange(lo, hi)[:, None]) & (chord > TOUCH_EPS)
        ratio = np.where(valid, geo / np.where(valid, chord, 1.0), -1.0)
        k = int(np.argmax(ratio))
        i, j = divmod(k, N)
        if ratio[i, j] > best:
            best, bi, bj = float(ratio[i, j]), lo + i, j
    delta = abs(arc[bi] - arc[bj])
    geo = min(delta, total - delta)
    chord = float(np.hypot(*(pts[bi] - pts[bj])))
    return PathReport(max(best, 1.0), _pt(pts[bi]), _pt(pts[bj]), float(geo), chord, int(samples_per_edge), cid)


def path_constant_converged(component: Union[Component, np.ndarray],
                            samples_per_edge: int = DEFAULT_SAMPLES_PER_EDGE) -> PathReport:
    """Path constant at the given density, checked against double the density."""
    report = boundary_path_constant(component, samples_per_edge)
    refined = boundary_path_constant(component, 2 * samples_per_edge)
    report.refined_k = refined.k
    report.converged = abs(refined.k - report.k) < PATH_CONVERGENCE_LIMIT
    if not report.converged:
        logger.warning("path constant of component %s moved by %.3g when doubling samples to %d",
                       report.component_id, abs(refined.k - report.k), 2 * samples_per_edge)
    return report


def _point_at(pts: np.ndarray, k: int, t: float) -> np.ndarray:
    if t <= 0.0:
        return pts[k]
    if t >= 1.0:
        return pts[k + 1]
    return pts[k] + t * (pts[k + 1] - pts[k])


def _check_within(poly: np.ndarray, pts: np.ndarray, tol: float) -> None:
    a, b = poly, np.roll(poly, -1, axis=0)
    if not points_in_polygon(poly, pts, strict=False, tol=tol).all():
        raise DomainError("path leaves the seed region", "push_path_to_boundary")
    for k in range(len(pts) - 1):
        p0, p1 = pts[k], pts[k + 1]
        length = float(np.hypot(*(p1 - p0)))
        cuts = [0.0]
        for t0, t1 in segment_inside_intervals(p0, p1, poly):
            cuts.extend([t0, t1])
        cuts.append(1.0)
        for lo, hi in zip(cuts[0::2], cuts[1::2]):
            if (hi - lo) * length <= tol:
                continue
            mid = p0 + 0.5 * (lo + hi) * (p1 - p0)
            d, _, _ = nearest_on_segments(mid[None, :], a, b)
            if d[0] > tol:
                raise DomainError("path leaves the seed region", "push_path_to_boundary")


def push_path_to_boundary(scene: Scene, path: Union[Polyline, np.ndarray], tol: float = EPS) -> Polyline:
    """Replace every crossing of a component by the shorter arc of its boundary.

    Endpoints must lie on E; pieces outside all components are kept.
    """
    pts = as_points(path.points if isinstance(path, Polyline) else path)
    if len(pts) < 2:
        return Polyline(pts, closed=False)
    if np.any(scene.distance_to_E(pts[[0, -1]]) > tol):
        raise DomainError("path endpoint not on E", "push_path_to_boundary")
    if scene.seed is not None:
        _check_within(scene.seed, pts, tol)

    boxes = scene.bboxes
    pieces = []
    for k in range(len(pts) - 1):
        p0, p1 = pts[k], pts[k + 1]
        lo = np.minimum(p0, p1)
        hi = np.maximum(p0, p1)
        cand = np.nonzero((boxes[:, 0] < hi[0]) & (boxes[:, 2] > lo[0])
                          & (boxes[:, 1] < hi[1]) & (boxes[:, 3] > lo[1]))[0] if len(boxes) else []
        for ci in cand:
            for t0, t1 in segment_inside_intervals(p0, p1, scene.components[ci].polygon):
                pieces.append((k, t0, t1, int(ci)))
    pieces.sort()

    # a crossing may continue through path vertices inside the same component
    crossings = []
    for k, t0, t1, ci in pieces:
        if crossings:
            ka, ta, kb, tb, cj = crossings[-1]
            if cj == ci and tb >= 1.0 and kb + 1 == k and t0 <= 0.0:
                crossings[-1] = (ka, ta, k, t1, ci)
                continue
        crossings.append((k, t0, k, t1, ci))

    out = [pts[0]]
    cursor = 0
    for ka, ta, kb, tb, ci in crossings:
        out.extend(pts[cursor + 1:ka + 1])
        entry = _point_at(pts, ka, ta)
        exit_ = _point_at(pts, kb, tb)
        arc, _ = boundary_geodesic(scene.components[ci].polygon, entry, exit_)
        out.append(entry)
        out.extend(arc[1:])
        cursor = kb
    out.extend(pts[cursor + 1:])

    cleaned = [out[0]]
    for p in out[1:]:
        if not np.array_equal(p, cleaned[-1]):
            cleaned.append(p)
    logger.debug("pushed path: %d crossings replaced", len(crossings))
    return Polyline(np.array(cleaned), closed=False)


# ---------------------------------------------------------------------------
# Similarity classes
# ---------------------------------------------------------------------------

@dataclass
class SimilarityPartition:
    """Components grouped by shape up to translation, rotation, reflection and dilation."""
    classes: List[List[int]]
    class_of: Dict[int, int]
    tolerance: float

    @property
    def representatives(self) -> List[int]:
        return [members[0] for members in self.classes]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tolerance": self.tolerance,
            "count": len(self.classes),
            "classes": [{"representative": m[0], "size": len(m), "members": m} for m in self.classes],
        }


def canonical_candidates(poly: np.ndarray) -> np.ndarray:
    """All edge-aligned normalisations of a polygon and of its mirror image.

    Centroid at the origin, diameter 1, edge i along +x starting at vertex i.
    Returns an array of shape ``(2n, n, 2)``.
    """
    n = len(poly)
    q = (poly - centroid(poly)) / diameter(poly)[0]
    out = []
    for variant in (q, (q * np.array([1.0, -1.0]))[::-1]):
        e = np.roll(variant, -1, axis=0) - variant
        ang = np.arctan2(e[:, 1], e[:, 0])
        c, s = np.cos(ang)[:, None], np.sin(ang)[:, None]
        rolled = variant[(np.arange(n)[:, None] + np.arange(n)[None, :]) % n]
        x = rolled[..., 0]
        y = rolled[..., 1]
        out.append(np.stack([x * c + y * s, -x * s + y * c], axis=-1))
    return np.concatenate(out)


def canonical_form(poly: np.ndarray) -> np.ndarray:
    """Lexicographically smallest canonical candidate."""
    cands = canonical_candidates(poly)
    keys = [tuple(np.round(c.ravel(), 9)) for c in cands]
    return cands[min(range(len(keys)), key=keys.__getitem__)]


def similarity_classes(scene: Union[Scene, Sequence[Component]],
                       tolerance: float = DEFAULT_SIMILARITY_TOLERANCE) -> SimilarityPartition:
    """Partition component ids into similarity classes, ordered by smallest id."""
    if not tolerance > 0:
        raise BoundsError("similarity tolerance must be positive", parameter="similarity_tolerance",
                          value=tolerance, limits=(0, None))
    comps = sorted(scene.components if isinstance(scene, Scene) else scene, key=lambda c: c.id)
    classes: List[List[int]] = []
    reps: List[np.ndarray] = []
    class_of: Dict[int, int] = {}
    for comp in comps:
        form = canonical_form(comp.polygon)
        match = -1
        for idx, cands in enumerate(reps):
            if cands.shape[1] != len(form):
                continue
            gap = np.hypot(*(cands - form[None]).transpose(2, 0, 1)).max(axis=1).min()
            if gap < tolerance:
                match = idx
                break
        if match < 0:
            match = len(classes)
            classes.append([])
            reps.append(canonical_candidates(comp.polygon))
        classes[match].append(comp.id)
        class_of[comp.id] = match
    return SimilarityPartition(classes, class_of, tolerance)


# ---------------------------------------------------------------------------
# Measure
# ---------------------------------------------------------------------------

@dataclass
class MeasureSummary:
    """Area left after carving and total perimeter of the components."""
    area_estimate: Optional[float]
    perimeter_sum: float
    seed_area: Optional[float]
    component_area: float
    raster_area: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "area_estimate": self.area_estimate,
            "perimeter_sum": self.perimeter_sum,
            "seed_area": self.seed_area,
            "component_area": self.component_area,
            "raster_area": self.raster_area,
        }


def measure_summary(scene: Scene, grid: Optional[Grid] = None) -> MeasureSummary:
    comp_area = math.fsum(c.area for c in scene.components)
    perim = math.fsum(c.perimeter for c in scene.components)
    seed_area = signed_area(scene.seed) if scene.seed is not None else None
    area = seed_area - comp_area if seed_area is not None else None
    raster = grid.occupied_count * grid.h ** 2 if grid is not None else None
    return MeasureSummary(area, perim, seed_area, comp_area, raster)


__all__ = [
    "ShapeMetrics", "SeparationReport", "RadialWitness", "RadialConstant", "PathReport",
    "SimilarityPartition", "MeasureSummary",
    "convex_inradius", "field_inradius", "shape_metrics", "separation_constant",
    "default_scales", "dedupe_points", "boundary_samples", "porosity_constant",
    "component_in_ball_constant", "boundary_points", "boundary_path_constant",
    "path_constant_converged", "push_path_to_boundary", "canonical_candidates", "canonical_form",
    "similarity_classes", "measure_summary",
    "DEFAULT_SAMPLES_PER_EDGE", "DEFAULT_THINNING", "DEFAULT_SIMILARITY_TOLERANCE",
]
