"""
Raster engine for selfsim.

Rasterizes the E-approximation of a scene onto a uniform grid, labels the
4-connected components of the complement with a union-find over horizontal
runs, and computes an exact Euclidean distance transform.

Arrays are indexed ``[row, col]`` with row 0 at the smallest y. Cell
``(row, col)`` is centred at ``origin + (col, row) * h``.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import BoundsError, DomainError, RenderError, grid_too_large_error, point_on_set_error
from .geometry import EPS, points_in_polygon
from .ifs import Scene

logger = logging.getLogger(__name__)

PADDING = 2
DEFAULT_MAX_GRID_SIDE = 8192

# relative slack on the half-cell supercover test
_SUPERCOVER_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Grid:
    """Occupancy of the E-approximation on a uniform grid."""
    resolution: float
    origin: np.ndarray
    width: int
    height: int
    occupancy: np.ndarray

    @property
    def h(self) -> float:
        return 1.0 / self.resolution

    @property
    def occupied_count(self) -> int:
        return int(self.occupancy.sum())

    def bitset(self) -> np.ndarray:
        """Occupancy packed one bit per cell in row-major order."""
        return np.packbits(self.occupancy.ravel())

    def centers(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return np.stack([self.origin[0] + cols * self.h, self.origin[1] + rows * self.h], axis=-1)

    def cell_of(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Row and column of the cell containing each point (may lie outside the grid)."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        cols = np.floor((points[:, 0] - self.origin[0]) * self.resolution + 0.5).astype(np.int64)
        rows = np.floor((points[:, 1] - self.origin[1]) * self.resolution + 0.5).astype(np.int64)
        return rows, cols

    def inside(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return (rows >= 0) & (rows < self.height) & (cols >= 0) & (cols < self.width)


@dataclass(frozen=True, eq=False)
class LabeledGrid:
    """4-connected labels of the non-occupied cells; occupied cells hold -1."""
    grid: Grid
    labels: np.ndarray
    count: int
    unbounded_label: int

    @cached_property
    def component_cells(self) -> List[np.ndarray]:
        """Flat cell indices of each label, in label order."""
        flat = self.labels.ravel()
        free = np.nonzero(flat >= 0)[0]
        order = free[np.argsort(flat[free], kind="stable")]
        sizes = np.bincount(flat[free], minlength=self.count)
        return np.split(order, np.cumsum(sizes)[:-1])

    def sizes(self) -> np.ndarray:
        flat = self.labels.ravel()
        return np.bincount(flat[flat >= 0], minlength=self.count)

    def border_labels(self) -> np.ndarray:
        lab = self.labels
        border = np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]])
        return np.unique(border[border >= 0])


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Euclidean distance from each cell centre to the nearest occupied centre."""
    grid: Grid
    squared: np.ndarray
    dist: np.ndarray

    def at(self, points: np.ndarray) -> np.ndarray:
        """Field value at the cell of each point; NaN outside the grid."""
        rows, cols = self.grid.cell_of(points)
        ok = self.grid.inside(rows, cols)
        out = np.full(len(rows), np.nan)
        out[ok] = self.dist[rows[ok], cols[ok]]
        return out


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------

def rasterize(scene: Scene, resolution: float, max_grid_side: int = DEFAULT_MAX_GRID_SIDE) -> Grid:
    """Supercover rasterization of the scene's E-approximation.

    A cell is occupied when a boundary segment meets its closed square, and,
    for scenes with a seed, when its centre lies in the seed but not strictly
    inside any component.
    """
    if not resolution >= 1:
        raise BoundsError(f"resolution must be >= 1, got {resolution}", parameter="resolution",
                          value=resolution, limits=(1, None))
    res = float(resolution)
    xmin, ymin, xmax, ymax = scene.bounds
    c0 = int(math.floor(xmin * res + 0.5)) - PADDING
    r0 = int(math.floor(ymin * res + 0.5)) - PADDING
    c1 = int(math.floor(xmax * res + 0.5)) + PADDING
    r1 = int(math.floor(ymax * res + 0.5)) + PADDING
    width = c1 - c0 + 1
    height = r1 - r0 + 1
    if width > max_grid_side or height > max_grid_side:
        raise grid_too_large_error(width, height, max_grid_side)

    origin = np.array([c0 / res, r0 / res])
    occ = np.zeros((height, width), dtype=bool)
    a, b = scene.segments
    # segment endpoints in cell units, cell centres on integers
    shift = np.array([c0, r0], dtype=np.float64)
    _mark_supercover(occ, a * res - shift, b * res - shift)
    if scene.seed is not None:
        _mark_filled(occ, scene, res, shift)

    grid = Grid(res, origin, width, height, occ)
    logger.debug("rasterized %d segments onto %dx%d cells, %d occupied",
                 len(a), width, height, grid.occupied_count)
    return grid


def _mark_supercover(occ: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    half = 0.5 * (1.0 + _SUPERCOVER_SLACK)
    height, width = occ.shape
    for p, q in zip(a, b):
        lo = np.floor(np.minimum(p, q) - half).astype(int)
        hi = np.ceil(np.maximum(p, q) + half).astype(int)
        cx = np.arange(max(lo[0], 0), min(hi[0], width - 1) + 1)
        cy = np.arange(max(lo[1], 0), min(hi[1], height - 1) + 1)
        if not cx.size or not cy.size:
            continue
        X, Y = np.meshgrid(cx.astype(np.float64), cy.astype(np.float64))
        tmin = np.zeros(X.shape)
        tmax = np.ones(X.shape)
        hit = np.ones(X.shape, dtype=bool)
        # Liang-Barsky clip of the segment against each cell square
        for axis, C in ((0, X), (1, Y)):
            d = q[axis] - p[axis]
            if d == 0.0:
                hit &= np.abs(C - p[axis]) <= half
            else:
                t1 = (C - half - p[axis]) / d
                t2 = (C + half - p[axis]) / d
                tmin = np.maximum(tmin, np.minimum(t1, t2))
                tmax = np.minimum(tmax, np.maximum(t1, t2))
        hit &= tmin <= tmax
        occ[cy[0]:cy[-1] + 1, cx[0]:cx[-1] + 1] |= hit


def _window(bbox: Sequence[float], res: float, shift: np.ndarray, shape: Tuple[int, int]):
    height, width = shape
    c_lo = max(int(math.ceil(bbox[0] * res - shift[0] - EPS)), 0)
    c_hi = min(int(math.floor(bbox[2] * res - shift[0] + EPS)), width - 1)
    r_lo = max(int(math.ceil(bbox[1] * res - shift[1] - EPS)), 0)
    r_hi = min(int(math.floor(bbox[3] * res - shift[1] + EPS)), height - 1)
    return r_lo, r_hi, c_lo, c_hi


def _window_centers(r_lo, r_hi, c_lo, c_hi, res, shift) -> np.ndarray:
    cols = np.arange(c_lo, c_hi + 1)
    rows = np.arange(r_lo, r_hi + 1)
    X, Y = np.meshgrid((cols + shift[0]) / res, (rows + shift[1]) / res)
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def _mark_filled(occ: np.ndarray, scene: Scene, res: float, shift: np.ndarray) -> None:
    seed = scene.seed
    lo = seed.min(axis=0)
    hi = seed.max(axis=0)
    r_lo, r_hi, c_lo, c_hi = _window((lo[0], lo[1], hi[0], hi[1]), res, shift, occ.shape)
    if r_lo > r_hi or c_lo > c_hi:
        return
    pts = _window_centers(r_lo, r_hi, c_lo, c_hi, res, shift)
    solid = points_in_polygon(seed, pts, strict=False, tol=EPS)
    solid = solid.reshape(r_hi - r_lo + 1, c_hi - c_lo + 1)
    for comp in scene.components:
        w = _window(comp.bbox, res, shift, occ.shape)
        if w[0] > w[1] or w[2] > w[3]:
            continue
        inner = points_in_polygon(comp.polygon, _window_centers(*w, res, shift), strict=True, tol=EPS)
        inner = inner.reshape(w[1] - w[0] + 1, w[3] - w[2] + 1)
        # holes lie inside the seed window
        rs = slice(w[0] - r_lo, w[1] - r_lo + 1)
        cs = slice(w[2] - c_lo, w[3] - c_lo + 1)
        solid[rs, cs] &= ~inner
    occ[r_lo:r_hi + 1, c_lo:c_hi + 1] |= solid


# ---------------------------------------------------------------------------
# Labeling
# ---------------------------------------------------------------------------

class UnionFind:
    """Union-find with path compression; the smaller root wins a union."""

    def __init__(self, size: int):
        self.size = size
        self.parents = list(range(size))

    def find(self, elem: int) -> int:
        p = elem
        while p != self.parents[p]:
            p = self.parents[p]
        # compress path so every element on it points at the root
        while elem != p:
            nxt = self.parents[elem]
            self.parents[elem] = p
            elem = nxt
        return p

    def union(self, a: int, b: int):
        p1 = self.find(a)
        p2 = self.find(b)
        if p1 == p2:
            return
        if p2 < p1:
            p1, p2 = p2, p1
        self.parents[p2] = p1

    def roots(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(self.size)], dtype=np.int64)


def label_complement(grid: Grid) -> LabeledGrid:
    """Label the 4-connected components of the non-occupied cells."""
    free = ~grid.occupancy
    height, width = free.shape
    starts = free.copy()
    starts[:, 1:] &= ~free[:, :-1]
    run_of = np.cumsum(starts.ravel()).reshape(height, width) - 1
    n_runs = int(starts.sum())
    labels = np.full((height, width), -1, dtype=np.int64)
    if n_runs == 0:
        return LabeledGrid(grid, labels, 0, -1)

    # runs in consecutive rows sharing a column are connected
    link = free[:-1] & free[1:]
    pairs = np.stack([run_of[:-1][link], run_of[1:][link]], axis=1)
    pairs = np.unique(pairs, axis=0) if len(pairs) else pairs
    uf = UnionFind(n_runs)
    for lo, hi in pairs.tolist():
        uf.union(lo, hi)
    roots = uf.roots()

    # renumber in first-cell row-major scan order
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    run_label = rank[inverse.ravel()]
    labels[free] = run_label[run_of[free]]
    count = len(first)

    lg = LabeledGrid(grid, labels, count, -1)
    border = lg.border_labels()
    if len(border) > 1:
        logger.warning("%d labels touch the grid border; using the one of cell (0, 0)", len(border))
    unbounded = int(labels[0, 0]) if labels[0, 0] >= 0 else (int(border[0]) if len(border) else -1)
    logger.debug("labeled %d runs into %d components", n_runs, count)
    return LabeledGrid(grid, labels, count, unbounded)


def component_of_point(labeled: LabeledGrid, w: Sequence[float]) -> int:
    """Label of the complement component containing ``w``.

    Points beyond the padded grid belong to the unbounded component.
    """
    grid = labeled.grid
    rows, cols = grid.cell_of(np.asarray(w, dtype=np.float64))
    r, c = int(rows[0]), int(cols[0])
    if not grid.inside(rows, cols)[0]:
        return labeled.unbounded_label
    if grid.occupancy[r, c]:
        raise point_on_set_error("component_of_point")
    return int(labeled.labels[r, c])


# ---------------------------------------------------------------------------
# Distance transform
# ---------------------------------------------------------------------------

def _column_distances(occ: np.ndarray, infinity: int) -> np.ndarray:
    """Distance in cells to the nearest occupied cell in the same column."""
    height = occ.shape[0]
    g = np.empty(occ.shape, dtype=np.int64)
    g[0] = np.where(occ[0], 0, infinity)
    for r in range(1, height):
        g[r] = np.where(occ[r], 0, np.minimum(g[r - 1] + 1, infinity))
    for r in range(height - 2, -1, -1):
        g[r] = np.minimum(g[r], g[r + 1] + 1)
    return g


def _lower_envelope_rows(f: np.ndarray) -> np.ndarray:
    """Squared-distance transform along every row of ``f`` at once."""
    n_rows, n = f.shape
    rows = np.arange(n_rows)
    ff = f.astype(np.float64)
    v = np.zeros((n_rows, n), dtype=np.int64)
    z = np.full((n_rows, n + 1), np.inf)
    z[:, 0] = -np.inf
    k = np.zeros(n_rows, dtype=np.int64)
    s_final = np.empty(n_rows)

    for q in range(1, n):
        fq = ff[:, q] + q * q
        todo = rows
        while todo.size:
            kk = k[todo]
            vk = v[todo, kk]
            s = (fq[todo] - (ff[todo, vk] + vk * vk)) / (2.0 * (q - vk))
            pop = s <= z[todo, kk]
            s_final[todo[~pop]] = s[~pop]
            k[todo[pop]] -= 1
            todo = todo[pop]
        k += 1
        v[rows, k] = q
        z[rows, k] = s_final
        z[rows, k + 1] = np.inf

    out = np.empty((n_rows, n), dtype=np.int64)
    k[:] = 0
    for x in range(n):
        while True:
            adv = z[rows, k + 1] < x
            if not adv.any():
                break
            k[adv] += 1
        vk = v[rows, k]
        out[:, x] = (x - vk) ** 2 + f[rows, vk]
    return out


def distance_to_set(grid: Grid) -> DistanceField:
    """Exact Euclidean distance transform of the occupancy."""
    occ = grid.occupancy
    if not occ.any():
        raise DomainError("E empty", "distance_to_set")
    height, width = occ.shape
    infinity = height + width
    big = 4 * infinity * infinity
    g = _column_distances(occ, infinity)
    f = np.where(g >= infinity, big, g * g)
    squared = _lower_envelope_rows(f)
    dist = np.sqrt(squared.astype(np.float64)) * grid.h
    logger.debug("distance transform on %dx%d cells, max %.6g", width, height, float(dist.max()))
    return DistanceField(grid, squared, dist)


def brute_force_squared_distances(occ: np.ndarray) -> np.ndarray:
    """Reference squared distances by scanning every occupied cell."""
    rows, cols = np.nonzero(occ)
    rr, cc = np.indices(occ.shape)
    best = np.full(occ.shape, np.iinfo(np.int64).max, dtype=np.int64)
    for r, c in zip(rows, cols):
        best = np.minimum(best, (rr - r) ** 2 + (cc - c) ** 2)
    return best


# ---------------------------------------------------------------------------
# Debug dumps
# ---------------------------------------------------------------------------

def write_pgm(data: Union[Grid, DistanceField, np.ndarray], path: str) -> None:
    """Write occupancy (8-bit) or a distance field (16-bit) as a binary P5 PGM.

    The top image row is the largest y.
    """
    if isinstance(data, Grid):
        pixels = np.where(data.occupancy, 0, 255).astype(">u1")
        maxval = 255
    else:
        values = data.dist if isinstance(data, DistanceField) else np.asarray(data, dtype=np.float64)
        peak = float(values.max()) if values.size else 0.0
        scaled = values / peak * 65535 if peak > 0 else np.zeros_like(values)
        pixels = np.rint(scaled).astype(">u2")
        maxval = 65535
    pixels = pixels[::-1]
    height, width = pixels.shape
    try:
        with open(path, "wb") as f:
            f.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
            f.write(pixels.tobytes())
    except OSError as e:
        raise RenderError(f"cannot write {path}: {e}", path) from e


__all__ = [
    "Grid", "LabeledGrid", "DistanceField", "UnionFind", "PADDING", "DEFAULT_MAX_GRID_SIDE",
    "rasterize", "label_complement", "component_of_point", "distance_to_set",
    "brute_force_squared_distances", "write_pgm",
]
