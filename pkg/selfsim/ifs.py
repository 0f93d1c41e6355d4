"""
Similarity maps, iterated function systems and finite-depth scenes.

This module defines the data model of selfsim: contracting similarities, the
IFS that carves a seed polygon, the complementary components it produces and
the Scene that bundles them with the polygonal approximation of E.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Any

import numpy as np

from .errors import ResourceError, ValidationError, depth_out_of_range_error
from .geometry import (
    EPS,
    TOUCH_EPS,
    Polyline,
    centroid,
    counterclockwise,
    diameter,
    frozen_points,
    interiors_overlap,
    nearest_on_segments,
    perimeter,
    points_in_polygon,
    polyline_segments,
    signed_area,
    validate_polygon,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 8
DEFAULT_MAX_COMPONENTS = 10 ** 6


def similarity_matrix(scale: float, rotation: float = 0.0, reflect: bool = False) -> np.ndarray:
    """Linear part ``scale * R(rotation) * F`` with ``F`` the reflection (x, -y)."""
    c = math.cos(rotation)
    s = math.sin(rotation)
    rot = np.array([[c, -s], [s, c]])
    if reflect:
        rot = rot @ np.array([[1.0, 0.0], [0.0, -1.0]])
    return scale * rot


@dataclass(frozen=True)
class SimilarityMap:
    """A contracting similarity x -> scale * R(rotation) * F(x) + translation."""
    scale: float
    rotation: float = 0.0
    reflect: bool = False
    translation: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (isinstance(self.scale, (int, float)) and math.isfinite(self.scale) and 0.0 < self.scale < 1.0):
            raise ValidationError(f"scale must lie in (0, 1), got {self.scale!r}",
                                  type_name="SimilarityMap", constraint="0 < scale < 1")
        if not math.isfinite(self.rotation):
            raise ValidationError("rotation must be finite", type_name="SimilarityMap", constraint="finite")
        t = tuple(float(v) for v in self.translation)
        if len(t) != 2 or not all(math.isfinite(v) for v in t):
            raise ValidationError("translation must be a finite 2-vector",
                                  type_name="SimilarityMap", constraint="finite 2-vector")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "rotation", float(self.rotation))
        object.__setattr__(self, "reflect", bool(self.reflect))
        object.__setattr__(self, "translation", t)

    @property
    def linear(self) -> np.ndarray:
        return similarity_matrix(self.scale, self.rotation, self.reflect)

    @property
    def offset(self) -> np.ndarray:
        return np.array(self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply the map to an ``(n, 2)`` array of points."""
        return np.asarray(points, dtype=np.float64) @ self.linear.T + self.offset

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scale": self.scale,
            "rotation": self.rotation,
            "reflect": self.reflect,
            "translation": list(self.translation),
        }


def _frozen_ccw(points) -> np.ndarray:
    poly = counterclockwise(frozen_points(points))
    poly.setflags(write=False)
    return poly


def apply_similarity(sim: SimilarityMap, p: Sequence[float]) -> np.ndarray:
    """Image of a single point under ``sim``."""
    return sim.apply(np.asarray(p, dtype=np.float64).reshape(1, 2))[0]


@dataclass(frozen=True, eq=False)
class Component:
    """One bounded complementary component: a CCW simple polygon."""
    polygon: np.ndarray
    generation: int
    id: int
    word: Tuple[int, ...] = ()
    carve_index: int = 0

    def __post_init__(self):
        poly = _frozen_ccw(self.polygon)
        object.__setattr__(self, "polygon", poly)

    @cached_property
    def area(self) -> float:
        return signed_area(self.polygon)

    @cached_property
    def perimeter(self) -> float:
        return perimeter(self.polygon)

    @cached_property
    def diameter(self) -> float:
        return diameter(self.polygon)[0]

    @cached_property
    def centroid(self) -> np.ndarray:
        return centroid(self.polygon)

    @cached_property
    def bbox(self) -> Tuple[float, float, float, float]:
        lo = self.polygon.min(axis=0)
        hi = self.polygon.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "generation": self.generation,
            "word": list(self.word),
            "carve_index": self.carve_index,
            "polygon": self.polygon.tolist(),
        }


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """Similarity maps plus a seed polygon and the carve polygons removed from it."""
    maps: Tuple[SimilarityMap, ...]
    seed: np.ndarray
    carve: Tuple[np.ndarray, ...]
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "seed", _frozen_ccw(self.seed))
        object.__setattr__(self, "carve", tuple(_frozen_ccw(c) for c in self.carve))
        self.validate()

    def validate(self) -> None:
        """Check the system invariants, raising ValidationError on failure."""
        if len(self.maps) < 2:
            raise ValidationError("an IFS needs at least two maps", type_name="IfsSystem",
                                  constraint="len(maps) >= 2")
        if not self.carve:
            raise ValidationError("an IFS needs at least one carve polygon", type_name="IfsSystem",
                                  constraint="len(carve) >= 1")
        validate_polygon(self.seed, "seed")
        for j, poly in enumerate(self.carve):
            validate_polygon(poly, f"carve[{j}]")

        seed_edges = (self.seed + np.roll(self.seed, -1, axis=0)) / 2
        for i, sim in enumerate(self.maps):
            probe = sim.apply(np.vstack([self.seed, seed_edges]))
            if not points_in_polygon(self.seed, probe, strict=False, tol=EPS).all():
                raise ValidationError(f"maps[{i}] does not send the seed into itself",
                                      type_name="IfsSystem", constraint="f(seed) within seed")

        images = [sim.apply(self.seed) for sim in self.maps]
        for j, poly in enumerate(self.carve):
            if not points_in_polygon(self.seed, poly, strict=False, tol=EPS).all():
                raise ValidationError(f"carve[{j}] is not inside the seed",
                                      type_name="IfsSystem", constraint="carve within seed")
            for k in range(j):
                if interiors_overlap(poly, self.carve[k]):
                    raise ValidationError(f"carve[{k}] and carve[{j}] overlap",
                                          type_name="IfsSystem", constraint="carve interiors disjoint")
            for i, image in enumerate(images):
                if interiors_overlap(poly, counterclockwise(image)):
                    raise ValidationError(f"carve[{j}] overlaps the image of the seed under maps[{i}]",
                                          type_name="IfsSystem", constraint="carve disjoint from map images")

    def component_count(self, depth: int) -> int:
        m = len(self.maps)
        c = len(self.carve)
        return sum(c * m ** (g - 1) for g in range(1, depth + 1))

    def scaled(self, factor: float) -> "IfsSystem":
        """The same system conjugated by the dilation x -> factor * x."""
        if not factor > 0:
            raise ValidationError("scale factor must be positive", type_name="IfsSystem", constraint="factor > 0")
        maps = tuple(
            SimilarityMap(m.scale, m.rotation, m.reflect, tuple(factor * v for v in m.translation))
            for m in self.maps
        )
        return IfsSystem(maps, self.seed * factor, tuple(c * factor for c in self.carve), self.name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "maps": [m.to_dict() for m in self.maps],
            "seed": self.seed.tolist(),
            "carve": [c.tolist() for c in self.carve],
        }


@dataclass(frozen=True, eq=False)
class Scene:
    """A finite-depth approximation: components of U and polylines approximating E.

    When ``seed`` is set, E is modelled as the closed filled set ``seed`` minus
    the open components; otherwise E is the union of the boundary polylines.
    """
    components: Tuple[Component, ...]
    boundary: Tuple[Polyline, ...]
    depth: int
    bounds: Tuple[float, float, float, float]
    seed: Optional[np.ndarray] = None
    name: str = "custom"

    @classmethod
    def from_polygons(cls, polygons: Sequence[Sequence[Sequence[float]]],
                      extra_lines: Sequence[Polyline] = (), depth: int = 1,
                      seed: Optional[Sequence[Sequence[float]]] = None, name: str = "custom") -> "Scene":
        """Build a hand-made scene whose boundary is the component outlines plus ``extra_lines``."""
        components = tuple(Component(np.asarray(p, dtype=np.float64), 1, i) for i, p in enumerate(polygons))
        for comp in components:
            validate_polygon(comp.polygon, f"component {comp.id}")
        boundary = [Polyline(c.polygon, True) for c in components] + list(extra_lines)
        seed_arr = None
        if seed is not None:
            seed_arr = _frozen_ccw(seed)
            boundary.append(Polyline(seed_arr, True))
        return cls(components, tuple(boundary), depth, _bounds_of(boundary), seed_arr, name)

    @cached_property
    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        return polyline_segments(self.boundary)

    @cached_property
    def bboxes(self) -> np.ndarray:
        """Component bounding boxes as a ``(K, 4)`` array (xmin, ymin, xmax, ymax)."""
        if not self.components:
            return np.zeros((0, 4))
        return np.array([c.bbox for c in self.components])

    @property
    def diameter(self) -> float:
        """Diameter of the bounding box; the largest admissible radius."""
        xmin, ymin, xmax, ymax = self.bounds
        return math.hypot(xmax - xmin, ymax - ymin)

    def generation(self, g: int) -> List[Component]:
        return [c for c in self.components if c.generation == g]

    def component_at(self, points: np.ndarray, tol: float = TOUCH_EPS) -> np.ndarray:
        """Index of the component strictly containing each point, or -1."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        found = np.full(len(points), -1, dtype=np.int64)
        if not self.components or not len(points):
            return found
        boxes = self.bboxes
        for k, comp in enumerate(self.components):
            xmin, ymin, xmax, ymax = boxes[k]
            sel = np.nonzero((found < 0)
                             & (points[:, 0] > xmin) & (points[:, 0] < xmax)
                             & (points[:, 1] > ymin) & (points[:, 1] < ymax))[0]
            if sel.size:
                inside = points_in_polygon(comp.polygon, points[sel], strict=True, tol=tol)
                found[sel[inside]] = k
        return found

    def distance_to_E(self, points: np.ndarray) -> np.ndarray:
        """Exact distance from each point to the E-approximation."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        a, b = self.segments
        dist, _, _ = nearest_on_segments(points, a, b)
        if self.seed is None:
            return dist
        in_seed = points_in_polygon(self.seed, points, strict=False, tol=TOUCH_EPS)
        in_hole = self.component_at(points) >= 0
        return np.where(in_seed & ~in_hole, 0.0, dist)

    def on_E(self, point: Sequence[float], tol: float = TOUCH_EPS) -> bool:
        return bool(self.distance_to_E(np.asarray(point, dtype=np.float64))[0] <= tol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "depth": self.depth,
            "bounds": list(self.bounds),
            "seed": None if self.seed is None else self.seed.tolist(),
            "components": [c.to_dict() for c in self.components],
        }


def _bounds_of(lines: Sequence[Polyline]) -> Tuple[float, float, float, float]:
    pts = [line.points for line in lines if len(line.points)]
    if not pts:
        return 0.0, 0.0, 0.0, 0.0
    allp = np.concatenate(pts)
    lo = allp.min(axis=0)
    hi = allp.max(axis=0)
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def generate_scene(system: IfsSystem, depth: int, max_depth: int = DEFAULT_MAX_DEPTH,
                   max_components: int = DEFAULT_MAX_COMPONENTS) -> Scene:
    """Enumerate the carve images under all map words of length 0..depth-1.

    Components are ordered by word length, then lexicographically by word,
    then by carve index; ids follow that order.
    """
    if isinstance(depth, bool) or not isinstance(depth, (int, np.integer)) or not 1 <= depth <= max_depth:
        raise depth_out_of_range_error(depth, max_depth)
    count = system.component_count(depth)
    if count > max_components:
        raise ResourceError(f"depth {depth} would generate {count} components, "
                            f"more than the cap of {max_components}",
                            required=count, limit=max_components)

    lin = np.stack([m.linear for m in system.maps])
    off = np.stack([m.offset for m in system.maps])
    m = len(system.maps)

    # compositions f_w for all words w of the current length
    A = np.eye(2)[None, :, :]
    t = np.zeros((1, 2))
    words = np.zeros((1, 0), dtype=np.int64)

    components: List[Component] = []
    for g in range(1, depth + 1):
        flipped = np.linalg.det(A) < 0
        images = [np.einsum("wij,nj->wni", A, poly) + t[:, None, :] for poly in system.carve]
        word_tuples = [tuple(int(x) for x in w) for w in words]
        for w in range(len(A)):
            for j, stack in enumerate(images):
                poly = stack[w][::-1] if flipped[w] else stack[w]
                components.append(Component(poly, g, len(components), word_tuples[w], j))
        logger.debug("generation %d: %d components", g, len(A) * len(system.carve))
        if g < depth:
            # f_w o f_i, flattened so words stay in lexicographic order
            A_next = np.einsum("wij,mjk->wmik", A, lin).reshape(-1, 2, 2)
            t_next = (np.einsum("wij,mj->wmi", A, off) + t[:, None, :]).reshape(-1, 2)
            words = np.concatenate([np.repeat(words, m, axis=0),
                                    np.tile(np.arange(m), len(words))[:, None]], axis=1)
            A, t = A_next, t_next

    boundary = tuple([Polyline(c.polygon, True) for c in components] + [Polyline(system.seed, True)])
    scene = Scene(tuple(components), boundary, depth, _bounds_of(boundary), system.seed, system.name)
    logger.info("generated %s scene at depth %d with %d components", system.name, depth, len(components))
    return scene


def transform_scene(scene: Scene, scale: float, rotation: float = 0.0, reflect: bool = False,
                    translation: Sequence[float] = (0.0, 0.0)) -> Scene:
    """Apply one global similarity (any positive scale) to the whole scene."""
    if not scale > 0:
        raise ValidationError("scale must be positive", type_name="Scene", constraint="scale > 0")
    lin = similarity_matrix(scale, rotation, reflect)
    off = np.asarray(translation, dtype=np.float64)

    def move(points: np.ndarray) -> np.ndarray:
        return points @ lin.T + off

    components = tuple(
        Component(move(c.polygon), c.generation, c.id, c.word, c.carve_index) for c in scene.components
    )
    boundary = tuple(Polyline(move(line.points), line.closed) for line in scene.boundary)
    seed = None if scene.seed is None else _frozen_ccw(move(scene.seed))
    return Scene(components, boundary, scene.depth, _bounds_of(boundary), seed, scene.name)


__all__ = [
    "SimilarityMap", "IfsSystem", "Component", "Scene", "similarity_matrix",
    "apply_similarity", "generate_scene", "transform_scene",
    "DEFAULT_MAX_DEPTH", "DEFAULT_MAX_COMPONENTS",
]
