"""
Radial maps, winding numbers and the homotopy classification of complement points.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, NumericalError, point_on_set_error
from .geometry import TOUCH_EPS, Polyline, as_points, nearest_on_segments
from .ifs import Scene
from .raster import DistanceField, LabeledGrid, component_of_point

logger = logging.getLogger(__name__)

WINDING_RESIDUAL_LIMIT = 1e-6


def winding_number(loop: Union[Polyline, np.ndarray, Sequence], w: Sequence[float]) -> int:
    """Degree of x -> (x - w)/|x - w| on a closed loop, by summing signed angles."""
    pts = as_points(loop.points if isinstance(loop, Polyline) else loop)
    w = np.asarray(w, dtype=np.float64)
    nxt = np.roll(pts, -1, axis=0)
    dist, _, _ = nearest_on_segments(w[None, :], pts, nxt)
    if dist[0] <= TOUCH_EPS:
        raise DomainError("point too close to the loop", "winding_number")
    d0 = pts - w
    d1 = nxt - w
    cross = d0[:, 0] * d1[:, 1] - d0[:, 1] * d1[:, 0]
    dot = (d0 * d1).sum(axis=1)
    turns = math.fsum(np.arctan2(cross, dot)) / (2 * math.pi)
    n = round(turns)
    residual = abs(turns - n)
    if residual >= WINDING_RESIDUAL_LIMIT:
        raise NumericalError(f"winding sum {turns} is not close to an integer", "winding_number", residual)
    return int(n)


def homotopy_equivalent(labeled: LabeledGrid, w: Sequence[float], z: Sequence[float]) -> bool:
    """True iff the radial maps at w and z are homotopic, i.e. w and z share a complement component."""
    return component_of_point(labeled, w) == component_of_point(labeled, z)


@dataclass
class RadialMapQuery:
    """Distance from w to E and the resulting Lipschitz bound of the radial map."""
    w: tuple
    dist_to_E: float
    lipschitz_bound: float
    nearest: tuple
    label: Optional[int] = None
    field_distance: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w": list(self.w),
            "dist_to_E": self.dist_to_E,
            "lipschitz_bound": self.lipschitz_bound,
            "nearest": list(self.nearest),
            "label": self.label,
            "field_distance": self.field_distance,
        }


def radial_query(scene: Scene, w: Sequence[float], field: Optional[DistanceField] = None,
                 labeled: Optional[LabeledGrid] = None) -> RadialMapQuery:
    """Exact dist(w, E) and the bound 1/dist(w, E) on the Lipschitz constant of the radial map."""
    w = np.asarray(w, dtype=np.float64)
    dist = float(scene.distance_to_E(w)[0])
    if dist <= TOUCH_EPS:
        raise point_on_set_error("radial_query")
    a, b = scene.segments
    _, _, closest = nearest_on_segments(w[None, :], a, b)
    field_value = None
    if field is not None:
        value = field.at(w)[0]
        field_value = None if np.isnan(value) else float(value)
    label = None
    if labeled is not None:
        try:
            label = component_of_point(labeled, w)
        except DomainError:
            logger.debug("probe %s lies on an occupied cell", w.tolist())
    return RadialMapQuery((float(w[0]), float(w[1])), dist, 1.0 / dist,
                          (float(closest[0, 0]), float(closest[0, 1])), label, field_value)


def radial_map(w: Sequence[float], points: np.ndarray) -> np.ndarray:
    """Unit vectors (x - w)/|x - w| for every point x."""
    d = np.asarray(points, dtype=np.float64).reshape(-1, 2) - np.asarray(w, dtype=np.float64)
    norm = np.hypot(d[:, 0], d[:, 1])
    if np.any(norm <= TOUCH_EPS):
        raise DomainError("radial map undefined at w", "radial_map")
    return d / norm[:, None]


def empirical_lipschitz(w: Sequence[float], points: np.ndarray) -> float:
    """Largest |pi_w(x) - pi_w(y)| / |x - y| over all distinct sampled pairs."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    u = radial_map(w, pts)
    best = 0.0
    step = max(1, 1_000_000 // max(len(pts), 1))
    for lo in range(0, len(pts), step):
        dx = pts[lo:lo + step, None, :] - pts[None, :, :]
        du = u[lo:lo + step, None, :] - u[None, :, :]
        chord = np.hypot(dx[..., 0], dx[..., 1])
        ok = chord > TOUCH_EPS
        if ok.any():
            best = max(best, float((np.hypot(du[..., 0], du[..., 1])[ok] / chord[ok]).max()))
    return best


__all__ = [
    "RadialMapQuery", "winding_number", "homotopy_equivalent", "radial_query",
    "radial_map", "empirical_lipschitz", "WINDING_RESIDUAL_LIMIT",
]
