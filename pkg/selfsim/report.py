"""
Pipeline orchestration for selfsim.

run_report generates the scene at every depth 1..d, computes the requested
constants at each depth, rasterizes, labels and measures distances at the
final depth, and assembles an ordered Report.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from .config import RunConfig
from .errors import DomainError
from .geometry import is_convex
from .ifs import Scene, generate_scene
from .metrics import (
    MeasureSummary,
    PathReport,
    RadialConstant,
    SeparationReport,
    ShapeMetrics,
    SimilarityPartition,
    component_in_ball_constant,
    measure_summary,
    path_constant_converged,
    porosity_constant,
    separation_constant,
    shape_metrics,
    similarity_classes,
)
from .raster import DistanceField, Grid, LabeledGrid, distance_to_set, label_complement, rasterize
from .serializer import SCHEMA_VERSION
from .topology import homotopy_equivalent, radial_query, winding_number

logger = logging.getLogger(__name__)

UNITS = {
    "length": "scene units",
    "area": "scene units^2",
    "resolution": "cells per scene unit",
    "constants": "dimensionless",
    "timings": "seconds",
}


@dataclass
class DepthReport:
    """Constants computed on the scene of one depth."""
    depth: int
    resolution: float
    component_count: int
    shapes: Optional[List[ShapeMetrics]] = None
    separation: Optional[SeparationReport] = None
    separation_skipped: Optional[str] = None
    component_in_ball: Optional[RadialConstant] = None
    porosity: Optional[RadialConstant] = None
    path: Optional[List[PathReport]] = None
    similarity: Optional[SimilarityPartition] = None
    measure: Optional[MeasureSummary] = None

    def _stamp(self, block: Dict[str, Any]) -> Dict[str, Any]:
        return {"depth": self.depth, "resolution": self.resolution, **block}

    def roundness_block(self) -> Dict[str, Any]:
        values = [s.roundness for s in self.shapes]
        worst = self.shapes[int(np.argmin(values))]
        return self._stamp({
            "min": min(values),
            "max": max(values),
            "exact": all(s.exact for s in self.shapes),
            "witness": worst.to_dict(),
        })

    def separation_block(self) -> Dict[str, Any]:
        if self.separation is None:
            return self._stamp({"constant": None, "unbounded": False, "witness": [], "witness_points": [],
                                "skipped": self.separation_skipped})
        return self._stamp(self.separation.to_dict())

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"depth": self.depth, "component_count": self.component_count}
        if self.shapes is not None:
            out["roundness"] = self.roundness_block()
        if self.separation is not None or self.separation_skipped is not None:
            out["separation"] = self.separation_block()
        if self.porosity is not None:
            out["porosity"] = self._stamp(self.porosity.to_dict())
        if self.component_in_ball is not None:
            out["component_in_ball"] = self._stamp(self.component_in_ball.to_dict())
        if self.path is not None:
            out["path"] = [self._stamp(p.to_dict()) for p in self.path]
        if self.similarity is not None:
            out["similarity_classes"] = len(self.similarity.classes)
        if self.measure is not None:
            out["measure"] = self._stamp(self.measure.to_dict())
        return out


@dataclass
class Probe:
    point: Tuple[float, float]
    label: Optional[int] = None
    seed_winding: Optional[int] = None
    radial: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": list(self.point),
            "label": self.label,
            "seed_winding": self.seed_winding,
            "radial": self.radial,
            "error": self.error,
        }


@dataclass
class TopologyReport:
    probes: List[Probe]
    pairs: List[Tuple[int, int, Optional[bool]]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probes": [p.to_dict() for p in self.probes],
            "pairs": [{"a": a, "b": b, "homotopic": verdict} for a, b, verdict in self.pairs],
        }


@dataclass
class Report:
    """Everything one run produced; only ``to_dict`` output is persisted."""
    config: RunConfig
    depths: List[DepthReport]
    components: List[Dict[str, Any]]
    similarity: Optional[SimilarityPartition]
    topology: Optional[TopologyReport]
    grid_summary: Optional[Dict[str, Any]]
    timings: Dict[str, float] = field(default_factory=dict)
    scene: Optional[Scene] = field(default=None, repr=False)
    grid: Optional[Grid] = field(default=None, repr=False)
    labeled: Optional[LabeledGrid] = field(default=None, repr=False)
    distance: Optional[DistanceField] = field(default=None, repr=False)

    @property
    def final(self) -> DepthReport:
        return self.depths[-1]

    def to_dict(self) -> Dict[str, Any]:
        from . import __version__

        out: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "selfsim", "version": __version__},
            "units": dict(UNITS),
            "config": self.config.to_dict(),
            "system": self.config.system.to_dict(),
            "depths": [d.to_dict() for d in self.depths],
            "grid": self.grid_summary,
            "components": self.components,
            "similarity": None if self.similarity is None else self.similarity.to_dict(),
            "topology": None if self.topology is None else self.topology.to_dict(),
        }
        if self.config.timings:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out


class _Stopwatch:
    def __init__(self):
        self.totals: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] = self.totals.get(name, 0.0) + time.perf_counter() - start


def _needs_field(scene: Scene) -> bool:
    return any(not is_convex(c.polygon) for c in scene.components)


def _depth_report(config: RunConfig, scene: Scene, field_: Optional[DistanceField],
                  grid: Optional[Grid], final: bool) -> DepthReport:
    d = scene.depth
    block = DepthReport(d, float(config.resolution), len(scene.components))
    if config.wants("roundness") and scene.components:
        block.shapes = [shape_metrics(c, field_) for c in scene.components]
    if config.wants("separation"):
        if len(scene.components) < 2:
            block.separation_skipped = "fewer than two components"
        else:
            block.separation = separation_constant(scene)
    if config.wants("component_in_ball"):
        block.component_in_ball = component_in_ball_constant(scene, config.scales, config.thinning)
    if final and config.wants("porosity"):
        block.porosity = porosity_constant(scene, grid, field_, config.scales, config.thinning)
    if config.wants("path") or config.wants("similarity"):
        block.similarity = similarity_classes(scene, config.similarity_tolerance)
    if config.wants("path"):
        by_id = {c.id: c for c in scene.components}
        block.path = [path_constant_converged(by_id[rep], config.samples_per_edge)
                      for rep in block.similarity.representatives]
    if config.wants("measure"):
        block.measure = measure_summary(scene, grid if final else None)
    logger.info("depth %d: %d components analysed", d, len(scene.components))
    return block


def default_probes(scene: Scene) -> List[Tuple[float, float]]:
    """Centroids of the generation-1 components plus one point outside the scene."""
    probes = [(float(c.centroid[0]), float(c.centroid[1])) for c in scene.generation(1)]
    xmin, ymin, _, _ = scene.bounds
    margin = scene.diameter / 4
    probes.append((xmin - margin, ymin - margin))
    return probes


def probe_topology(scene: Scene, labeled: LabeledGrid, field_: DistanceField,
                   points: List[Tuple[float, float]]) -> TopologyReport:
    """Label, radial bound and seed winding number of each point, plus pairwise homotopy verdicts."""
    probes = []
    for p in points:
        probe = Probe((float(p[0]), float(p[1])))
        try:
            probe.radial = radial_query(scene, p, field_, labeled).to_dict()
            probe.label = probe.radial["label"]
            if scene.seed is not None:
                probe.seed_winding = winding_number(scene.seed, p)
        except DomainError as e:
            probe.error = e.message
        probes.append(probe)

    pairs = []
    for i in range(len(probes)):
        for j in range(i + 1, len(probes)):
            a, b = probes[i], probes[j]
            verdict = None
            if a.error is None and b.error is None and a.label is not None and b.label is not None:
                verdict = homotopy_equivalent(labeled, a.point, b.point)
            pairs.append((i, j, verdict))
    return TopologyReport(probes, pairs)


def _component_table(scene: Scene, shapes: List[ShapeMetrics],
                     partition: Optional[SimilarityPartition]) -> List[Dict[str, Any]]:
    rows = []
    for comp, shape in zip(scene.components, shapes):
        row = {"id": comp.id, "generation": comp.generation, "word": list(comp.word)}
        row.update({k: v for k, v in shape.to_dict().items() if k != "id"})
        row["area"] = comp.area
        row["perimeter"] = comp.perimeter
        if partition is not None:
            row["class"] = partition.class_of[comp.id]
        rows.append(row)
    return rows


def run_report(config: RunConfig) -> Report:
    """Run the full analysis pipeline for ``config``.

    Errors propagate; no partial report is returned.
    """
    watch = _Stopwatch()
    blocks: List[DepthReport] = []
    scene = grid = labeled = field_ = None
    for d in range(1, config.depth + 1):
        final = d == config.depth
        with watch.stage("generate"):
            scene = generate_scene(config.system, d, config.max_depth, config.max_components)
        grid = field_ = None
        if final or _needs_field(scene):
            with watch.stage("rasterize"):
                grid = rasterize(scene, config.resolution, config.max_grid_side)
            with watch.stage("distance"):
                field_ = distance_to_set(grid)
        with watch.stage("metrics"):
            blocks.append(_depth_report(config, scene, field_, grid, final))

    with watch.stage("label"):
        labeled = label_complement(grid)
    final_block = blocks[-1]
    with watch.stage("metrics"):
        shapes = final_block.shapes or [shape_metrics(c, field_) for c in scene.components]
        components = _component_table(scene, shapes, final_block.similarity)

    topology = None
    if config.wants("topology"):
        with watch.stage("topology"):
            points = config.points if config.points is not None else default_probes(scene)
            topology = probe_topology(scene, labeled, field_, points)

    grid_summary = {
        "resolution": grid.resolution,
        "width": grid.width,
        "height": grid.height,
        "origin": [float(grid.origin[0]), float(grid.origin[1])],
        "occupied": grid.occupied_count,
        "labels": labeled.count,
        "unbounded_label": labeled.unbounded_label,
    }
    report = Report(
        config=config,
        depths=blocks,
        components=components,
        similarity=final_block.similarity if config.wants("similarity") else None,
        topology=topology,
        grid_summary=grid_summary,
        timings=watch.totals,
        scene=scene,
        grid=grid,
        labeled=labeled,
        distance=field_,
    )
    logger.info("report complete: depth %d, %d components, %d complement labels",
                config.depth, len(scene.components), labeled.count)
    return report


__all__ = ["Report", "DepthReport", "TopologyReport", "Probe", "run_report", "probe_topology",
           "default_probes", "UNITS"]
