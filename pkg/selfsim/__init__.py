"""
selfsim: complementary self-similarity of IFS fractals.

This package generates finite-depth approximations of fractals carved by an
iterated function system (the Sierpinski carpet and gasket ship as presets),
measures the scale-invariant constants of their complementary components,
decides homotopy classes of radial maps from a raster labeling and writes
deterministic JSON reports and SVG figures.
"""

# Errors
from .errors import (
    SelfSimError, ConfigError, ValidationError, BoundsError, ResourceError,
    DomainError, NumericalError, RenderError
)

# Planar geometry
from .geometry import (
    Polyline, signed_area, perimeter, centroid, convex_hull, diameter,
    polygon_distance, points_in_polygon, winding_numbers
)

# IFS model
from .ifs import (
    SimilarityMap, IfsSystem, Component, Scene,
    generate_scene, transform_scene
)

# Presets
from .presets import (
    PresetRegistry, preset_registry, register_preset, build_preset, get_preset, list_presets,
    sierpinski_carpet, sierpinski_gasket
)

# Raster engine
from .raster import (
    Grid, LabeledGrid, DistanceField,
    rasterize, label_complement, component_of_point, distance_to_set, write_pgm
)

# Constants
from .metrics import (
    ShapeMetrics, SeparationReport, RadialConstant, RadialWitness, PathReport,
    SimilarityPartition, MeasureSummary,
    shape_metrics, separation_constant, porosity_constant, component_in_ball_constant,
    boundary_path_constant, path_constant_converged, push_path_to_boundary,
    similarity_classes, measure_summary
)

# Topology
from .topology import (
    RadialMapQuery, winding_number, homotopy_equivalent, radial_query,
    radial_map, empirical_lipschitz
)

# Configuration, reports and figures
from .config import RunConfig, ConfigParser, parse_config, load_config, apply_overrides
from .report import Report, DepthReport, run_report
from .serializer import ReportSerializer, REPORT_SCHEMA
from .visualization import SceneRenderer, render_svg


class Model:
    """IFS data model."""
    SimilarityMap = SimilarityMap
    IfsSystem = IfsSystem
    Component = Component
    Scene = Scene
    generate_scene = staticmethod(generate_scene)
    transform_scene = staticmethod(transform_scene)


class Raster:
    """Grid rasterization, labeling and distance transform."""
    Grid = Grid
    LabeledGrid = LabeledGrid
    DistanceField = DistanceField
    rasterize = staticmethod(rasterize)
    label_complement = staticmethod(label_complement)
    component_of_point = staticmethod(component_of_point)
    distance_to_set = staticmethod(distance_to_set)


class Metrics:
    """Scale-invariant constants."""
    shape_metrics = staticmethod(shape_metrics)
    separation_constant = staticmethod(separation_constant)
    porosity_constant = staticmethod(porosity_constant)
    component_in_ball_constant = staticmethod(component_in_ball_constant)
    boundary_path_constant = staticmethod(boundary_path_constant)
    push_path_to_boundary = staticmethod(push_path_to_boundary)
    similarity_classes = staticmethod(similarity_classes)
    measure_summary = staticmethod(measure_summary)


class Topology:
    """Radial maps and homotopy classification."""
    winding_number = staticmethod(winding_number)
    homotopy_equivalent = staticmethod(homotopy_equivalent)
    radial_query = staticmethod(radial_query)


__version__ = "0.1.0"
__all__ = [
    # Errors
    "SelfSimError", "ConfigError", "ValidationError", "BoundsError", "ResourceError",
    "DomainError", "NumericalError", "RenderError",

    # Geometry
    "Polyline", "signed_area", "perimeter", "centroid", "convex_hull", "diameter",
    "polygon_distance", "points_in_polygon", "winding_numbers",

    # Model
    "SimilarityMap", "IfsSystem", "Component", "Scene", "generate_scene", "transform_scene",
    "PresetRegistry", "preset_registry", "register_preset", "build_preset", "get_preset", "list_presets",
    "sierpinski_carpet", "sierpinski_gasket",

    # Raster
    "Grid", "LabeledGrid", "DistanceField", "rasterize", "label_complement",
    "component_of_point", "distance_to_set", "write_pgm",

    # Metrics
    "ShapeMetrics", "SeparationReport", "RadialConstant", "RadialWitness", "PathReport",
    "SimilarityPartition", "MeasureSummary", "shape_metrics", "separation_constant",
    "porosity_constant", "component_in_ball_constant", "boundary_path_constant",
    "path_constant_converged", "push_path_to_boundary", "similarity_classes", "measure_summary",

    # Topology
    "RadialMapQuery", "winding_number", "homotopy_equivalent", "radial_query",
    "radial_map", "empirical_lipschitz",

    # Pipeline
    "RunConfig", "ConfigParser", "parse_config", "load_config", "apply_overrides",
    "Report", "DepthReport", "run_report", "ReportSerializer", "REPORT_SCHEMA",
    "SceneRenderer", "render_svg",

    # Grouped aliases
    "Model", "Raster", "Metrics", "Topology",
]
