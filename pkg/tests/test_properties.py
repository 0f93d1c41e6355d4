import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from selfsim.geometry import nearest_on_segments, points_in_polygon
from selfsim.ifs import Component, transform_scene
from selfsim.metrics import (
    boundary_path_constant,
    component_in_ball_constant,
    measure_summary,
    porosity_constant,
    separation_constant,
    shape_metrics,
    similarity_classes,
)
from selfsim.raster import distance_to_set, rasterize
from selfsim.topology import winding_number

from conftest import carpet_scene, gasket_scene, regular_polygon

coords = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


@st.composite
def convex_polygons(draw):
    n = draw(st.integers(min_value=3, max_value=12))
    radius = draw(st.floats(min_value=0.5, max_value=5.0))
    center = (draw(coords), draw(coords))
    phase = draw(st.floats(min_value=0.0, max_value=2 * math.pi))
    return regular_polygon(n, radius, center, phase)


def _clearance(poly, w):
    w = np.asarray(w, dtype=float)[None, :]
    return nearest_on_segments(w, poly, np.roll(poly, -1, axis=0))[0][0]


@pytest.mark.parametrize("scene_of", [carpet_scene, gasket_scene])
@pytest.mark.parametrize("scale", [1 / 3, 2.0, 7.5])
def test_constants_are_similarity_invariant(scene_of, scale):
    scene = scene_of(2)
    moved = transform_scene(scene, scale, rotation=math.pi / 5, translation=(1.5, -2.0))

    before = separation_constant(scene)
    after = separation_constant(moved)
    assert after.unbounded == before.unbounded
    if not before.unbounded:
        assert after.constant == pytest.approx(before.constant, rel=1e-9)
        assert after.min_gap == pytest.approx(scale * before.min_gap, rel=1e-9)

    for a, b in zip(scene.components, moved.components):
        assert shape_metrics(b).roundness == pytest.approx(shape_metrics(a).roundness, rel=1e-9)

    assert similarity_classes(moved).classes == similarity_classes(scene).classes
    k0 = boundary_path_constant(scene.components[0], 16)
    k1 = boundary_path_constant(moved.components[0], 16)
    assert k1.k == pytest.approx(k0.k, rel=1e-9)
    assert k1.geodesic == pytest.approx(scale * k0.geodesic, rel=1e-9)

    m0, m1 = measure_summary(scene), measure_summary(moved)
    assert m1.area_estimate == pytest.approx(scale ** 2 * m0.area_estimate, rel=1e-9)
    assert m1.perimeter_sum == pytest.approx(scale * m0.perimeter_sum, rel=1e-9)


@pytest.mark.parametrize("scene_of", [carpet_scene, gasket_scene])
@pytest.mark.parametrize("scale", [0.5, 2.0])
def test_radial_constants_are_similarity_invariant(scene_of, scale):
    scene = scene_of(2)
    moved = transform_scene(scene, scale)
    radii = [scene.diameter / 2, scene.diameter / 4]
    moved_radii = [scale * r for r in radii]

    # the grid is refined with the scene so cell centres move onto cell centres
    grid = rasterize(scene, 81)
    moved_grid = rasterize(moved, 81 / scale)
    before = porosity_constant(scene, grid, distance_to_set(grid), radii)
    after = porosity_constant(moved, moved_grid, distance_to_set(moved_grid), moved_radii)
    assert after.per_scale == pytest.approx(before.per_scale, rel=1e-9)

    before = component_in_ball_constant(scene, radii)
    after = component_in_ball_constant(moved, moved_radii)
    assert after.per_scale == pytest.approx(before.per_scale, rel=1e-9)
    assert after.qualitative_fraction == before.qualitative_fraction


@settings(max_examples=100, deadline=None)
@given(convex_polygons(), coords, coords)
def test_winding_agrees_with_point_location(poly, x, y):
    assume(_clearance(poly, (x, y)) > 1e-6)
    inside = points_in_polygon(poly, np.array([[x, y]]))[0]
    assert winding_number(poly, (x, y)) == (1 if inside else 0)
    assert winding_number(poly[::-1], (x, y)) == (-1 if inside else 0)


@settings(max_examples=100, deadline=None)
@given(convex_polygons(), coords, coords, coords, coords)
def test_winding_is_translation_invariant(poly, x, y, tx, ty):
    assume(_clearance(poly, (x, y)) > 1e-6)
    shift = np.array([tx, ty])
    assert winding_number(poly + shift, (x + tx, y + ty)) == winding_number(poly, (x, y))


@settings(max_examples=50, deadline=None)
@given(convex_polygons())
def test_roundness_of_convex_polygons_is_bounded(poly):
    metrics = shape_metrics(Component(poly, 1, 0))
    assert metrics.exact
    assert 0 < metrics.roundness <= 0.5 + 1e-12
    assert metrics.inradius <= metrics.diameter / 2 + 1e-12
