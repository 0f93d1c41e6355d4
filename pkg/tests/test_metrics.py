import math

import numpy as np
import pytest

from selfsim.errors import BoundsError, DomainError
from selfsim.geometry import polygon_distance
from selfsim.ifs import Component, Scene
from selfsim.metrics import (
    boundary_path_constant,
    canonical_form,
    convex_inradius,
    measure_summary,
    path_constant_converged,
    push_path_to_boundary,
    separation_constant,
    shape_metrics,
    similarity_classes,
)
from selfsim.raster import distance_to_set, rasterize

from conftest import UNIT_SQUARE, UNIT_TRIANGLE, carpet_scene, gasket_scene, regular_polygon


def _brute_force_separation(scene):
    best, pair = -1.0, None
    comps = scene.components
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            d = polygon_distance(comps[i].polygon, comps[j].polygon)[0]
            if d <= 1e-12:
                return math.inf, (comps[i].id, comps[j].id)
            ratio = min(comps[i].diameter, comps[j].diameter) / d
            if ratio > best * (1 + 1e-12):
                best, pair = ratio, (comps[i].id, comps[j].id)
    return best, pair


# -- shape metrics -----------------------------------------------------------

def test_convex_inradius_of_square_and_triangle():
    r, c = convex_inradius(UNIT_SQUARE)
    assert r == pytest.approx(0.5)
    np.testing.assert_allclose(c, [0.5, 0.5])
    r, _ = convex_inradius(UNIT_TRIANGLE)
    assert r == pytest.approx(math.sqrt(3) / 6)


def test_convex_inradius_of_many_sided_polygon():
    r, c = convex_inradius(regular_polygon(64, radius=2.0, center=(1.0, -1.0)))
    assert r == pytest.approx(2.0 * math.cos(math.pi / 64), rel=1e-6)
    np.testing.assert_allclose(c, [1.0, -1.0], atol=1e-5)


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_roundness_of_presets(depth):
    for comp in carpet_scene(depth).components:
        assert shape_metrics(comp).roundness == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-9)
    for comp in gasket_scene(depth).components:
        assert shape_metrics(comp).roundness == pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-9)


def test_nonconvex_component_needs_field():
    l_shape = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
    scene = Scene.from_polygons([l_shape])
    comp = scene.components[0]
    with pytest.raises(DomainError):
        shape_metrics(comp)
    field = distance_to_set(rasterize(scene, 32))
    metrics = shape_metrics(comp, field)
    assert not metrics.exact
    # largest inscribed disk touches both outer legs and the reflex corner
    assert metrics.inradius == pytest.approx(2 - math.sqrt(2), abs=0.06)
    assert abs(metrics.roundness - metrics.inradius / comp.diameter) < 1e-12


def test_degenerate_component_rejected():
    comp = Component(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 1e-14]]), 1, 0)
    with pytest.raises(DomainError):
        shape_metrics(comp)


# -- separation --------------------------------------------------------------

@pytest.mark.parametrize("depth", [2, 3, 4])
def test_carpet_separation_is_sqrt2(depth):
    scene = carpet_scene(depth)
    report = separation_constant(scene)
    assert not report.unbounded
    assert report.constant == pytest.approx(math.sqrt(2), abs=1e-9)
    assert report.witness == (0, 2)
    a, b = (scene.components[i] for i in report.witness)
    gap = np.hypot(*np.subtract(*report.witness_points))
    assert min(a.diameter, b.diameter) / gap == pytest.approx(report.constant)


@pytest.mark.parametrize("depth", [2, 3])
def test_carpet_separation_matches_brute_force(depth):
    scene = carpet_scene(depth)
    pruned = separation_constant(scene)
    full = separation_constant(scene, prune=False)
    best, pair = _brute_force_separation(scene)
    assert pruned.constant == full.constant
    assert pruned.witness == full.witness == pair
    assert pruned.constant == pytest.approx(best, rel=1e-12)


@pytest.mark.parametrize("depth", [2, 3])
def test_gasket_separation_is_unbounded(depth):
    scene = gasket_scene(depth)
    report = separation_constant(scene)
    assert report.unbounded
    assert report.constant is None
    a, b = (scene.components[i] for i in report.witness)
    assert polygon_distance(a.polygon, b.polygon)[0] < 1e-12
    assert report.witness == _brute_force_separation(scene)[1]


def test_separation_needs_two_components():
    with pytest.raises(DomainError):
        separation_constant(carpet_scene(1))


# -- boundary paths ------------------------------------------------------------

def test_path_constant_of_square_and_triangle():
    assert boundary_path_constant(UNIT_SQUARE, 64).k == pytest.approx(2.0, abs=1e-6)
    assert boundary_path_constant(UNIT_TRIANGLE, 64).k == pytest.approx(math.sqrt(3), abs=1e-6)


def test_path_constant_of_256_gon():
    report = boundary_path_constant(regular_polygon(256), 2)
    assert report.k == pytest.approx(math.pi / 2, abs=1e-3)
    assert report.chord > 0
    assert report.geodesic / report.chord == pytest.approx(report.k)


def test_path_constant_convergence_check():
    report = path_constant_converged(UNIT_SQUARE, 32)
    assert report.converged
    assert abs(report.refined_k - report.k) < 1e-3


def test_path_constant_rejects_zero_samples():
    with pytest.raises(BoundsError):
        boundary_path_constant(UNIT_SQUARE, 0)


def test_push_path_around_single_hole():
    scene = carpet_scene(1)
    pushed = push_path_to_boundary(scene, np.array([[0.0, 0.5], [1.0, 0.5]]))
    assert np.all(scene.distance_to_E(pushed.points) <= 1e-9)
    np.testing.assert_allclose(pushed.points[0], [0.0, 0.5])
    np.testing.assert_allclose(pushed.points[-1], [1.0, 0.5])
    assert pushed.length() == pytest.approx(1.0 + 1 / 3)


def test_push_path_rejects_bad_input():
    scene = carpet_scene(1)
    with pytest.raises(DomainError):
        push_path_to_boundary(scene, np.array([[0.5, 0.5], [1.0, 0.5]]))
    with pytest.raises(DomainError):
        push_path_to_boundary(scene, np.array([[0.0, 0.5], [-1.0, 0.5], [1.0, 0.5]]))


def test_push_random_chords_stays_on_E(rng):
    scene = carpet_scene(2)
    k_max = 2.0
    done = 0
    while done < 100:
        ends = rng.random((2, 2))
        if np.any(scene.component_at(ends) >= 0):
            continue
        pushed = push_path_to_boundary(scene, ends)
        pts = pushed.points
        np.testing.assert_array_equal(pts[0], ends[0])
        np.testing.assert_array_equal(pts[-1], ends[1])
        t = np.linspace(0.0, 1.0, 17)[:, None]
        samples = np.concatenate([p + t * (q - p) for p, q in zip(pts[:-1], pts[1:])])
        assert np.all(scene.distance_to_E(samples) <= 1e-9)
        assert pushed.length() <= k_max * np.hypot(*(ends[1] - ends[0])) + 1e-9
        done += 1


# -- similarity and measure ------------------------------------------------------

@pytest.mark.parametrize("scene_of", [carpet_scene, gasket_scene])
def test_presets_have_one_similarity_class(scene_of):
    partition = similarity_classes(scene_of(3))
    assert len(partition.classes) == 1
    assert partition.representatives == [0]


def test_similarity_separates_shapes():
    scene = Scene.from_polygons([UNIT_SQUARE, UNIT_TRIANGLE + [3, 0], UNIT_SQUARE * 0.5 + [5, 0]])
    partition = similarity_classes(scene)
    assert partition.classes == [[0, 2], [1]]
    assert partition.class_of == {0: 0, 1: 1, 2: 0}
    with pytest.raises(BoundsError):
        similarity_classes(scene, 0.0)


def test_canonical_form_ignores_reflection_and_start_vertex():
    kite = np.array([[0, 0], [2, -1], [3, 0], [2, 1]], dtype=float)
    mirrored = (kite * [-1, 1])[::-1]
    rolled = np.roll(kite, 2, axis=0) * 3 + [7, 7]
    np.testing.assert_allclose(canonical_form(kite), canonical_form(mirrored), atol=1e-9)
    np.testing.assert_allclose(canonical_form(kite), canonical_form(rolled), atol=1e-9)


@pytest.mark.parametrize("depth", [1, 2, 3, 4, 5, 6])
def test_carpet_measure(depth, carpet):
    from selfsim.ifs import generate_scene

    summary = measure_summary(generate_scene(carpet, depth))
    assert summary.area_estimate == pytest.approx((8 / 9) ** depth, abs=1e-12)
    assert summary.perimeter_sum == pytest.approx(0.8 * ((8 / 3) ** depth - 1), abs=1e-9)


def test_measure_examples_and_raster_area():
    assert measure_summary(carpet_scene(1)).perimeter_sum == pytest.approx(4 / 3)
    assert measure_summary(carpet_scene(2)).perimeter_sum == pytest.approx(44 / 9)
    scene = carpet_scene(2)
    summary = measure_summary(scene, rasterize(scene, 243))
    assert summary.raster_area == pytest.approx(summary.area_estimate, rel=0.05)
