import numpy as np
import pytest

from selfsim.errors import BoundsError
from selfsim.geometry import Polyline
from selfsim.ifs import Scene, generate_scene
from selfsim.metrics import (
    boundary_samples,
    component_in_ball_constant,
    dedupe_points,
    default_scales,
    porosity_constant,
)
from selfsim.presets import sierpinski_carpet, sierpinski_gasket
from selfsim.raster import distance_to_set, rasterize

from conftest import carpet_scene, gasket_scene

CARPET_SCALES = [1 / 3, 1 / 9, 1 / 27]
GASKET_SCALES = [1 / 2, 1 / 4, 1 / 8]


def _porosity(scene, resolution, scales=None, thinning=1 / 8):
    grid = rasterize(scene, resolution)
    return porosity_constant(scene, grid, distance_to_set(grid), scales, thinning)


def test_default_scales_are_dyadic():
    scales = default_scales(1.0, floor=0.1)
    assert scales == [1.0, 0.5, 0.25, 0.125]
    assert default_scales(1.0)[-1] == pytest.approx(1 / 32)


def test_dedupe_points_keeps_first_per_bucket_and_sorts():
    pts = np.array([[0.9, 0.1], [0.11, 0.11], [0.12, 0.12], [0.5, 0.5]])
    kept = dedupe_points(pts, 0.1)
    np.testing.assert_allclose(kept, [[0.11, 0.11], [0.5, 0.5], [0.9, 0.1]])
    assert len(dedupe_points(pts, 0.0)) == 4


def test_boundary_samples_lie_on_E():
    scene = carpet_scene(2)
    samples = boundary_samples(scene, 1e-9)
    assert np.all(scene.distance_to_E(samples) <= 1e-12)
    # vertices and edge midpoints of nine holes and the seed
    assert len(samples) == 80


def test_carpet_porosity_is_positive_and_witnessed():
    scene = carpet_scene(2)
    result = _porosity(scene, 243, CARPET_SCALES[:2])
    assert 0 < result.value <= 1
    assert result.scales_tested == CARPET_SCALES[:2]
    assert len(result.witnesses) == 2
    worst = result.worst
    assert worst.ratio == result.value
    assert scene.distance_to_E(np.array(worst.x))[0] <= 1e-12


def _dense_porosity(scene, xs, r, step):
    """Max of the exact distance to E over a lattice filling each disk, plus its rim."""
    n = int(np.ceil(r / step))
    offsets = np.stack(np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1)), axis=-1).reshape(-1, 2) * step
    offsets = offsets[np.hypot(offsets[:, 0], offsets[:, 1]) <= r]
    theta = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
    offsets = np.concatenate([offsets, r * np.column_stack([np.cos(theta), np.sin(theta)])])
    return min(scene.distance_to_E(x + offsets).max() for x in xs) / r


def test_porosity_matches_dense_sampling():
    scene = carpet_scene(1)
    grid = rasterize(scene, 81)
    scales = [scene.diameter / 2, scene.diameter / 4]
    result = porosity_constant(scene, grid, distance_to_set(grid), scales, thinning=0.0)
    xs = boundary_samples(scene, grid.h / 2)
    for r, value in zip(scales, result.per_scale):
        assert value == pytest.approx(_dense_porosity(scene, xs, r, grid.h), abs=3 * grid.h / r)
    # disks reaching out of the seed find the empty plane around it
    assert result.per_scale[0] > 0.45


def test_porosity_of_a_single_segment_is_one():
    scene = Scene.from_polygons([], extra_lines=[Polyline([(0.0, 0.0), (1.0, 0.0)], closed=False)])
    grid = rasterize(scene, 64)
    result = porosity_constant(scene, grid, distance_to_set(grid))
    assert result.scales_tested == [1.0, 0.5, 0.25, 0.125]
    assert result.value == pytest.approx(1.0, abs=2 * grid.h / 0.125)
    assert all(v == pytest.approx(1.0, abs=1e-9) for v in result.per_scale)


def test_porosity_rejects_scales_below_grid_floor():
    scene = carpet_scene(1)
    with pytest.raises(BoundsError):
        _porosity(scene, 27, [1 / 27])


def test_component_in_ball_on_carpet():
    scene = carpet_scene(3)
    result = component_in_ball_constant(scene, CARPET_SCALES[:2])
    assert result.value > 0
    assert result.qualitative_fraction == pytest.approx(1.0)
    for w, r in zip(result.witnesses, CARPET_SCALES[:2]):
        assert w.r == r
        assert w.component_id is not None
        comp = scene.components[w.component_id]
        far = np.hypot(*(comp.polygon - np.array(w.x)).T).max()
        assert far <= r * (1 + 1e-9)


def _brute_component_in_ball(scene, xs, r):
    best = []
    for x in xs:
        fits = [c.diameter / r for c in scene.components
                if np.hypot(*(c.polygon - x).T).max() <= r * (1 + 1e-9)]
        best.append(max(fits, default=0.0))
    return min(best)


@pytest.mark.parametrize("scene_of, depth, scales", [(carpet_scene, 2, [0.9, 0.5, 0.3]),
                                                     (gasket_scene, 3, [0.8, 0.5, 0.3])])
def test_component_in_ball_matches_brute_force(scene_of, depth, scales):
    scene = scene_of(depth)
    result = component_in_ball_constant(scene, scales, thinning=0.0)
    xs = boundary_samples(scene, 1e-9)
    for r, value in zip(scales, result.per_scale):
        assert value == pytest.approx(_brute_component_in_ball(scene, xs, r), rel=1e-12)
    assert result.value == min(result.per_scale)


def test_component_in_ball_can_miss():
    scene = carpet_scene(1)
    result = component_in_ball_constant(scene, [0.05])
    assert result.value == 0.0
    assert result.qualitative_fraction == 0.0


def test_thinning_only_adds_samples():
    scene = carpet_scene(3)
    values, tested = [], []
    for thinning in (1 / 4, 1 / 8, 0.0):
        result = component_in_ball_constant(scene, CARPET_SCALES[:2], thinning)
        values.append(result.value)
        tested.append(result.samples_tested)
    assert tested == sorted(tested)
    assert values == sorted(values, reverse=True)


@pytest.mark.parametrize("system, scales", [(sierpinski_carpet, CARPET_SCALES),
                                            (sierpinski_gasket, GASKET_SCALES)])
def test_radial_constants_stabilize(system, scales):
    s4 = generate_scene(system(), 4)
    s5 = generate_scene(system(), 5)
    p4 = _porosity(s4, 729, scales).value
    p5 = _porosity(s5, 729, scales).value
    assert p4 > 0
    assert abs(p5 - p4) / p4 < 0.05
    c4 = component_in_ball_constant(s4, scales).value
    c5 = component_in_ball_constant(s5, scales).value
    assert c4 > 0
    assert abs(c5 - c4) / c4 < 0.05


def test_gasket_default_scales_run():
    scene = gasket_scene(3)
    result = _porosity(scene, 243)
    assert result.scales_tested == default_scales(scene.diameter, 8 / 243)
    assert result.value >= 0
