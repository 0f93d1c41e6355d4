import math

import numpy as np
import pytest

from selfsim.errors import BoundsError, ConfigError, ResourceError, ValidationError
from selfsim.ifs import IfsSystem, Scene, SimilarityMap, apply_similarity, generate_scene, transform_scene
from selfsim.presets import build_preset, get_preset, list_presets, register_preset, sierpinski_carpet

from conftest import UNIT_SQUARE, carpet_scene, gasket_scene


def test_similarity_map_applies_rotation_and_reflection():
    f = SimilarityMap(0.5, rotation=math.pi / 2, translation=(1.0, 0.0))
    np.testing.assert_allclose(apply_similarity(f, (1.0, 0.0)), [1.0, 0.5], atol=1e-15)
    g = SimilarityMap(0.5, reflect=True)
    np.testing.assert_allclose(apply_similarity(g, (0.0, 1.0)), [0.0, -0.5])


@pytest.mark.parametrize("scale", [0.0, 1.0, 1.5, -0.2, float("nan")])
def test_similarity_map_requires_contraction(scale):
    with pytest.raises(ValidationError):
        SimilarityMap(scale)


def test_presets_are_registered():
    assert list_presets() == ["sierpinski-carpet", "sierpinski-gasket"]
    assert get_preset("sierpinski-gasket").name == "sierpinski-gasket"
    with pytest.raises(ConfigError) as info:
        build_preset("menger")
    assert "sierpinski-carpet" in info.value.message


def test_register_custom_preset():
    register_preset("carpet-copy", sierpinski_carpet)
    try:
        assert "carpet-copy" in list_presets()
        assert len(build_preset("carpet-copy").maps) == 8
    finally:
        from selfsim.presets import preset_registry
        del preset_registry.builders["carpet-copy"]


@pytest.mark.parametrize("depth, count", [(1, 1), (2, 9), (3, 73), (4, 585)])
def test_carpet_component_counts(carpet, depth, count):
    assert carpet.component_count(depth) == count
    assert len(carpet_scene(depth).components) == count


def test_gasket_component_counts():
    assert [len(gasket_scene(d).components) for d in (1, 2, 3)] == [1, 4, 13]


def test_component_ids_follow_shortlex_words():
    scene = carpet_scene(3)
    assert [c.id for c in scene.components] == list(range(73))
    words = [(len(c.word), c.word) for c in scene.components]
    assert words == sorted(words)
    assert scene.components[1].word == (0,)
    assert scene.components[9].word == (0, 0)


def test_components_are_counterclockwise(carpet):
    scene = generate_scene(carpet, 2)
    assert all(c.area > 0 for c in scene.components)
    np.testing.assert_allclose(scene.components[0].polygon.min(axis=0), [1 / 3, 1 / 3])


def test_reflecting_map_keeps_orientation():
    maps = (SimilarityMap(1 / 3, reflect=True, translation=(0.0, 1 / 3)),
            SimilarityMap(1 / 3, translation=(2 / 3, 2 / 3)))
    hole = [(1 / 3, 1 / 3), (2 / 3, 1 / 3), (2 / 3, 2 / 3), (1 / 3, 2 / 3)]
    system = IfsSystem(maps, UNIT_SQUARE, (hole,))
    scene = generate_scene(system, 2)
    assert all(c.area > 0 for c in scene.components)


def test_depth_bounds_and_component_cap(carpet):
    with pytest.raises(BoundsError):
        generate_scene(carpet, 0)
    with pytest.raises(BoundsError):
        generate_scene(carpet, 9)
    with pytest.raises(BoundsError):
        generate_scene(carpet, True)
    with pytest.raises(BoundsError):
        generate_scene(carpet, 2.0)
    assert len(generate_scene(carpet, np.int64(2)).components) == 9
    with pytest.raises(ResourceError):
        generate_scene(carpet, 4, max_components=100)


def test_system_invariants():
    hole = [(1 / 3, 1 / 3), (2 / 3, 1 / 3), (2 / 3, 2 / 3), (1 / 3, 2 / 3)]
    good = SimilarityMap(1 / 3)
    with pytest.raises(ValidationError):
        IfsSystem((good,), UNIT_SQUARE, (hole,))
    with pytest.raises(ValidationError):
        IfsSystem((good, SimilarityMap(1 / 3, translation=(0.9, 0.0))), UNIT_SQUARE, (hole,))
    with pytest.raises(ValidationError):
        IfsSystem((good, SimilarityMap(1 / 3, translation=(2 / 3, 0.0))), UNIT_SQUARE,
                  (hole, [(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)]))
    with pytest.raises(ValidationError):
        IfsSystem((good, SimilarityMap(0.5, translation=(0.5, 0.5))), UNIT_SQUARE, (hole,))


def test_filled_model_distance(carpet):
    scene = generate_scene(carpet, 1)
    d = scene.distance_to_E(np.array([[0.5, 0.5], [0.1, 0.1], [-1.0, 0.5], [0.5, 0.4]]))
    np.testing.assert_allclose(d, [1 / 6, 0.0, 1.0, 0.4 - 1 / 3])
    assert scene.on_E((1 / 3, 0.5))
    assert not scene.on_E((0.5, 0.5))


def test_hand_built_scene_models_polylines_only():
    scene = Scene.from_polygons([UNIT_SQUARE])
    assert scene.seed is None
    assert scene.distance_to_E(np.array([[0.5, 0.5]]))[0] == pytest.approx(0.5)
    assert scene.component_at(np.array([[0.5, 0.5], [2.0, 2.0]])).tolist() == [0, -1]


def test_transform_scene_scales_geometry():
    scene = carpet_scene(2)
    moved = transform_scene(scene, 2.0, rotation=math.pi / 5, translation=(3.0, -1.0))
    for a, b in zip(scene.components, moved.components):
        assert b.area == pytest.approx(4 * a.area)
        assert b.diameter == pytest.approx(2 * a.diameter)
    assert moved.diameter > scene.diameter
    assert (moved.name, moved.depth) == (scene.name, scene.depth)
    assert moved.seed is not None and len(moved.seed) == 4
    with pytest.raises(ValidationError):
        transform_scene(scene, 0.0)


def test_scaled_system(carpet):
    big = carpet.scaled(3.0)
    scene = generate_scene(big, 2)
    assert scene.components[0].area == pytest.approx(1.0)
