import math

import pytest

from selfsim.config import ALL_METRICS, apply_overrides, load_config, parse_config
from selfsim.errors import ConfigError

from conftest import CARPET_CONFIG

HOLE = "[[1/3, 1/3], [2/3, 1/3], [2/3, 2/3], [1/3, 2/3]]"


def _custom_carpet(extra=""):
    lines = ["custom.seed = [[0, 0], [1, 0], [1, 1], [0, 1]]", f"custom.carve[0] = {HOLE}"]
    k = 0
    for i in range(3):
        for j in range(3):
            if (i, j) == (1, 1):
                continue
            lines.append(f"custom.maps[{k}].scale = 1/3")
            lines.append(f"custom.maps[{k}].translation = [{i}/3, {j}/3]")
            k += 1
    return "\n".join(lines) + "\n" + extra


def test_defaults():
    config = parse_config(CARPET_CONFIG)
    assert config.preset == "sierpinski-carpet"
    assert config.depth == 4
    assert config.resolution == 729
    assert config.metrics == list(ALL_METRICS)
    assert config.scales is None
    assert not config.timings
    assert len(config.system.maps) == 8


def test_depth_must_be_positive():
    with pytest.raises(ConfigError) as info:
        parse_config(CARPET_CONFIG + "depth = 0\n")
    assert "depth must be ≥ 1" in info.value.message
    assert info.value.key == "depth"
    assert info.value.line == 2


def test_depth_capped_by_max_depth():
    with pytest.raises(ConfigError):
        parse_config(CARPET_CONFIG + "depth = 5\nmax_depth = 4\n")


def test_resolution_floor():
    with pytest.raises(ConfigError) as info:
        parse_config(CARPET_CONFIG + "resolution = 8\n")
    assert "resolution must be ≥ 16" in info.value.message


@pytest.mark.parametrize("text, fragment", [
    ("colour = 3\n", "unknown key"),
    ("depth = 2\ndepth = 3\n", "duplicate key"),
    ("depth 3\n", "expected 'key = value'"),
    ("2depth = 3\n", "malformed key"),
    ("depth =\n", "missing value"),
    ("scales = [1/3,\n", "unclosed bracket"),
    ("depth = open('x')\n", "only sqrt, sin and cos"),
    ("depth = __import__\n", "unknown name"),
    ("thinning = 1/0\n", "constant folding failed"),
    ("thinning = 10**10**10\n", "exceeds 64"),
    ("thinning = (2**64)**2\n", "integer base too large"),
])
def test_lexical_errors(text, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(CARPET_CONFIG + text)
    assert fragment in info.value.message


def test_values_fold_expressions_and_span_lines():
    config = parse_config(CARPET_CONFIG + "\n".join([
        "scales = [1/3,   # coarse",
        "          1/9]",
        "points = [[0.5, 0.5], [-1, sqrt(4)]]",
        "similarity_tolerance = 10**-6",
        "timings = true",
        "metrics = ['porosity', 'separation']",
        "",
    ]))
    assert config.scales == [1 / 3, 1 / 9]
    assert config.points == [(0.5, 0.5), (-1.0, 2.0)]
    assert config.similarity_tolerance == pytest.approx(1e-6)
    assert config.timings
    # canonical order regardless of how the list was written
    assert config.metrics == ["separation", "porosity"]


def test_comment_marker_inside_string_is_kept():
    config = parse_config(CARPET_CONFIG + 'out = "runs/#1.json"  # report\n')
    assert config.out == "runs/#1.json"


def test_metrics_validation():
    assert parse_config(CARPET_CONFIG + "metrics = 'all'\n").metrics == list(ALL_METRICS)
    with pytest.raises(ConfigError) as info:
        parse_config(CARPET_CONFIG + "metrics = ['hausdorff']\n")
    assert info.value.key == "metrics"


def test_preset_and_custom_are_exclusive():
    with pytest.raises(ConfigError) as info:
        parse_config(CARPET_CONFIG + "custom.seed = [[0, 0], [1, 0], [1, 1]]\n")
    assert "mutually exclusive" in info.value.message
    with pytest.raises(ConfigError):
        parse_config("depth = 2\n")


def test_unknown_preset():
    with pytest.raises(ConfigError) as info:
        parse_config('preset = "menger-sponge"\n')
    assert info.value.key == "preset"


def test_custom_carpet_matches_preset():
    config = parse_config(_custom_carpet("depth = 2\n"))
    assert config.preset is None
    assert len(config.system.maps) == 8
    assert config.system.component_count(3) == 73
    assert config.to_dict()["custom"]["seed"] == [[0, 0], [1, 0], [1, 1], [0, 1]]


def test_custom_map_with_rotation_and_reflection():
    # a quarter turn after the flip (x, y) -> (x, -y) swaps the axes, so the cell is unchanged
    text = _custom_carpet().replace("custom.maps[0].scale = 1/3",
                                    "custom.maps[0].scale = 1/3\ncustom.maps[0].rotation = pi/2\n"
                                    "custom.maps[0].reflect = true")
    config = parse_config(text)
    first = config.system.maps[0]
    assert first.rotation == pytest.approx(math.pi / 2)
    assert first.reflect


def test_overlapping_carve_is_rejected():
    text = _custom_carpet("custom.carve[1] = [[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]\n")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == "custom"


def test_custom_indices_must_be_contiguous():
    text = _custom_carpet().replace("custom.maps[7]", "custom.maps[9]")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert "without gaps" in info.value.message


def test_custom_map_scale_must_contract():
    text = _custom_carpet().replace("custom.maps[3].scale = 1/3", "custom.maps[3].scale = 1.5")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == "custom.maps[3].scale"


def test_apply_overrides():
    config = parse_config(CARPET_CONFIG)
    changed = apply_overrides(config, depth=2, resolution=None, timings=True)
    assert changed.depth == 2
    assert changed.resolution == 729
    assert changed.timings
    assert config.depth == 4
    with pytest.raises(ConfigError):
        apply_overrides(config, depth=0)
    with pytest.raises(ConfigError):
        apply_overrides(config, resolution=4)


def test_load_config(write_config, tmp_path):
    config = load_config(write_config(CARPET_CONFIG + "depth = 3\n"))
    assert config.depth == 3
    with pytest.raises(ConfigError) as info:
        load_config(str(tmp_path / "absent.cfg"))
    assert "cannot read configuration" in info.value.message


def test_config_echo_omits_output_paths():
    config = parse_config(CARPET_CONFIG + 'out = "r.json"\nsvg = "r.svg"\n')
    echo = config.to_dict()
    assert "out" not in echo and "svg" not in echo
    assert echo["preset"] == "sierpinski-carpet"
    assert echo["custom"] is None
