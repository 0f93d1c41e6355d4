"""
Preset registry for selfsim.

This module keeps a registry of named IFS builders so configurations can
refer to standard systems by name and callers can add their own.
"""

import math
from typing import Callable, Dict, List

from .errors import unknown_preset_error
from .ifs import IfsSystem, SimilarityMap

PresetBuilder = Callable[[], IfsSystem]


class PresetRegistry:
    """Manages the named preset systems."""

    def __init__(self):
        self.builders: Dict[str, PresetBuilder] = {}

    def register(self, name: str, builder: PresetBuilder):
        """Register a preset builder under ``name``."""
        self.builders[name] = builder

    def build(self, name: str) -> IfsSystem:
        """Build the preset called ``name``."""
        if name not in self.builders:
            raise unknown_preset_error(name, self.names())
        return self.builders[name]()

    def names(self) -> List[str]:
        """List all registered preset names."""
        return sorted(self.builders)


def sierpinski_carpet() -> IfsSystem:
    """Eight maps of ratio 1/3 onto the outer sub-squares of the unit square."""
    maps = [
        SimilarityMap(1 / 3, translation=(i / 3, j / 3))
        for i in range(3) for j in range(3) if (i, j) != (1, 1)
    ]
    seed = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    hole = [(1 / 3, 1 / 3), (2 / 3, 1 / 3), (2 / 3, 2 / 3), (1 / 3, 2 / 3)]
    return IfsSystem(tuple(maps), seed, (hole,), "sierpinski-carpet")


def sierpinski_gasket() -> IfsSystem:
    """Three maps of ratio 1/2 onto the corners of the unit equilateral triangle."""
    h = math.sqrt(3) / 2
    corners = [(0.0, 0.0), (1.0, 0.0), (0.5, h)]
    maps = [SimilarityMap(0.5, translation=(x / 2, y / 2)) for x, y in corners]
    hole = [(0.5, 0.0), (0.75, h / 2), (0.25, h / 2)]
    return IfsSystem(tuple(maps), corners, (hole,), "sierpinski-gasket")


# Global preset registry
preset_registry = PresetRegistry()
preset_registry.register("sierpinski-carpet", sierpinski_carpet)
preset_registry.register("sierpinski-gasket", sierpinski_gasket)


def register_preset(name: str, builder: PresetBuilder):
    """Register a preset builder globally."""
    preset_registry.register(name, builder)


def build_preset(name: str) -> IfsSystem:
    """Build a registered preset; unknown names raise ConfigError."""
    return preset_registry.build(name)


def list_presets() -> List[str]:
    return preset_registry.names()


get_preset = build_preset


__all__ = [
    "PresetRegistry", "preset_registry", "register_preset", "build_preset", "get_preset", "list_presets",
    "sierpinski_carpet", "sierpinski_gasket",
]
