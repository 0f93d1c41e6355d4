"""
Run configuration for selfsim.

This module parses the line-oriented ``key = value`` configuration format.
Each value is parsed with Python's ``ast`` module and folded to a constant,
so values such as ``1/3``, ``sqrt(3)/2`` or ``[[0, 0], [1, 0]]`` are allowed
while anything that would need evaluation of arbitrary code is rejected.
"""

import ast
import dataclasses
import logging
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from .errors import ConfigError, ValidationError
from .ifs import DEFAULT_MAX_COMPONENTS, DEFAULT_MAX_DEPTH, IfsSystem, SimilarityMap
from .metrics import DEFAULT_SAMPLES_PER_EDGE, DEFAULT_SIMILARITY_TOLERANCE, DEFAULT_THINNING
from .presets import build_preset
from .raster import DEFAULT_MAX_GRID_SIDE

logger = logging.getLogger(__name__)

ALL_METRICS = ("roundness", "separation", "porosity", "component_in_ball", "path",
               "similarity", "measure", "topology")

MIN_RESOLUTION = 16

_KEY = re.compile(r"^[A-Za-z_]\w*(\[\d+\])?(\.[A-Za-z_]\w*(\[\d+\])?)*$")
_MAP_KEY = re.compile(r"^custom\.maps\[(\d+)\]\.(scale|rotation|reflect|translation)$")
_CARVE_KEY = re.compile(r"^custom\.carve\[(\d+)\]$")

_SCALAR_KEYS = {
    "preset", "depth", "resolution", "scales", "samples_per_edge", "metrics", "points",
    "max_depth", "max_components", "max_grid_side", "similarity_tolerance", "thinning",
    "timings", "out", "svg", "custom.seed",
}


@dataclass
class RunConfig:
    """Validated run configuration with defaults applied."""
    system: IfsSystem
    preset: Optional[str] = None
    depth: int = 4
    resolution: int = 729
    scales: Optional[List[float]] = None
    samples_per_edge: int = DEFAULT_SAMPLES_PER_EDGE
    metrics: List[str] = field(default_factory=lambda: list(ALL_METRICS))
    points: Optional[List[Tuple[float, float]]] = None
    max_depth: int = DEFAULT_MAX_DEPTH
    max_components: int = DEFAULT_MAX_COMPONENTS
    max_grid_side: int = DEFAULT_MAX_GRID_SIDE
    similarity_tolerance: float = DEFAULT_SIMILARITY_TOLERANCE
    thinning: float = DEFAULT_THINNING
    timings: bool = False
    out: Optional[str] = None
    svg: Optional[str] = None

    def wants(self, metric: str) -> bool:
        return metric in self.metrics

    def to_dict(self) -> Dict[str, Any]:
        """Configuration echo for reports (output paths excluded)."""
        return {
            "preset": self.preset,
            "custom": None if self.preset else self.system.to_dict(),
            "depth": self.depth,
            "resolution": self.resolution,
            "scales": self.scales,
            "samples_per_edge": self.samples_per_edge,
            "metrics": list(self.metrics),
            "points": None if self.points is None else [list(p) for p in self.points],
            "max_depth": self.max_depth,
            "max_components": self.max_components,
            "max_grid_side": self.max_grid_side,
            "similarity_tolerance": self.similarity_tolerance,
            "thinning": self.thinning,
        }


class ValueFolder:
    """Folds a parsed value expression to a Python constant."""

    BIN_OPS: Dict[type, Callable[[Any, Any], Any]] = {
        ast.Add: operator.add,
        ast.Sub: operator.sub,
        ast.Mult: operator.mul,
        ast.Div: operator.truediv,
        ast.Pow: operator.pow,
    }
    NAMES = {"true": True, "false": False, "pi": math.pi}
    FUNCTIONS: Dict[str, Callable[[float], float]] = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos}
    MAX_EXPONENT = 64

    def __init__(self, key: str, line: int):
        self.key = key
        self.line = line

    def error(self, message: str, constraint: str = "constant expression") -> ConfigError:
        return ConfigError(f"line {self.line}: {self.key}: {message}", self.key, constraint, self.line)

    def fold_text(self, text: str) -> Any:
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as e:
            raise self.error(f"cannot parse value ({e.msg})") from e
        return self.fold(tree.body)

    def fold(self, node: ast.AST) -> Any:
        method = getattr(self, f"_fold_{type(node).__name__}", None)
        if method is None:
            raise self.error(f"unsupported expression {type(node).__name__}")
        return method(node)

    def _fold_Constant(self, node: ast.Constant) -> Any:
        if isinstance(node.value, (bool, int, float, str)):
            return node.value
        raise self.error(f"unsupported literal {node.value!r}")

    def _fold_List(self, node: ast.List) -> List[Any]:
        return [self.fold(elt) for elt in node.elts]

    def _fold_Tuple(self, node: ast.Tuple) -> List[Any]:
        return [self.fold(elt) for elt in node.elts]

    def _fold_Name(self, node: ast.Name) -> Any:
        if node.id in self.NAMES:
            return self.NAMES[node.id]
        raise self.error(f"unknown name '{node.id}'")

    def _fold_UnaryOp(self, node: ast.UnaryOp) -> Any:
        value = self._number(self.fold(node.operand))
        if isinstance(node.op, ast.USub):
            return -value
        if isinstance(node.op, ast.UAdd):
            return value
        raise self.error("unsupported unary operator")

    def _fold_BinOp(self, node: ast.BinOp) -> Any:
        op = self.BIN_OPS.get(type(node.op))
        if op is None:
            raise self.error("unsupported operator")
        left = self._number(self.fold(node.left))
        right = self._number(self.fold(node.right))
        if isinstance(node.op, ast.Pow):
            if abs(right) > self.MAX_EXPONENT:
                raise self.error(f"exponent {right} exceeds {self.MAX_EXPONENT}", "exponent <= 64")
            if isinstance(left, int) and left.bit_length() > self.MAX_EXPONENT:
                raise self.error("integer base too large for a power", "base < 2**64")
        try:
            return op(left, right)
        except (ZeroDivisionError, OverflowError, ValueError) as e:
            raise self.error(f"constant folding failed: {e}") from e

    def _fold_Call(self, node: ast.Call) -> float:
        if not isinstance(node.func, ast.Name) or node.func.id not in self.FUNCTIONS:
            raise self.error("only sqrt, sin and cos may be called")
        if len(node.args) != 1 or node.keywords:
            raise self.error(f"{node.func.id} takes exactly one argument")
        try:
            return self.FUNCTIONS[node.func.id](self._number(self.fold(node.args[0])))
        except ValueError as e:
            raise self.error(f"constant folding failed: {e}") from e

    def _number(self, value: Any) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error("arithmetic needs numbers", "number")
        return value


class ConfigParser:
    """Parses configuration documents into RunConfig objects."""

    def __init__(self, source: str = "<config>"):
        self.source = source
        self.lines: Dict[str, int] = {}

    def parse(self, text: str) -> RunConfig:
        values = self._read_pairs(text)
        return self._build(values)

    # -- lexical layer -----------------------------------------------------

    def _read_pairs(self, text: str) -> Dict[str, Any]:
        self.lines = {}
        values: Dict[str, Any] = {}
        pending: Optional[Tuple[str, int, List[str]]] = None
        for number, raw in enumerate(text.splitlines(), start=1):
            line = _strip_comment(raw)
            if pending is not None:
                key, start, parts = pending
                parts.append(line)
                if _depth("\n".join(parts)) <= 0:
                    values[key] = ValueFolder(key, start).fold_text("\n".join(parts))
                    pending = None
                continue
            if not line.strip():
                continue
            if "=" not in line:
                raise ConfigError(f"line {number}: expected 'key = value'", None, "key = value", number)
            key, _, value = line.partition("=")
            key = key.strip()
            if not _KEY.match(key):
                raise ConfigError(f"line {number}: malformed key '{key}'", key, "dotted identifier", number)
            if key in self.lines:
                raise ConfigError(f"line {number}: duplicate key '{key}' (first set on line {self.lines[key]})",
                                  key, "each key at most once", number)
            if not self._known(key):
                raise ConfigError(f"line {number}: unknown key '{key}'", key, "known configuration key", number)
            self.lines[key] = number
            if not value.strip():
                raise ConfigError(f"line {number}: {key}: missing value", key, "value required", number)
            if _depth(value) > 0:
                pending = (key, number, [value])
                continue
            values[key] = ValueFolder(key, number).fold_text(value)
        if pending is not None:
            key, start, _ = pending
            raise ConfigError(f"line {start}: {key}: unclosed bracket", key, "balanced brackets", start)
        return values

    @staticmethod
    def _known(key: str) -> bool:
        return key in _SCALAR_KEYS or bool(_MAP_KEY.match(key)) or bool(_CARVE_KEY.match(key))

    # -- semantic layer ----------------------------------------------------

    def _fail(self, key: str, message: str, constraint: str) -> ConfigError:
        line = self.lines.get(key)
        prefix = f"line {line}: " if line is not None else ""
        return ConfigError(f"{prefix}{message}", key, constraint, line)

    def _int(self, values: Dict[str, Any], key: str, default: int, minimum: int) -> int:
        if key not in values:
            return default
        value = values[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise self._fail(key, f"{key} must be an integer", "integer")
        if value < minimum:
            raise self._fail(key, f"{key} must be ≥ {minimum}", f">= {minimum}")
        return value

    def _float(self, values: Dict[str, Any], key: str, default: float, minimum: float,
               strict: bool = False) -> float:
        if key not in values:
            return default
        value = values[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise self._fail(key, f"{key} must be a finite number", "number")
        if value < minimum or (strict and value == minimum):
            relation = ">" if strict else "≥"
            raise self._fail(key, f"{key} must be {relation} {minimum}", f"{relation} {minimum}")
        return float(value)

    def _points(self, key: str, value: Any) -> List[Tuple[float, float]]:
        if not isinstance(value, list) or not all(
                isinstance(p, list) and len(p) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p) for p in value):
            raise self._fail(key, f"{key} must be a list of [x, y] pairs", "list of 2-vectors")
        return [(float(p[0]), float(p[1])) for p in value]

    def _build(self, values: Dict[str, Any]) -> RunConfig:
        max_depth = self._int(values, "max_depth", DEFAULT_MAX_DEPTH, 1)
        depth = self._int(values, "depth", 4, 1)
        if depth > max_depth:
            raise self._fail("depth", f"depth must be ≤ max_depth ({max_depth})", f"<= {max_depth}")

        resolution = values.get("resolution", 729)
        if isinstance(resolution, bool) or not isinstance(resolution, (int, float)) or not math.isfinite(resolution):
            raise self._fail("resolution", "resolution must be a number", "number")
        if resolution < MIN_RESOLUTION:
            raise self._fail("resolution", f"resolution must be ≥ {MIN_RESOLUTION}", f">= {MIN_RESOLUTION}")

        scales = None
        if "scales" in values:
            raw = values["scales"]
            if (not isinstance(raw, list) or not raw
                    or not all(isinstance(r, (int, float)) and not isinstance(r, bool) and r > 0 for r in raw)):
                raise self._fail("scales", "scales must be a non-empty list of positive numbers",
                                 "non-empty list of positive numbers")
            scales = [float(r) for r in raw]

        metrics = values.get("metrics", list(ALL_METRICS))
        if metrics == "all":
            metrics = list(ALL_METRICS)
        if not isinstance(metrics, list) or not all(isinstance(m, str) for m in metrics):
            raise self._fail("metrics", "metrics must be a list of names", "list of strings")
        unknown = [m for m in metrics if m not in ALL_METRICS]
        if unknown:
            raise self._fail("metrics", f"unknown metrics {unknown}; valid: {', '.join(ALL_METRICS)}",
                             "subset of " + ", ".join(ALL_METRICS))
        # keep the canonical order so reports do not depend on how the list was written
        metrics = [m for m in ALL_METRICS if m in metrics]

        for key in ("out", "svg", "preset"):
            if key in values and not isinstance(values[key], str):
                raise self._fail(key, f"{key} must be a string", "string")
        timings = values.get("timings", False)
        if not isinstance(timings, bool):
            raise self._fail("timings", "timings must be true or false", "boolean")

        preset, system = self._system(values)
        return RunConfig(
            system=system,
            preset=preset,
            depth=depth,
            resolution=resolution,
            scales=scales,
            samples_per_edge=self._int(values, "samples_per_edge", DEFAULT_SAMPLES_PER_EDGE, 1),
            metrics=metrics,
            points=self._points("points", values["points"]) if "points" in values else None,
            max_depth=max_depth,
            max_components=self._int(values, "max_components", DEFAULT_MAX_COMPONENTS, 1),
            max_grid_side=self._int(values, "max_grid_side", DEFAULT_MAX_GRID_SIDE, 8),
            similarity_tolerance=self._float(values, "similarity_tolerance", DEFAULT_SIMILARITY_TOLERANCE,
                                             0.0, strict=True),
            thinning=self._float(values, "thinning", DEFAULT_THINNING, 0.0),
            timings=timings,
            out=values.get("out"),
            svg=values.get("svg"),
        )

    def _system(self, values: Dict[str, Any]) -> Tuple[Optional[str], IfsSystem]:
        custom_keys = sorted(k for k in values if k.startswith("custom."))
        if "preset" in values and custom_keys:
            raise self._fail("preset", "preset and custom.* are mutually exclusive", "preset xor custom")
        if "preset" in values:
            name = values["preset"]
            try:
                return name, build_preset(name)
            except ConfigError as e:
                raise self._fail("preset", e.message, e.constraint or "known preset") from e
        if not custom_keys:
            raise ConfigError("either preset or custom.* must be given", "preset", "preset or custom required")

        fields: Dict[int, Dict[str, Any]] = {}
        carve: Dict[int, Any] = {}
        for key in custom_keys:
            m = _MAP_KEY.match(key)
            if m:
                fields.setdefault(int(m.group(1)), {})[m.group(2)] = (key, values[key])
                continue
            m = _CARVE_KEY.match(key)
            if m:
                carve[int(m.group(1))] = self._points(key, values[key])
        if "custom.seed" not in values:
            raise ConfigError("custom.seed is required for a custom system", "custom.seed", "required")
        seed = self._points("custom.seed", values["custom.seed"])
        for name, table in (("custom.maps", fields), ("custom.carve", carve)):
            if sorted(table) != list(range(len(table))):
                raise ConfigError(f"{name} indices must be 0..n-1 without gaps", name, "contiguous indices")
        maps = [self._map(i, fields[i]) for i in range(len(fields))]
        try:
            system = IfsSystem(tuple(maps), seed, tuple(carve[j] for j in range(len(carve))), "custom")
        except ValidationError as e:
            raise ConfigError(f"custom system is invalid: {e.message}", "custom",
                              e.constraint or "valid IFS") from e
        return None, system

    def _map(self, index: int, entries: Dict[str, Tuple[str, Any]]) -> SimilarityMap:
        prefix = f"custom.maps[{index}]"
        for required in ("scale", "translation"):
            if required not in entries:
                raise ConfigError(f"{prefix}.{required} is required", f"{prefix}.{required}", "required")
        scale_key, scale = entries["scale"]
        if isinstance(scale, bool) or not isinstance(scale, (int, float)):
            raise self._fail(scale_key, f"{scale_key} must be a number", "number")
        rotation = entries.get("rotation", (None, 0.0))[1]
        if isinstance(rotation, bool) or not isinstance(rotation, (int, float)):
            raise self._fail(f"{prefix}.rotation", f"{prefix}.rotation must be a number", "number")
        reflect = entries.get("reflect", (None, False))[1]
        if not isinstance(reflect, bool):
            raise self._fail(f"{prefix}.reflect", f"{prefix}.reflect must be true or false", "boolean")
        key, translation = entries["translation"]
        translation = self._points(key, [translation])[0]
        try:
            return SimilarityMap(float(scale), float(rotation), reflect, translation)
        except ValidationError as e:
            raise self._fail(scale_key, f"{prefix}: {e.message}", e.constraint or "valid map") from e


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def _depth(text: str) -> int:
    depth = 0
    quote = None
    for ch in text:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
    return depth


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document into a validated RunConfig."""
    return ConfigParser().parse(text)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read configuration {path}: {e.strerror}", None, "readable file") from e
    logger.info("loaded configuration from %s", path)
    return ConfigParser(path).parse(text)


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Return a copy with command-line overrides applied and re-checked."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "depth" in changes and not 1 <= changes["depth"] <= config.max_depth:
        raise ConfigError(f"depth must be ≥ 1 and ≤ {config.max_depth}", "depth", f"1..{config.max_depth}")
    if "resolution" in changes and changes["resolution"] < MIN_RESOLUTION:
        raise ConfigError(f"resolution must be ≥ {MIN_RESOLUTION}", "resolution", f">= {MIN_RESOLUTION}")
    return dataclasses.replace(config, **changes)


__all__ = [
    "RunConfig", "ConfigParser", "ValueFolder", "ALL_METRICS", "MIN_RESOLUTION",
    "parse_config", "load_config", "apply_overrides",
]
