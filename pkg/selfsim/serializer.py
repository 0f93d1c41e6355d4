"""
JSON serialization for selfsim reports.

Reports are written as UTF-8 JSON with keys in a fixed order and validated
against REPORT_SCHEMA. Numpy scalars and arrays are converted to plain
Python values so the output does not depend on array dtypes.
"""

import json
import logging
from typing import Any, Dict

import numpy as np

from .errors import RenderError, ValidationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"

_NUMBER_OR_NULL = {"type": ["number", "null"]}
_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_STAMP = {"depth": {"type": "integer", "minimum": 1}, "resolution": {"type": "number"}}

_RADIAL = {
    "type": "object",
    "required": ["depth", "resolution", "value", "scales_tested", "per_scale", "witness"],
    "properties": {
        **_STAMP,
        "value": {"type": "number"},
        "scales_tested": {"type": "array", "items": {"type": "number"}},
        "per_scale": {"type": "array", "items": {"type": "number"}},
        "witness": {
            "type": "object",
            "required": ["x", "r", "ratio"],
            "properties": {"x": _POINT, "r": {"type": "number"}, "ratio": {"type": "number"}},
        },
    },
}

REPORT_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "selfsim report",
    "type": "object",
    "required": ["schema_version", "tool", "units", "config", "system", "depths", "components"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {
            "type": "object",
            "required": ["name", "version"],
            "properties": {"name": {"type": "string"}, "version": {"type": "string"}},
        },
        "units": {"type": "object", "additionalProperties": {"type": "string"}},
        "config": {"type": "object", "required": ["depth", "resolution", "metrics"]},
        "system": {"type": "object", "required": ["name", "maps", "seed", "carve"]},
        "depths": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["depth", "component_count"],
                "properties": {
                    "depth": {"type": "integer", "minimum": 1},
                    "component_count": {"type": "integer", "minimum": 0},
                    "roundness": {
                        "type": "object",
                        "required": ["depth", "resolution", "min", "max", "witness"],
                        "properties": {**_STAMP, "min": {"type": "number"}, "max": {"type": "number"}},
                    },
                    "separation": {
                        "type": "object",
                        "required": ["depth", "resolution", "constant", "unbounded", "witness",
                                     "witness_points"],
                        "properties": {
                            **_STAMP,
                            "constant": _NUMBER_OR_NULL,
                            "unbounded": {"type": "boolean"},
                            "witness": {"type": "array", "items": {"type": "integer"}},
                        },
                    },
                    "porosity": _RADIAL,
                    "component_in_ball": _RADIAL,
                    "path": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["depth", "resolution", "id", "k", "witness"],
                            "properties": {**_STAMP, "k": {"type": "number", "minimum": 1}},
                        },
                    },
                    "similarity_classes": {"type": "integer", "minimum": 1},
                    "measure": {
                        "type": "object",
                        "required": ["depth", "resolution", "perimeter_sum", "area_estimate"],
                        "properties": {**_STAMP, "perimeter_sum": {"type": "number"},
                                       "area_estimate": _NUMBER_OR_NULL},
                    },
                },
            },
        },
        "grid": {
            "type": ["object", "null"],
            "required": ["resolution", "width", "height", "occupied", "labels", "unbounded_label"],
        },
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "generation", "diameter", "inradius", "roundness"],
            },
        },
        "similarity": {"type": ["object", "null"], "required": ["tolerance", "count", "classes"]},
        "topology": {"type": ["object", "null"], "required": ["probes", "pairs"]},
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


def _encode(obj: Any) -> Any:
    """json.dumps fallback for numpy values."""
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


class ReportSerializer:
    """Handles serialization, validation and file output of report documents."""

    @staticmethod
    def to_json(data: Dict[str, Any], indent: int = 2) -> str:
        """Convert a report dictionary to a JSON string, preserving key order."""
        try:
            return json.dumps(data, indent=indent, default=_encode, ensure_ascii=False, allow_nan=False) + "\n"
        except ValueError as e:
            raise ValidationError(f"report contains a non-finite number: {e}", type_name="Report",
                                  constraint="finite numbers") from e

    @staticmethod
    def from_json(json_str: str) -> Dict[str, Any]:
        return json.loads(json_str)

    @staticmethod
    def validate(data: Dict[str, Any]) -> None:
        """Validate a report dictionary against REPORT_SCHEMA."""
        import jsonschema

        try:
            jsonschema.validate(data, REPORT_SCHEMA)
        except jsonschema.ValidationError as e:
            path = "/".join(str(p) for p in e.absolute_path)
            raise ValidationError(f"report does not match schema at '{path}': {e.message}",
                                  type_name="Report", constraint="report schema") from e

    @staticmethod
    def write(data: Dict[str, Any], path: str) -> str:
        """Validate and write a report; returns the JSON text."""
        ReportSerializer.validate(data)
        text = ReportSerializer.to_json(data)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            raise RenderError(f"cannot write report to {path}: {e.strerror}", path) from e
        logger.info("wrote report to %s", path)
        return text

    @staticmethod
    def read(path: str) -> Dict[str, Any]:
        try:
            with open(path, encoding="utf-8") as f:
                return ReportSerializer.from_json(f.read())
        except OSError as e:
            raise RenderError(f"cannot read report {path}: {e.strerror}", path) from e


__all__ = ["ReportSerializer", "REPORT_SCHEMA", "SCHEMA_VERSION"]
