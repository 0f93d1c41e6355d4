"""
Error classes for selfsim.

This module defines structured exception classes for consistent error handling
across the selfsim package. Every error carries a stable code and a details
dictionary so the CLI and the report layer can surface it without parsing
messages.
"""

from typing import Optional, Dict, Any, Sequence


class SelfSimError(Exception):
    """Base exception class for all selfsim errors."""

    def __init__(self, message: str, code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.code = code or "SELFSIM_ERROR"
        self.details = details or {}
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary representation."""
        return {
            "type": self.__class__.__name__,
            "code": self.code,
            "message": self.message,
            "details": self.details
        }


class ConfigError(SelfSimError):
    """Exception raised when a configuration document is malformed or violates a constraint."""

    def __init__(self, message: str, key: Optional[str] = None, constraint: Optional[str] = None,
                 line: Optional[int] = None):
        details: Dict[str, Any] = {}
        if key:
            details["key"] = key
        if constraint:
            details["constraint"] = constraint
        if line is not None:
            details["line"] = line

        super().__init__(message, "CONFIG_ERROR", details)
        self.key = key
        self.constraint = constraint
        self.line = line


class ValidationError(SelfSimError):
    """Exception raised when a geometric object violates one of its invariants."""

    def __init__(self, message: str, type_name: Optional[str] = None, constraint: Optional[str] = None):
        details = {}
        if type_name:
            details["type_name"] = type_name
        if constraint:
            details["constraint"] = constraint

        super().__init__(message, "VALIDATION_ERROR", details)
        self.type_name = type_name
        self.constraint = constraint


class BoundsError(SelfSimError):
    """Exception raised when a numeric parameter falls outside its admissible range."""

    def __init__(self, message: str, parameter: Optional[str] = None, value: Any = None,
                 limits: Optional[Sequence[Any]] = None):
        details: Dict[str, Any] = {}
        if parameter:
            details["parameter"] = parameter
        if value is not None:
            details["value"] = value
        if limits is not None:
            details["limits"] = list(limits)

        super().__init__(message, "BOUNDS_ERROR", details)
        self.parameter = parameter


class ResourceError(SelfSimError):
    """Exception raised when a computation would exceed a configured size cap."""

    def __init__(self, message: str, required: Optional[int] = None, limit: Optional[int] = None):
        details = {}
        if required is not None:
            details["required"] = required
        if limit is not None:
            details["limit"] = limit

        super().__init__(message, "RESOURCE_ERROR", details)


class DomainError(SelfSimError):
    """Exception raised when an operation is applied outside its mathematical domain."""

    def __init__(self, message: str, operation: Optional[str] = None):
        details = {}
        if operation:
            details["operation"] = operation

        super().__init__(message, "DOMAIN_ERROR", details)
        self.operation = operation


class NumericalError(SelfSimError):
    """Exception raised when a numerical consistency check fails."""

    def __init__(self, message: str, operation: Optional[str] = None, residual: Optional[float] = None):
        details: Dict[str, Any] = {}
        if operation:
            details["operation"] = operation
        if residual is not None:
            details["residual"] = residual

        super().__init__(message, "NUMERICAL_ERROR", details)


class RenderError(SelfSimError):
    """Exception raised when a figure or debug image cannot be written."""

    def __init__(self, message: str, path: Optional[str] = None):
        details = {}
        if path:
            details["path"] = path

        super().__init__(message, "RENDER_ERROR", details)
        self.path = path


# Error factories for common error scenarios
def unknown_preset_error(name: str, valid: Sequence[str]) -> ConfigError:
    """Create an unknown preset error listing the valid names."""
    return ConfigError(f"Unknown preset '{name}'; valid presets: {', '.join(valid)}",
                       key="preset", constraint="one of " + ", ".join(valid))


def depth_out_of_range_error(depth: int, max_depth: int) -> BoundsError:
    """Create a depth bounds error."""
    return BoundsError(f"depth must be in [1, {max_depth}], got {depth}",
                       parameter="depth", value=depth, limits=(1, max_depth))


def point_on_set_error(operation: str) -> DomainError:
    """Create the error raised when a query point lies on E."""
    return DomainError("point on E within resolution; refine grid or move point", operation)


def grid_too_large_error(width: int, height: int, limit: int) -> ResourceError:
    """Create a grid size error with a memory estimate."""
    cells = width * height
    # occupancy byte + squared distance + distance + label per cell
    required_bytes = cells * (1 + 8 + 8 + 8)
    return ResourceError(
        f"grid of {width}x{height} cells exceeds the cap of {limit} cells per side; "
        f"about {required_bytes / 2 ** 20:.1f} MiB would be required",
        required=required_bytes, limit=limit)


# Export all error classes
__all__ = [
    "SelfSimError", "ConfigError", "ValidationError", "BoundsError", "ResourceError",
    "DomainError", "NumericalError", "RenderError",
    "unknown_preset_error", "depth_out_of_range_error", "point_on_set_error",
    "grid_too_large_error"
]
