"""Exception hierarchy shared by the library and the command line.

Every class carries the process exit code the CLI maps it to.
"""
import copy
from typing import Optional


class GhostSimError(Exception):
    exit_code = 3

    def in_context(self, context: str) -> "GhostSimError":
        """A copy of this error, same class and attributes, with context prefixed to the message."""
        clone = copy.copy(self)
        message = str(self.args[0]) if self.args else ""
        clone.args = (f"{context}: {message}",) + tuple(self.args[1:])
        return clone


class InvalidArgumentError(GhostSimError, ValueError):
    """A precondition on an operation's arguments does not hold."""


class ShapeError(GhostSimError, ValueError):
    """Two objects that must share a grid do not."""


class AliasingError(InvalidArgumentError):
    """The Fresnel chirp is undersampled on the requested grids."""


class DegenerateStatisticsError(GhostSimError):
    """An estimator has nothing to normalize by (dark bucket, zero baseline, opaque object)."""


class UnsupportedProfileError(GhostSimError):
    """A closed form was requested for a source profile it does not cover."""


class NotMeasurableError(GhostSimError):
    """The requested quantity is not resolvable above the noise."""


class ScenarioError(GhostSimError):
    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)


class ExportError(GhostSimError):
    exit_code = 4

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
