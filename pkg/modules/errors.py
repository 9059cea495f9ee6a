"""
Exception hierarchy for the simulator.

Library code raises these; modules.cli maps each family onto an exit code.
"""
from typing import Optional


class SimulatorError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigError(SimulatorError):
    """Unreadable config file, unknown key or invalid value"""


class GeometryError(SimulatorError):
    """Degenerate or geometrically impossible query"""


class ParameterError(SimulatorError):
    """Experiment parameter outside its allowed range"""


class SpecMismatchError(SimulatorError):
    """Grid, back-off map or trajectory built over different grid specs"""


class CellIndexError(SimulatorError, IndexError):
    """Cell outside the grid or masked out"""


class CoverageError(SimulatorError):
    """Position that does not map onto a valid grid cell"""

    def __init__(self, message: str, user: Optional[int] = None):
        super().__init__(message)
        self.user = user


class StatsError(SimulatorError):
    """Invalid input to an empirical distribution utility"""


class ComparisonError(StatsError):
    """Curves that cannot be compared point by point"""


class ArtifactWriteError(SimulatorError):
    """Output file could not be written"""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path


class GridError(SimulatorError):
    """Base class for grid file problems"""

    def __init__(self, message: str, path: str = '', line: Optional[int] = None):
        location = path
        if line is not None:
            location = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class GridFileNotFoundError(GridError):
    pass


class MalformedRowError(GridError):
    pass


class DuplicateCellError(GridError):
    pass


class NonFiniteRssError(GridError):
    pass


class EmptyGridError(GridError):
    pass
