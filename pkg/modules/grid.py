"""
Receiver grid data model: masked rectangular grid of RSS cells, CSV
persistence, neighborhood queries and high-RSS region extraction.

Row index grows with y, column index with x; cell (0, 0) sits at the grid
origin.  Masked-out cells hold NaN in the RSS array.
"""
import csv
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from .constants import CSV_PRECISION, GRID_HEADER, LATTICE_TOLERANCE, logger
from .errors import (
    ArtifactWriteError,
    CellIndexError,
    DuplicateCellError,
    EmptyGridError,
    GridFileNotFoundError,
    MalformedRowError,
    NonFiniteRssError,
    ParameterError,
    SpecMismatchError,
)
from .scene import Point3
from .utils import db_to_linear, linear_to_db

DEFAULT_CELL_SIZE = 0.3

# Moore neighborhood
NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


class CellIndex(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class GridSpec:
    origin: Point3
    cell_size: float
    n_rows: int
    n_cols: int
    mask: np.ndarray

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ParameterError(f"cell_size must be positive, got {self.cell_size}")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ParameterError(f"grid needs at least one row and column, got {self.n_rows}x{self.n_cols}")
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != (self.n_rows, self.n_cols):
            raise ParameterError(f"mask shape {mask.shape} does not match {self.n_rows}x{self.n_cols}")
        if not mask.any():
            raise ParameterError("grid has no valid cells")
        mask.setflags(write=False)
        object.__setattr__(self, 'mask', mask)

    @classmethod
    def full(cls, origin: Point3, cell_size: float, n_rows: int, n_cols: int,
             masked: Iterable = ()) -> 'GridSpec':
        """Rectangular grid with every cell valid except `masked`"""
        mask = np.ones((n_rows, n_cols), dtype=bool)
        for row, col in masked:
            if not (0 <= row < n_rows and 0 <= col < n_cols):
                raise CellIndexError(f"masked cell ({row}, {col}) outside {n_rows}x{n_cols} grid")
            mask[row, col] = False
        return cls(origin=origin, cell_size=cell_size, n_rows=n_rows, n_cols=n_cols, mask=mask)

    @classmethod
    def default(cls) -> 'GridSpec':
        """17 x 6 cells at 0.3 m pitch across the NLoS leg (102 points)"""
        return cls.full(Point3(0.35, 0.15, 0.0), DEFAULT_CELL_SIZE, 17, 6)

    @property
    def n_valid(self) -> int:
        return int(self.mask.sum())

    def same_as(self, other: 'GridSpec') -> bool:
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and math.isclose(self.cell_size, other.cell_size, abs_tol=1e-12)
            and self.origin == other.origin
            and np.array_equal(self.mask, other.mask)
        )

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.n_rows and 0 <= cell[1] < self.n_cols

    def is_valid(self, cell) -> bool:
        return self.in_bounds(cell) and bool(self.mask[cell[0], cell[1]])

    def check_cell(self, cell) -> CellIndex:
        if not self.in_bounds(cell):
            raise CellIndexError(f"cell {tuple(cell)} outside {self.n_rows}x{self.n_cols} grid")
        if not self.mask[cell[0], cell[1]]:
            raise CellIndexError(f"cell {tuple(cell)} is masked out")
        return CellIndex(int(cell[0]), int(cell[1]))

    def valid_cells(self) -> List[CellIndex]:
        """Valid cells in row-major order"""
        rows, cols = np.nonzero(self.mask)
        return [CellIndex(int(r), int(c)) for r, c in zip(rows, cols)]

    def cell_center(self, cell) -> Point3:
        return Point3(
            self.origin.x + cell[1] * self.cell_size,
            self.origin.y + cell[0] * self.cell_size,
            self.origin.z,
        )

    def center_xy(self) -> np.ndarray:
        """(n_rows, n_cols, 2) array of cell-center plan coordinates"""
        cols, rows = np.meshgrid(np.arange(self.n_cols), np.arange(self.n_rows))
        return np.stack([self.origin.x + cols * self.cell_size,
                         self.origin.y + rows * self.cell_size], axis=-1)

    def neighbors(self, cell) -> List[CellIndex]:
        """Valid 8-connected neighbors of `cell`"""
        row, col = cell
        return [
            CellIndex(row + dr, col + dc)
            for dr, dc in NEIGHBOR_OFFSETS
            if self.is_valid((row + dr, col + dc))
        ]


@dataclass(frozen=True, eq=False)
class RssGrid:
    spec: GridSpec
    rss: np.ndarray

    def __post_init__(self):
        rss = np.array(self.rss, dtype=float)
        if rss.shape != (self.spec.n_rows, self.spec.n_cols):
            raise ParameterError(f"RSS shape {rss.shape} does not match grid {self.spec.n_rows}x{self.spec.n_cols}")
        valid = self.spec.mask
        if not np.all(np.isfinite(rss[valid])):
            raise ParameterError("every valid cell needs a finite RSS value")
        rss[~valid] = np.nan
        rss.setflags(write=False)
        object.__setattr__(self, 'rss', rss)

    @classmethod
    def from_rows(cls, values, cell_size: float = DEFAULT_CELL_SIZE, origin: Optional[Point3] = None) -> 'RssGrid':
        """Fully valid grid from a 2-D list of dB values (row 0 first)"""
        arr = np.atleast_2d(np.asarray(values, dtype=float))
        spec = GridSpec.full(origin or Point3(0.0, 0.0, 0.0), cell_size, arr.shape[0], arr.shape[1])
        return cls(spec, arr)

    def value(self, cell) -> float:
        cell = self.spec.check_cell(cell)
        return float(self.rss[cell.row, cell.col])

    def values(self) -> np.ndarray:
        """RSS of the valid cells, row-major"""
        return self.rss[self.spec.mask]

    @property
    def min_rss(self) -> float:
        return float(np.min(self.values()))

    @property
    def max_rss(self) -> float:
        return float(np.max(self.values()))

    def check_spec(self, other: GridSpec, what: str = 'map') -> None:
        if not self.spec.same_as(other):
            raise SpecMismatchError(f"{what} was built over a different grid spec")


def _fmt(value: float) -> str:
    return f"{round(value, CSV_PRECISION) + 0.0:.{CSV_PRECISION}f}"


def save_grid(grid: RssGrid, path: str) -> None:
    """Write the grid CSV: header then one `x_m,y_m,rss_db` row per valid cell, row-major"""
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(GRID_HEADER)
            for cell in grid.spec.valid_cells():
                center = grid.spec.cell_center(cell)
                writer.writerow([_fmt(center.x), _fmt(center.y), _fmt(grid.rss[cell.row, cell.col])])
    except OSError as e:
        logger.error(f"Error saving grid to {path}: {e}")
        raise ArtifactWriteError(path, str(e)) from e
    logger.info(f"Saved grid with {grid.spec.n_valid} cells to {path}")


def _infer_cell_size(xs: np.ndarray, ys: np.ndarray) -> float:
    gaps = []
    for coords in (xs, ys):
        unique = np.unique(np.round(coords, CSV_PRECISION))
        if unique.size > 1:
            gaps.append(float(np.min(np.diff(unique))))
    return min(gaps) if gaps else DEFAULT_CELL_SIZE


def load_grid(path: str, cell_size: Optional[float] = None, origin: Optional[Point3] = None,
              shape: Optional[Tuple[int, int]] = None) -> RssGrid:
    """
    Load a grid CSV written by save_grid (or any file in that format).

    Args:
        path: CSV file with header `x_m,y_m,rss_db`
        cell_size: grid pitch; inferred from the smallest coordinate gap when omitted
        origin: center of cell (0, 0); the smallest x and y in the file when omitted
        shape: (n_rows, n_cols); the extent of the file's rows when omitted

    Returns:
        RssGrid whose valid cells are exactly the file's rows
    """
    try:
        with open(path, 'r', newline='') as f:
            lines = f.read().splitlines()
    except FileNotFoundError as e:
        raise GridFileNotFoundError("grid file not found", path=path) from e
    except OSError as e:
        raise GridFileNotFoundError(f"cannot read grid file: {e}", path=path) from e

    if not lines or tuple(h.strip() for h in lines[0].split(',')) != GRID_HEADER:
        raise MalformedRowError(f"expected header '{','.join(GRID_HEADER)}'", path=path, line=1)

    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(',')
        if len(fields) != 3:
            raise MalformedRowError(f"expected 3 fields, got {len(fields)}", path=path, line=line_no)
        try:
            x, y, rss = (float(v) for v in fields)
        except ValueError as e:
            raise MalformedRowError(f"unparsable number ({e})", path=path, line=line_no) from e
        if not (math.isfinite(x) and math.isfinite(y)):
            raise MalformedRowError("non-finite cell coordinate", path=path, line=line_no)
        if not math.isfinite(rss):
            raise NonFiniteRssError(f"non-finite RSS '{fields[2].strip()}'", path=path, line=line_no)
        rows.append((line_no, x, y, rss))

    if not rows:
        raise EmptyGridError("no valid cells", path=path)

    xs = np.array([r[1] for r in rows])
    ys = np.array([r[2] for r in rows])
    pitch = cell_size if cell_size is not None else _infer_cell_size(xs, ys)
    if origin is None:
        origin = Point3(float(xs.min()), float(ys.min()), 0.0)

    placed = {}
    for line_no, x, y, rss in rows:
        col_f = (x - origin.x) / pitch
        row_f = (y - origin.y) / pitch
        col, row = round(col_f), round(row_f)
        if abs(col_f - col) * pitch > LATTICE_TOLERANCE or abs(row_f - row) * pitch > LATTICE_TOLERANCE:
            raise MalformedRowError(f"({x}, {y}) is off the {pitch} m lattice", path=path, line=line_no)
        if row < 0 or col < 0 or (shape is not None and (row >= shape[0] or col >= shape[1])):
            raise MalformedRowError(f"({x}, {y}) lies outside the grid", path=path, line=line_no)
        if (row, col) in placed:
            raise DuplicateCellError(f"duplicate cell ({x}, {y}), first seen on line {placed[(row, col)][0]}",
                                     path=path, line=line_no)
        placed[(row, col)] = (line_no, rss)

    if shape is not None:
        n_rows, n_cols = shape
    else:
        n_rows = max(r for r, _ in placed) + 1
        n_cols = max(c for _, c in placed) + 1
    mask = np.zeros((n_rows, n_cols), dtype=bool)
    rss = np.full((n_rows, n_cols), np.nan)
    for (row, col), (_, value) in placed.items():
        mask[row, col] = True
        rss[row, col] = value

    spec = GridSpec(origin=origin, cell_size=pitch, n_rows=n_rows, n_cols=n_cols, mask=mask)
    logger.debug(f"Loaded grid {path}: {n_rows}x{n_cols}, {spec.n_valid} valid cells, pitch {pitch} m")
    return RssGrid(spec, rss)


def nearest_neighbor_mean(grid: RssGrid, cell) -> float:
    """
    Mean RSS of the valid 8-neighbors, averaged in linear power, in dB.

    The cell's own value is excluded; a cell with no valid neighbor returns
    its own RSS.
    """
    cell = grid.spec.check_cell(cell)
    neighbors = grid.spec.neighbors(cell)
    if not neighbors:
        return float(grid.rss[cell.row, cell.col])
    powers = db_to_linear([grid.rss[n.row, n.col] for n in neighbors])
    return float(linear_to_db(np.mean(powers)))


def nearest_neighbor_means(grid: RssGrid) -> np.ndarray:
    """nearest_neighbor_mean for every cell; NaN where masked"""
    out = np.full(grid.rss.shape, np.nan)
    for cell in grid.spec.valid_cells():
        out[cell.row, cell.col] = nearest_neighbor_mean(grid, cell)
    return out


def high_rss_region(grid: RssGrid, quantile: float) -> FrozenSet[CellIndex]:
    """Top-`quantile` fraction of valid cells by RSS; cells tied at the cut are all kept"""
    if not 0.0 < quantile < 1.0:
        raise ParameterError(f"quantile must lie in (0, 1), got {quantile}")
    cells = grid.spec.valid_cells()
    values = np.array([grid.rss[c.row, c.col] for c in cells])
    n_top = max(1, math.ceil(quantile * len(cells) - 1e-9))
    cut = np.sort(values)[::-1][n_top - 1]
    return frozenset(c for c, v in zip(cells, values) if v >= cut)
