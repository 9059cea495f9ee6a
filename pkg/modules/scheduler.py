"""
LiDAR-aided user selection.

User positions (from LiDAR tracking) are mapped onto grid cells; the link
goes to a user standing in the high-RSS region, picked at random when there
are several.  With nobody in the region the strongest user gets the link.
"""
import math
from dataclasses import dataclass
from typing import AbstractSet, List, Optional, Sequence, Tuple

from .constants import logger
from .errors import CoverageError, ParameterError
from .grid import CellIndex, GridSpec, RssGrid
from .rng import SeedStream
from .scene import Point3
from .stats import CcdfCurve, ccdf, default_thresholds
from .workers import run_chunked

MIDPOINT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class UserSet:
    positions: Tuple[Point3, ...]

    def __post_init__(self):
        if len(self.positions) < 1:
            raise ParameterError("a user set needs at least one user")

    @property
    def k(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class ScheduleDecision:
    selected_user: int
    cell: CellIndex
    scheduled_rss: float
    in_high_region: bool


def position_to_cell(spec: GridSpec, p: Point3) -> CellIndex:
    """
    Valid cell whose center is nearest to (p.x, p.y).

    A point exactly between two centers goes to the lower (row, col).
    """
    half = spec.cell_size / 2.0
    x_lo, y_lo = spec.origin.x - half, spec.origin.y - half
    x_hi = spec.origin.x + (spec.n_cols - 1) * spec.cell_size + half
    y_hi = spec.origin.y + (spec.n_rows - 1) * spec.cell_size + half
    if not (x_lo - MIDPOINT_TOLERANCE <= p.x <= x_hi + MIDPOINT_TOLERANCE and
            y_lo - MIDPOINT_TOLERANCE <= p.y <= y_hi + MIDPOINT_TOLERANCE):
        raise CoverageError(f"position ({p.x:.3f}, {p.y:.3f}) lies outside the grid footprint")

    col = math.ceil((p.x - spec.origin.x) / spec.cell_size - 0.5 - MIDPOINT_TOLERANCE)
    row = math.ceil((p.y - spec.origin.y) / spec.cell_size - 0.5 - MIDPOINT_TOLERANCE)
    cell = CellIndex(min(max(row, 0), spec.n_rows - 1), min(max(col, 0), spec.n_cols - 1))
    if not spec.mask[cell.row, cell.col]:
        raise CoverageError(f"position ({p.x:.3f}, {p.y:.3f}) falls in masked cell {tuple(cell)}")
    return cell


def _choose(cells: Sequence[CellIndex], in_region: Sequence[bool], rss: Sequence[float],
            stream: SeedStream) -> Tuple[int, bool]:
    """Index of the scheduled user and whether it stood in the region"""
    candidates = sorted((cells[i], i) for i, inside in enumerate(in_region) if inside)
    if len(candidates) == 1:
        return candidates[0][1], True
    if candidates:
        return candidates[stream.below(len(candidates))][1], True
    best = max(range(len(cells)), key=lambda i: (rss[i], -i))
    return best, False


def select_user(grid: RssGrid, region: AbstractSet[CellIndex], users: UserSet, seed: int) -> ScheduleDecision:
    """
    Pick the user that gets the mm-wave link.

    Args:
        grid: RSS map the positions are looked up in
        region: high-RSS cells (e.g. high_rss_region(grid, 0.25))
        users: current LiDAR-derived user positions
        seed: seed of the random draw among in-region users

    Returns:
        ScheduleDecision for the selected user
    """
    if not region:
        raise ParameterError("high-RSS region is empty")
    cells: List[CellIndex] = []
    for i, p in enumerate(users.positions):
        try:
            cells.append(position_to_cell(grid.spec, p))
        except CoverageError as e:
            raise CoverageError(f"user {i}: {e}", user=i) from e

    rss = [float(grid.rss[c.row, c.col]) for c in cells]
    chosen, inside = _choose(cells, [c in region for c in cells], rss, SeedStream(seed))
    return ScheduleDecision(selected_user=chosen, cell=cells[chosen], scheduled_rss=rss[chosen],
                            in_high_region=inside)


@dataclass(frozen=True)
class DiversityRun:
    curve: CcdfCurve
    scheduled: Tuple[float, ...]
    in_region_fraction: float


def simulate_diversity(grid: RssGrid, region: AbstractSet[CellIndex], k: int, instances: int, seed: int,
                       thresholds: Optional[Sequence[float]] = None, threads: int = 1) -> DiversityRun:
    """
    Scheduled RSS over `instances` random placements of `k` users.

    Instance j places its users uniformly over the valid cells (cell centers)
    and breaks ties from the stream derive_seed(seed, j).
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if instances < 1:
        raise ParameterError(f"instances must be >= 1, got {instances}")
    if not region:
        raise ParameterError("high-RSS region is empty")

    cells = grid.spec.valid_cells()
    rss = [float(grid.rss[c.row, c.col]) for c in cells]
    inside = [c in region for c in cells]
    n_valid = len(cells)

    def work(indices: range) -> List[Tuple[float, bool]]:
        out = []
        for j in indices:
            stream = SeedStream.for_trial(seed, j)
            placed = [stream.below(n_valid) for _ in range(k)]
            chosen, hit = _choose([cells[i] for i in placed], [inside[i] for i in placed],
                                  [rss[i] for i in placed], stream)
            out.append((rss[placed[chosen]], hit))
        return out

    results = run_chunked(work, instances, threads)
    scheduled = tuple(r for r, _ in results)
    in_region_fraction = sum(hit for _, hit in results) / instances
    th = default_thresholds(grid.values()) if thresholds is None else thresholds
    curve = ccdf(scheduled, th)
    logger.info(f"User selection k={k}: {instances} instances, in-region fraction {in_region_fraction:.3f}")
    return DiversityRun(curve=curve, scheduled=scheduled, in_region_fraction=in_region_fraction)


def diversity_ccdf(grid: RssGrid, region: AbstractSet[CellIndex], k: int, instances: int, seed: int,
                   thresholds: Optional[Sequence[float]] = None, threads: int = 1) -> CcdfCurve:
    """Empirical CCDF of the scheduled RSS for k users (thresholds default to the grid's sweep)"""
    return simulate_diversity(grid, region, k, instances, seed, thresholds, threads).curve
