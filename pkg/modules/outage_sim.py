"""
Outage probability versus user displacement.

A user starts at d_0 and walks toward the reflector; the link was set up
assuming effective_rss(d_0) = rss(d_0) - delta(d_0).  Outage happens when the
channel along the walk dips below that assumed level:

    min_{i >= 1} rss(d_i) < effective_rss(d_0)

`literal=True` evaluates the inequality the other way round
(effective_rss(d_0) < min_{i >= 1} rss(d_i)) for comparison.
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .backoff import BackoffMap, compute_backoff_map, effective_rss_grid
from .constants import logger
from .errors import ParameterError
from .grid import CellIndex, GridSpec, RssGrid
from .rng import SeedStream
from .scene import SceneConfig
from .workers import run_chunked

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Trajectory:
    cells: Tuple[CellIndex, ...]
    step: float

    def __post_init__(self):
        if not self.cells:
            raise ParameterError("trajectory needs at least its start cell")
        for a, b in zip(self.cells, self.cells[1:]):
            if max(abs(a[0] - b[0]), abs(a[1] - b[1])) != 1:
                raise ParameterError(f"trajectory cells {tuple(a)} and {tuple(b)} are not grid-adjacent")

    @property
    def displacement(self) -> float:
        return (len(self.cells) - 1) * self.step

    def check_descent(self, spec: GridSpec, scene: SceneConfig) -> None:
        """Every cell valid and each step strictly closer (in plan) to the panel center"""
        target = scene.panel.center
        previous = None
        for cell in self.cells:
            spec.check_cell(cell)
            center = spec.cell_center(cell)
            dist = math.hypot(center.x - target.x, center.y - target.y)
            if previous is not None and not dist < previous - TIE_TOLERANCE:
                raise ParameterError(f"trajectory step into {tuple(cell)} does not approach the panel")
            previous = dist


@dataclass(frozen=True)
class OutageCurve:
    displacements: Tuple[float, ...]
    p_out: Tuple[float, ...]
    trials: int
    kappa: float
    seed: int


class DescentTable:
    """
    Greedy moves toward the panel: for each valid cell, the valid 8-neighbors
    that most decrease the plan distance to the panel center (ties kept,
    sorted by cell index).  Empty when no neighbor is closer.
    """

    def __init__(self, spec: GridSpec, scene: SceneConfig):
        self.spec = spec
        self.cells: List[CellIndex] = spec.valid_cells()
        self.position: Dict[CellIndex, int] = {c: i for i, c in enumerate(self.cells)}
        target = scene.panel.center
        centers = spec.center_xy()
        dist = np.hypot(centers[..., 0] - target.x, centers[..., 1] - target.y)

        self.moves: List[Tuple[int, ...]] = []
        for cell in self.cells:
            own = dist[cell.row, cell.col]
            options = [(dist[n.row, n.col], n) for n in spec.neighbors(cell)]
            closer = [(d, n) for d, n in options if d < own - TIE_TOLERANCE]
            if not closer:
                self.moves.append(())
                continue
            best = min(d for d, _ in closer)
            ties = sorted(n for d, n in closer if d <= best + TIE_TOLERANCE)
            self.moves.append(tuple(self.position[n] for n in ties))

    def walk(self, start: int, n_steps: int, stream: SeedStream) -> List[int]:
        path = [start]
        current = start
        for _ in range(n_steps):
            options = self.moves[current]
            if not options:
                break
            current = options[0] if len(options) == 1 else options[stream.below(len(options))]
            path.append(current)
        return path


def generate_trajectory(grid: RssGrid, scene: SceneConfig, start, n_steps: int, seed: int) -> Trajectory:
    """
    Greedy walk of up to `n_steps` cells toward the panel center.

    Ties between equally good neighbors are broken by a seeded uniform draw;
    the walk stops early when no neighbor is closer to the panel.
    """
    start = grid.spec.check_cell(start)
    if n_steps < 0:
        raise ParameterError(f"n_steps must be >= 0, got {n_steps}")
    table = DescentTable(grid.spec, scene)
    path = table.walk(table.position[start], n_steps, SeedStream(seed))
    traj = Trajectory(cells=tuple(table.cells[i] for i in path), step=grid.spec.cell_size)
    traj.check_descent(grid.spec, scene)
    return traj


def outage_event(grid: RssGrid, backoff: BackoffMap, traj: Trajectory, literal: bool = False) -> bool:
    """True iff the RSS along the walk drops below the level assumed at its start"""
    grid.check_spec(backoff.spec, 'back-off map')
    for cell in traj.cells:
        grid.spec.check_cell(cell)
    if len(traj.cells) < 2:
        return False
    start = traj.cells[0]
    assumed = grid.rss[start.row, start.col] - backoff.delta[start.row, start.col]
    lowest = min(grid.rss[c.row, c.col] for c in traj.cells[1:])
    if literal:
        return bool(assumed < lowest)
    return bool(lowest < assumed)


def displacement_steps(displacements: Sequence[float], cell_size: float) -> List[int]:
    """Whole-cell step count per displacement"""
    steps = []
    previous = None
    for d in displacements:
        if not math.isfinite(d) or d < 0:
            raise ParameterError(f"displacement {d} m is not representable as >= 0 steps")
        if previous is not None and d <= previous:
            raise ParameterError("displacements must be strictly increasing")
        previous = d
        n = round(d / cell_size)
        if abs(n * cell_size - d) > 1e-6:
            logger.warning(f"Displacement {d} m is not a whole number of {cell_size} m cells; using {n} steps")
        steps.append(n)
    return steps


class _OutageKernel:
    """Flat per-valid-cell arrays shared by every trial"""

    def __init__(self, grid: RssGrid, backoff: BackoffMap, scene: SceneConfig, literal: bool):
        self.table = DescentTable(grid.spec, scene)
        effective = effective_rss_grid(grid, backoff)
        self.rss = [float(grid.rss[c.row, c.col]) for c in self.table.cells]
        self.assumed = [float(effective[c.row, c.col]) for c in self.table.cells]
        self.literal = literal

    def outcomes(self, path: List[int], steps: Sequence[int]) -> List[bool]:
        assumed = self.assumed[path[0]]
        results = []
        lowest = math.inf
        walked = 0
        for n in steps:
            stop = min(n, len(path) - 1)
            for i in range(walked + 1, stop + 1):
                lowest = min(lowest, self.rss[path[i]])
            walked = max(walked, stop)
            if stop == 0:
                results.append(False)
            elif self.literal:
                results.append(assumed < lowest)
            else:
                results.append(lowest < assumed)
        return results


def estimate_outage(grid: RssGrid, backoff: BackoffMap, scene: SceneConfig, displacements: Sequence[float],
                    trials: int, seed: int, threads: int = 1, literal: bool = False) -> OutageCurve:
    """
    Monte Carlo outage probability per displacement.

    Trial i draws its start cell uniformly over the valid cells and then its
    tie-breaks from the stream seeded with derive_seed(seed, i).  The same
    trial streams serve every displacement, so longer walks extend shorter
    ones and the curve is identical for any thread count.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    grid.check_spec(backoff.spec, 'back-off map')
    steps = displacement_steps(displacements, grid.spec.cell_size)
    kernel = _OutageKernel(grid, backoff, scene, literal)
    n_valid = len(kernel.table.cells)
    max_steps = max(steps) if steps else 0

    def work(indices: range) -> List[List[bool]]:
        out = []
        for i in indices:
            stream = SeedStream.for_trial(seed, i)
            path = kernel.table.walk(stream.below(n_valid), max_steps, stream)
            out.append(kernel.outcomes(path, steps))
        return out

    results = run_chunked(work, trials, threads)
    counts = [0] * len(steps)
    for outcome in results:
        for j, hit in enumerate(outcome):
            counts[j] += hit
    p_out = tuple(c / trials for c in counts)

    logger.info(f"Outage kappa={backoff.kappa}: trials={trials}, p_out={[round(p, 4) for p in p_out]}")
    return OutageCurve(displacements=tuple(float(d) for d in displacements), p_out=p_out,
                       trials=trials, kappa=backoff.kappa, seed=seed)


def brute_force_outage(grid: RssGrid, backoff: BackoffMap, scene: SceneConfig, n_steps: int,
                       literal: bool = False) -> float:
    """
    Exact outage probability: every start cell with equal weight, every
    tie-break branch with equal weight within its tie.  Meant for small grids.
    """
    if n_steps < 0:
        raise ParameterError(f"n_steps must be >= 0, got {n_steps}")
    grid.check_spec(backoff.spec, 'back-off map')
    kernel = _OutageKernel(grid, backoff, scene, literal)
    table = kernel.table
    n_valid = len(table.cells)
    if n_valid > 64:
        logger.warning(f"Brute-force outage over {n_valid} cells may be slow")

    def explore(path: List[int], weight: float) -> float:
        options = table.moves[path[-1]]
        if len(path) - 1 == n_steps or not options:
            return weight * kernel.outcomes(path, [n_steps])[0]
        share = weight / len(options)
        return sum(explore(path + [nxt], share) for nxt in options)

    return sum(explore([start], 1.0 / n_valid) for start in range(n_valid))


def estimate_outage_sweep(grid: RssGrid, scene: SceneConfig, kappas: Sequence[float], displacements: Sequence[float],
                          trials: int, seed: int, delta_max: float, threads: int = 1,
                          literal: bool = False) -> List[OutageCurve]:
    """One OutageCurve per kappa, all sharing the same trial streams"""
    curves = []
    for kappa in kappas:
        backoff = compute_backoff_map(grid, kappa, delta_max)
        curves.append(estimate_outage(grid, backoff, scene, displacements, trials, seed,
                                      threads=threads, literal=literal))
    return curves
