"""
Mirror-aperture LiDAR visibility.

The LiDAR sees around the corner only through the finite mirror.  Unfolding
the scene across the mirror plane turns that into a straight-line test: a
user point q is visible iff the segment from the LiDAR's image to q passes
through the mirror rectangle.  Users are vertical segments from the floor to
`user_height`, and one visible sample point is enough for a detection.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .constants import PLANE_TOLERANCE, logger
from .errors import ParameterError
from .grid import GridSpec
from .scene import Point3, SceneConfig, image_point, segment_intersects_panel, specular_point
from .workers import run_chunked


@dataclass(frozen=True)
class LidarConfig:
    # None: sensor sits at the scene's lidar_position
    position: Optional[Point3] = None
    user_height: float = 1.8
    samples_per_user: int = 16

    def __post_init__(self):
        if not self.user_height > 0:
            raise ParameterError(f"user_height must be positive, got {self.user_height}")
        if self.samples_per_user < 2:
            raise ParameterError(f"samples_per_user must be >= 2, got {self.samples_per_user}")

    def sensor_position(self, scene: SceneConfig) -> np.ndarray:
        position = scene.lidar_position if self.position is None else self.position
        return position.as_array()


@dataclass(frozen=True, eq=False)
class DetectionMap:
    spec: GridSpec
    detectable: np.ndarray
    coverage: float


def user_samples(lidar: LidarConfig, spec: GridSpec, cell) -> np.ndarray:
    """(samples_per_user, 3) points on the user standing at the cell center"""
    center = spec.cell_center(cell)
    zs = np.linspace(0.0, lidar.user_height, lidar.samples_per_user)
    return np.column_stack([np.full_like(zs, center.x), np.full_like(zs, center.y), zs])


def cell_detectable(scene: SceneConfig, lidar: LidarConfig, spec: GridSpec, cell) -> bool:
    """True iff some sample on the user at `cell` is visible through the mirror"""
    cell = spec.check_cell(cell)
    source = image_point(lidar.sensor_position(scene), scene.panel)
    return any(segment_intersects_panel(source, q, scene.panel) for q in user_samples(lidar, spec, cell))


def cell_detectable_folded(scene: SceneConfig, lidar: LidarConfig, spec: GridSpec, cell) -> bool:
    """
    Same question answered on the folded path: find the specular point of
    each LiDAR -> sample ray on the mirror plane and check it lies on the
    rectangle.
    """
    cell = spec.check_cell(cell)
    panel = scene.panel
    lidar_pos = lidar.sensor_position(scene)
    for q in user_samples(lidar, spec, cell):
        if abs(panel.signed_distance(q)) <= PLANE_TOLERANCE:
            continue
        hit = specular_point(lidar_pos, q, panel) - panel.centroid
        if (abs(float(hit @ panel.direction)) <= panel.width / 2.0
                and abs(float(hit[2])) <= panel.height / 2.0):
            return True
    return False


def coverage_fraction(scene: SceneConfig, lidar: LidarConfig, spec: GridSpec, threads: int = 1) -> DetectionMap:
    """Detectability of every valid cell and the detected share of the grid"""
    cells = spec.valid_cells()

    def work(indices: range) -> List[bool]:
        return [cell_detectable(scene, lidar, spec, cells[i]) for i in indices]

    flags = run_chunked(work, len(cells), threads)
    detectable = np.zeros((spec.n_rows, spec.n_cols), dtype=bool)
    for cell, flag in zip(cells, flags):
        detectable[cell.row, cell.col] = flag
    coverage = sum(flags) / len(cells)
    logger.debug(f"Mirror {scene.panel.width}x{scene.panel.height} m: coverage {coverage:.3f}")
    return DetectionMap(spec=spec, detectable=detectable, coverage=coverage)


def coverage_by_size(scene: SceneConfig, lidar: LidarConfig, spec: GridSpec,
                     sizes: Iterable[Tuple[float, float]], threads: int = 1) -> List[Tuple[float, float, DetectionMap]]:
    """coverage_fraction for each (width, height) mirror size, panel otherwise unchanged"""
    rows = []
    for width, height in sizes:
        resized = scene.with_panel(scene.panel.resized(width, height))
        detection = coverage_fraction(resized, lidar, spec, threads)
        logger.info(f"LiDAR coverage with {width} x {height} m mirror: {detection.coverage:.3f}")
        rows.append((width, height, detection))
    return rows
