"""
Synthetic RSS grids standing in for the unpublished 60 GHz measurements.

RSS(p) = tx_power + antenna_gain - FSPL(L, f) - reflection_loss + ripple(L) + shadow(p)

with L the unfolded specular path length via the panel.  The ripple term
reproduces the uneven reflected beam; the shadow term is a seeded,
spatially correlated, zero-mean Gaussian field.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.ndimage import gaussian_filter

from .constants import logger
from .errors import GeometryError, ParameterError
from .grid import GridSpec, RssGrid
from .scene import SceneConfig, path_length_via_panel


@dataclass(frozen=True)
class SynthParams:
    tx_power: float = 10.0              # dBm
    antenna_gain: float = 30.0          # dB, tx + rx boresight
    ripple_amplitude: float = 3.0       # dB
    ripple_period: float = 0.9          # m of path length
    shadowing_sigma: float = 2.0        # dB
    shadowing_correlation: float = 0.6  # m
    seed: int = 0

    def __post_init__(self):
        if not self.ripple_period > 0:
            raise ParameterError(f"ripple_period must be positive, got {self.ripple_period}")
        if not self.shadowing_sigma >= 0:
            raise ParameterError(f"shadowing_sigma must be non-negative, got {self.shadowing_sigma}")
        if not self.shadowing_correlation > 0:
            raise ParameterError(f"shadowing_correlation must be positive, got {self.shadowing_correlation}")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def fspl_db(distance: float, frequency: float) -> float:
    """Free-space path loss 20*log10(4*pi*d*f/c) in dB"""
    return 20.0 * math.log10(4.0 * math.pi * distance * frequency / constants.speed_of_light)


def shadow_field(spec: GridSpec, params: SynthParams) -> np.ndarray:
    """
    Correlated zero-mean Gaussian field over the grid, std `shadowing_sigma`
    across the valid cells.  Depends only on the seed and grid shape.
    """
    field = np.zeros((spec.n_rows, spec.n_cols))
    if params.shadowing_sigma == 0:
        return field
    rng = np.random.default_rng(params.seed)
    noise = rng.standard_normal((spec.n_rows, spec.n_cols))
    smooth = gaussian_filter(noise, sigma=params.shadowing_correlation / spec.cell_size, mode='reflect')
    valid = smooth[spec.mask]
    std = valid.std()
    if std == 0:
        return field
    field = (smooth - valid.mean()) / std * params.shadowing_sigma
    field[~spec.mask] = 0.0
    return field


def path_lengths(scene: SceneConfig, spec: GridSpec) -> np.ndarray:
    """Unfolded tx -> panel -> cell path length per valid cell at receiver height; NaN where masked"""
    lengths = np.full((spec.n_rows, spec.n_cols), np.nan)
    for cell in spec.valid_cells():
        rx = spec.cell_center(cell).with_z(scene.rx_height)
        try:
            lengths[cell.row, cell.col] = path_length_via_panel(scene.tx_position, rx, scene.panel)
        except GeometryError as e:
            logger.error(f"No specular path to cell ({cell.row}, {cell.col})")
            raise GeometryError(f"cell ({cell.row}, {cell.col}) has no specular path via the panel: {e}") from e
    return lengths


def synthesize_rss_grid(scene: SceneConfig, spec: GridSpec, params: SynthParams) -> RssGrid:
    """Deterministic RSS grid for (scene, spec, params)"""
    lengths = path_lengths(scene, spec)
    shadow = shadow_field(spec, params)
    base = params.tx_power + params.antenna_gain - scene.reflection_loss

    rss = np.full((spec.n_rows, spec.n_cols), np.nan)
    for cell in spec.valid_cells():
        length = lengths[cell.row, cell.col]
        ripple = params.ripple_amplitude * math.sin(2.0 * math.pi * length / params.ripple_period)
        rss[cell.row, cell.col] = (base - fspl_db(length, scene.carrier_frequency)
                                   + ripple + shadow[cell.row, cell.col])

    grid = RssGrid(spec, rss)
    logger.info(
        f"Synthesized {spec.n_valid}-cell grid ({scene.panel.material.value}, seed {params.seed}): "
        f"RSS {grid.min_rss:.2f} .. {grid.max_rss:.2f} dBm"
    )
    return grid
