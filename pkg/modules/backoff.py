"""
Location-dependent RSS back-off.

The link is provisioned against rss(d) - delta(d) with
delta(d) = min(kappa / g(d), delta_max), where g(d) is the nearest-neighbor
mean power around d normalized by the strongest cell of the grid, so
g in (0, 1] and weak neighborhoods get the largest back-off.
"""
from dataclasses import dataclass

import numpy as np

from .constants import logger
from .errors import ParameterError
from .grid import GridSpec, RssGrid, nearest_neighbor_means
from .utils import db_to_linear

DEFAULT_DELTA_MAX = 10.0


@dataclass(frozen=True, eq=False)
class BackoffMap:
    spec: GridSpec
    delta: np.ndarray
    kappa: float
    delta_max: float

    def value(self, cell) -> float:
        cell = self.spec.check_cell(cell)
        return float(self.delta[cell.row, cell.col])


def normalized_neighborhood_power(grid: RssGrid) -> np.ndarray:
    """g(d) per cell: linear nearest-neighbor mean power over the grid's maximum cell power"""
    means = nearest_neighbor_means(grid)
    peak = db_to_linear(grid.max_rss)
    g = db_to_linear(means) / peak
    g[~grid.spec.mask] = np.nan
    return g


def compute_backoff_map(grid: RssGrid, kappa: float, delta_max: float = DEFAULT_DELTA_MAX) -> BackoffMap:
    """
    Per-cell back-off for constant `kappa`.

    Args:
        grid: RSS grid the link is provisioned on
        kappa: dimensionless back-off constant, >= 0
        delta_max: cap on the back-off in dB, > 0

    Returns:
        BackoffMap over grid.spec; kappa = 0 gives the all-zero map
    """
    if not kappa >= 0:
        raise ParameterError(f"kappa must be non-negative, got {kappa}")
    if not delta_max > 0:
        raise ParameterError(f"delta_max must be positive, got {delta_max}")

    mask = grid.spec.mask
    delta = np.zeros(grid.rss.shape)
    if kappa > 0:
        g = normalized_neighborhood_power(grid)
        delta[mask] = np.minimum(kappa / g[mask], delta_max)
    delta[~mask] = np.nan
    delta.setflags(write=False)

    logger.debug(f"Back-off map kappa={kappa}: delta {np.nanmin(delta):.3f} .. {np.nanmax(delta):.3f} dB")
    return BackoffMap(spec=grid.spec, delta=delta, kappa=float(kappa), delta_max=float(delta_max))


def effective_rss(grid: RssGrid, backoff: BackoffMap, cell) -> float:
    """RSS the transmitter assumes at `cell`: rss - delta"""
    grid.check_spec(backoff.spec, 'back-off map')
    cell = grid.spec.check_cell(cell)
    return float(grid.rss[cell.row, cell.col] - backoff.delta[cell.row, cell.col])


def effective_rss_grid(grid: RssGrid, backoff: BackoffMap) -> np.ndarray:
    """effective_rss for every cell; NaN where masked"""
    grid.check_spec(backoff.spec, 'back-off map')
    return grid.rss - backoff.delta
