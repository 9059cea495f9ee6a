import numpy as np
import pytest
from scipy.stats import spearmanr

from modules.backoff import (
    BackoffMap,
    compute_backoff_map,
    effective_rss,
    effective_rss_grid,
    normalized_neighborhood_power,
)
from modules.errors import ParameterError, SpecMismatchError
from modules.grid import RssGrid, nearest_neighbor_mean
from modules.synth import SynthParams, synthesize_rss_grid
from tests.conftest import random_grid


def test_zero_kappa_gives_zero_backoff(synth_grid):
    backoff = compute_backoff_map(synth_grid, 0.0)
    assert np.all(backoff.delta[synth_grid.spec.mask] == 0.0)


def test_uniform_grid_backoff_equals_kappa(uniform_grid):
    g = normalized_neighborhood_power(uniform_grid)
    np.testing.assert_allclose(g, 1.0)
    np.testing.assert_allclose(compute_backoff_map(uniform_grid, 1.5).delta, 1.5)
    np.testing.assert_allclose(compute_backoff_map(uniform_grid, 20.0, delta_max=10.0).delta, 10.0)


def test_weakest_neighborhood_gets_largest_backoff():
    grid = RssGrid.from_rows([[-40.0, -45.0, -60.0],
                              [-42.0, -50.0, -65.0],
                              [-44.0, -55.0, -70.0]])
    means = {c: nearest_neighbor_mean(grid, c) for c in grid.spec.valid_cells()}
    weakest = min(means, key=means.get)
    backoff = compute_backoff_map(grid, 1.0, delta_max=1e6)
    assert backoff.value(weakest) == pytest.approx(np.nanmax(backoff.delta))


def test_normalized_power_in_unit_interval(synth_grid):
    g = normalized_neighborhood_power(synth_grid)[synth_grid.spec.mask]
    assert np.all(g > 0.0) and np.all(g <= 1.0)


def test_backoff_monotone_in_kappa(synth_grid):
    previous = compute_backoff_map(synth_grid, 0.0).delta
    for kappa in (0.25, 0.5, 1.0, 2.0, 4.0):
        current = compute_backoff_map(synth_grid, kappa).delta
        assert np.all(current[synth_grid.spec.mask] >= previous[synth_grid.spec.mask])
        previous = current


def test_backoff_never_exceeds_cap(synth_grid):
    delta = compute_backoff_map(synth_grid, 50.0, delta_max=4.0).delta
    assert np.nanmax(delta) == pytest.approx(4.0)


def test_backoff_non_increasing_in_neighborhood_power(synth_grid):
    g = normalized_neighborhood_power(synth_grid)[synth_grid.spec.mask]
    delta = compute_backoff_map(synth_grid, 1.0).delta[synth_grid.spec.mask]
    order = np.argsort(g)
    assert np.all(np.diff(delta[order]) <= 1e-12)


def test_effective_rss_subtracts_backoff():
    grid = RssGrid.from_rows([[-55.0]])
    backoff = BackoffMap(spec=grid.spec, delta=np.array([[3.0]]), kappa=1.0, delta_max=10.0)
    assert effective_rss(grid, backoff, (0, 0)) == pytest.approx(-58.0)
    zero = compute_backoff_map(grid, 0.0)
    assert effective_rss(grid, zero, (0, 0)) == -55.0


def test_effective_rss_never_above_rss(synth_grid):
    effective = effective_rss_grid(synth_grid, compute_backoff_map(synth_grid, 1.0))
    mask = synth_grid.spec.mask
    assert np.all(effective[mask] <= synth_grid.rss[mask])


def test_effective_rss_rejects_foreign_backoff(synth_grid):
    other = random_grid(3, 3, seed=0)
    with pytest.raises(SpecMismatchError):
        effective_rss(synth_grid, compute_backoff_map(other, 1.0), (0, 0))


@pytest.mark.parametrize('kappa, delta_max', [(-1.0, 10.0), (1.0, 0.0)])
def test_backoff_rejects_bad_parameters(synth_grid, kappa, delta_max):
    with pytest.raises(ParameterError):
        compute_backoff_map(synth_grid, kappa, delta_max)


@pytest.mark.parametrize('seed', range(5))
def test_backoff_rank_anticorrelated_with_neighborhood_power(default_scene, default_spec, seed):
    grid = synthesize_rss_grid(default_scene, default_spec, SynthParams(seed=seed))
    g = normalized_neighborhood_power(grid)[grid.spec.mask]
    delta = compute_backoff_map(grid, 1.0, delta_max=1e6).delta[grid.spec.mask]
    rho, _ = spearmanr(delta, g)
    assert rho <= -0.99
