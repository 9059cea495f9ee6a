"""
End-to-end property checks over many seeded grids: back-off against outage,
multi-user diversity, material ranking and mirror-size coverage ranking.
"""
import numpy as np
import pytest
from scipy.stats import spearmanr

from modules.backoff import compute_backoff_map, normalized_neighborhood_power
from modules.constants import DEFAULT_KAPPAS, DEFAULT_USER_COUNTS, MIRROR_WIDTHS
from modules.grid import GridSpec, high_rss_region
from modules.lidar_fov import LidarConfig, coverage_by_size, coverage_fraction
from modules.outage_sim import brute_force_outage, estimate_outage, estimate_outage_sweep
from modules.scene import MaterialKind, SceneConfig
from modules.scheduler import diversity_ccdf
from modules.stats import ccdf, default_thresholds, dominates
from modules.synth import SynthParams, synthesize_rss_grid
from tests.conftest import random_grid, scene_with_panel_at

DISPLACEMENTS = [0.3, 0.9, 1.5, 2.1]


@pytest.fixture(scope='module')
def seeded_grids():
    scene, spec = SceneConfig(), GridSpec.default()
    return scene, [synthesize_rss_grid(scene, spec, SynthParams(seed=s)) for s in range(20)]


def test_backoff_never_raises_outage(seeded_grids):
    scene, grids = seeded_grids
    for seed, grid in enumerate(grids):
        curves = estimate_outage_sweep(grid, scene, DEFAULT_KAPPAS, DISPLACEMENTS, trials=1000,
                                       seed=seed, delta_max=10.0)
        for lower, higher in zip(curves, curves[1:]):
            assert all(h <= l for l, h in zip(lower.p_out, higher.p_out))


def test_outage_grows_with_displacement(seeded_grids):
    scene, grids = seeded_grids
    for seed, grid in enumerate(grids):
        for kappa in DEFAULT_KAPPAS:
            backoff = compute_backoff_map(grid, kappa)
            curve = estimate_outage(grid, backoff, scene, DISPLACEMENTS, trials=1000, seed=seed)
            assert all(a <= b for a, b in zip(curve.p_out, curve.p_out[1:]))


@pytest.mark.parametrize('seed', range(10))
def test_monte_carlo_agrees_with_enumeration(seed):
    scene = scene_with_panel_at(0.15, -5.0) if seed % 2 else scene_with_panel_at(2.05, -2.05)
    grid = random_grid(4, 4, seed=100 + seed)
    backoff = compute_backoff_map(grid, 0.5)
    curve = estimate_outage(grid, backoff, scene, [0.3, 0.6], trials=100_000, seed=seed)
    for n_steps, estimate in zip((1, 2), curve.p_out):
        assert estimate == pytest.approx(brute_force_outage(grid, backoff, scene, n_steps), abs=0.01)


def test_more_users_never_hurt(seeded_grids):
    _, grids = seeded_grids
    for seed, grid in enumerate(grids[:10]):
        region = high_rss_region(grid, 0.25)
        th = default_thresholds(grid.values())
        curves = [diversity_ccdf(grid, region, k, 10_000, seed=seed, thresholds=th) for k in DEFAULT_USER_COUNTS]
        for fewer, more in zip(curves, curves[1:]):
            assert dominates(more, fewer, slack=0.02)


def test_material_ranking(seeded_grids):
    scene, grids = seeded_grids
    spec = grids[0].spec
    params = SynthParams(seed=5)
    values = {
        kind: synthesize_rss_grid(scene.with_panel(scene.panel.with_material(kind)), spec, params).values()
        for kind in MaterialKind
    }
    th = default_thresholds(np.concatenate(list(values.values())))
    curves = {kind: ccdf(v, th) for kind, v in values.items()}
    assert dominates(curves[MaterialKind.SILVER], curves[MaterialKind.SILVER_COATED_MIRROR])
    assert curves[MaterialKind.SILVER_COATED_MIRROR].prob == curves[MaterialKind.COPPER].prob
    assert dominates(curves[MaterialKind.SILVER_COATED_MIRROR], curves[MaterialKind.FOAM])


def test_mirror_size_ranking(seeded_grids):
    scene, grids = seeded_grids
    spec = grids[0].spec
    lidar = LidarConfig()
    rows = coverage_by_size(scene, lidar, spec, [(w, 0.3) for w in MIRROR_WIDTHS])
    coverages = [d.coverage for _, _, d in rows]
    assert coverages[0] > coverages[1] > coverages[2]
    huge = scene.with_panel(scene.panel.resized(10.0, 10.0))
    assert coverage_fraction(huge, lidar, spec).coverage == 1.0


def test_backoff_tracks_weak_neighborhoods(seeded_grids):
    _, grids = seeded_grids
    for grid in grids:
        mask = grid.spec.mask
        g = normalized_neighborhood_power(grid)[mask]
        # ranking is taken before the delta_max clamp
        delta = compute_backoff_map(grid, 1.0, delta_max=1e6).delta[mask]
        rho, _ = spearmanr(delta, g)
        assert rho <= -0.99
