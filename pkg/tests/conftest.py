import numpy as np
import pytest

from modules.grid import GridSpec, RssGrid
from modules.scene import Point3, ReflectorPanel, SceneConfig
from modules.synth import SynthParams, synthesize_rss_grid


def scene_with_panel_at(x: float, y: float, **panel_kwargs) -> SceneConfig:
    """Scene whose panel sits at plan position (x, y), transmitter 3.8 m in front of it"""
    panel = ReflectorPanel(center=Point3(x, y, 0.0), **panel_kwargs)
    tx = Point3(x - 3.8, y, 1.5)
    return SceneConfig(tx_position=tx, lidar_position=tx, panel=panel)


def random_grid(rows: int, cols: int, seed: int, low: float = -70.0, high: float = -40.0) -> RssGrid:
    rng = np.random.default_rng(seed)
    return RssGrid.from_rows(rng.uniform(low, high, size=(rows, cols)))


@pytest.fixture
def default_scene() -> SceneConfig:
    return SceneConfig()


@pytest.fixture
def default_spec() -> GridSpec:
    return GridSpec.default()


@pytest.fixture
def synth_grid(default_scene, default_spec) -> RssGrid:
    return synthesize_rss_grid(default_scene, default_spec, SynthParams(seed=11))


@pytest.fixture
def uniform_grid() -> RssGrid:
    return RssGrid.from_rows(np.full((4, 5), -50.0))
