import os
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple
from dotenv import dotenv_values, load_dotenv

from .backoff import DEFAULT_DELTA_MAX
from .constants import DEFAULT_QUANTILE, logger
from .errors import ConfigError, SimulatorError
from .grid import GridSpec
from .lidar_fov import LidarConfig
from .scene import DEFAULT_REFLECTION_LOSS, MaterialKind, Point3, ReflectorPanel, SceneConfig
from .synth import SynthParams

# Global environment config (loaded once at startup)
_env_config = None


def load_env_config() -> dict:
    """Load environment configuration from .env file (called once at startup)"""
    global _env_config

    if _env_config is not None:
        return _env_config

    # Load .env file
    load_dotenv()

    _env_config = {
        'timezone': os.getenv('TIMEZONE', 'UTC'),
    }

    logger.debug("Environment configuration loaded from .env")
    return _env_config


def get_env(key: str, default=None):
    """Get environment variable value"""
    if _env_config is None:
        load_env_config()
    return _env_config.get(key, default)


@dataclass(frozen=True)
class BackoffSettings:
    kappa: float = 1.0
    delta_max: float = DEFAULT_DELTA_MAX


@dataclass(frozen=True)
class SimConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    grid: GridSpec = field(default_factory=GridSpec.default)
    synth: SynthParams = field(default_factory=SynthParams)
    backoff: BackoffSettings = field(default_factory=BackoffSettings)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    quantile: float = DEFAULT_QUANTILE
    literal_inequality: bool = False
    source_path: str = ''

    def with_seed(self, seed: int) -> 'SimConfig':
        return replace(self, synth=replace(self.synth, seed=seed))


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------
def _floats(text: str, count: int) -> Tuple[float, ...]:
    parts = [p.strip() for p in text.split(',')]
    if len(parts) != count:
        raise ValueError(f"expected {count} comma separated numbers")
    return tuple(float(p) for p in parts)


def _point3(text: str) -> Point3:
    return Point3(*_floats(text, 3))


def _point2(text: str) -> Tuple[float, float]:
    return _floats(text, 2)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise ValueError("must be a 64-bit unsigned integer")
    return value


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ('true', '1', 'yes'):
        return True
    if lowered in ('false', '0', 'no'):
        return False
    raise ValueError("expected true/false")


def _cells(text: str) -> Tuple[Tuple[int, int], ...]:
    cells = []
    for item in text.split(';'):
        if not item.strip():
            continue
        row, col = item.split(':')
        cells.append((int(row), int(col)))
    return tuple(cells)


KEY_PARSERS: Dict[str, Callable[[str], object]] = {
    'corridor_width': float,
    'tx_position': _point3,
    'rx_height': float,
    'lidar_position': _point3,
    'carrier_frequency': float,
    'panel.center': _point2,
    'panel.azimuth': float,
    'panel.width': float,
    'panel.height': float,
    'panel.mount_height': float,
    'panel.material': MaterialKind.parse,
    'grid.origin': _point2,
    'grid.cell_size': float,
    'grid.n_rows': int,
    'grid.n_cols': int,
    'grid.masked_cells': _cells,
    'tx_power': float,
    'antenna_gain': float,
    'ripple_amplitude': float,
    'ripple_period': float,
    'shadowing_sigma': float,
    'shadowing_correlation': float,
    'seed': _u64,
    'kappa': float,
    'delta_max': float,
    'literal_paper_inequality': _bool,
    'quantile': float,
    'lidar.user_height': float,
    'lidar.samples_per_user': int,
}
KEY_PARSERS.update({f"loss.{kind.value}": float for kind in MaterialKind})


def get_default_config() -> dict:
    """Default value for every config key"""
    scene = SceneConfig()
    panel = scene.panel
    grid = GridSpec.default()
    synth = SynthParams()
    backoff = BackoffSettings()
    lidar = LidarConfig()
    defaults = {
        'corridor_width': scene.corridor_width,
        'tx_position': scene.tx_position,
        'rx_height': scene.rx_height,
        'lidar_position': scene.lidar_position,
        'carrier_frequency': scene.carrier_frequency,
        'panel.center': (panel.center.x, panel.center.y),
        'panel.azimuth': panel.azimuth,
        'panel.width': panel.width,
        'panel.height': panel.height,
        'panel.mount_height': panel.mount_height,
        'panel.material': panel.material,
        'grid.origin': (grid.origin.x, grid.origin.y),
        'grid.cell_size': grid.cell_size,
        'grid.n_rows': grid.n_rows,
        'grid.n_cols': grid.n_cols,
        'grid.masked_cells': (),
        'tx_power': synth.tx_power,
        'antenna_gain': synth.antenna_gain,
        'ripple_amplitude': synth.ripple_amplitude,
        'ripple_period': synth.ripple_period,
        'shadowing_sigma': synth.shadowing_sigma,
        'shadowing_correlation': synth.shadowing_correlation,
        'seed': synth.seed,
        'kappa': backoff.kappa,
        'delta_max': backoff.delta_max,
        'literal_paper_inequality': False,
        'quantile': DEFAULT_QUANTILE,
        'lidar.user_height': lidar.user_height,
        'lidar.samples_per_user': lidar.samples_per_user,
    }
    defaults.update({f"loss.{kind.value}": loss for kind, loss in DEFAULT_REFLECTION_LOSS.items()})
    return defaults


def _parse_values(raw: Dict[str, Optional[str]]) -> dict:
    parsed = {}
    for key, text in raw.items():
        if key not in KEY_PARSERS:
            raise ConfigError(f"unknown config key '{key}'")
        if text is None or not text.strip():
            raise ConfigError(f"config key '{key}' has no value")
        try:
            parsed[key] = KEY_PARSERS[key](text)
        except (ValueError, SimulatorError) as e:
            raise ConfigError(f"invalid value for '{key}': {text!r} ({e})") from e
    return parsed


def build_config(values: dict, source_path: str = '') -> SimConfig:
    """Assemble a SimConfig from a complete key -> typed value mapping"""
    v = values
    try:
        panel = ReflectorPanel(
            center=Point3(v['panel.center'][0], v['panel.center'][1], 0.0),
            azimuth=v['panel.azimuth'],
            width=v['panel.width'],
            height=v['panel.height'],
            mount_height=v['panel.mount_height'],
            material=v['panel.material'],
        )
        scene = SceneConfig(
            corridor_width=v['corridor_width'],
            tx_position=v['tx_position'],
            rx_height=v['rx_height'],
            lidar_position=v['lidar_position'],
            panel=panel,
            carrier_frequency=v['carrier_frequency'],
            reflection_losses={kind: v[f"loss.{kind.value}"] for kind in MaterialKind},
        )
        grid = GridSpec.full(
            Point3(v['grid.origin'][0], v['grid.origin'][1], 0.0),
            v['grid.cell_size'], v['grid.n_rows'], v['grid.n_cols'],
            masked=v['grid.masked_cells'],
        )
        synth = SynthParams(
            tx_power=v['tx_power'],
            antenna_gain=v['antenna_gain'],
            ripple_amplitude=v['ripple_amplitude'],
            ripple_period=v['ripple_period'],
            shadowing_sigma=v['shadowing_sigma'],
            shadowing_correlation=v['shadowing_correlation'],
            seed=v['seed'],
        )
        lidar = LidarConfig(
            user_height=v['lidar.user_height'],
            samples_per_user=v['lidar.samples_per_user'],
        )
    except SimulatorError as e:
        raise ConfigError(str(e)) from e

    if v['kappa'] < 0:
        raise ConfigError(f"kappa must be non-negative, got {v['kappa']}")
    if not v['delta_max'] > 0:
        raise ConfigError(f"delta_max must be positive, got {v['delta_max']}")
    if not 0.0 < v['quantile'] < 1.0:
        raise ConfigError(f"quantile must lie in (0, 1), got {v['quantile']}")

    return SimConfig(
        scene=scene,
        grid=grid,
        synth=synth,
        backoff=BackoffSettings(kappa=v['kappa'], delta_max=v['delta_max']),
        lidar=lidar,
        quantile=v['quantile'],
        literal_inequality=v['literal_paper_inequality'],
        source_path=source_path,
    )


def validate_config(raw: Dict[str, Optional[str]]) -> Tuple[bool, str]:
    """Validate raw key/value pairs from a config file"""
    try:
        values = get_default_config()
        values.update(_parse_values(raw))
        build_config(values)
    except ConfigError as e:
        return False, str(e)
    return True, "Configuration valid"


def load_config(path: Optional[str] = None) -> SimConfig:
    """Load the experiment config file; defaults when no path is given"""
    if not path:
        logger.debug("No config file given, using defaults")
        return build_config(get_default_config())

    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")

    try:
        raw = dotenv_values(path)
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    valid, msg = validate_config(raw)
    if not valid:
        logger.error(f"Invalid config {path}: {msg}")
        raise ConfigError(f"{path}: {msg}")

    values = get_default_config()
    values.update(_parse_values(raw))
    logger.info(f"Loaded config {path} ({len(raw)} keys)")
    return build_config(values, source_path=path)
