"""
Command-line entry point.

Each subcommand is a thin composition of library calls that writes one data
artifact (CSV, or JSON with --json) plus a run manifest next to it.
"""
import argparse
import math
import sys
from typing import Callable, Dict, List, Optional

from .artifacts import cell_rows, write_table
from .backoff import compute_backoff_map
from .config import SimConfig, get_env, load_config
from .constants import (
    DEFAULT_INSTANCES,
    DEFAULT_KAPPAS,
    DEFAULT_TRIALS,
    DEFAULT_USER_COUNTS,
    EXIT_CONFIG,
    EXIT_GRID,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_OUTPUT,
    EXIT_PARAMETER,
    EXIT_UNKNOWN_COMMAND,
    EXIT_USAGE,
    MIRROR_WIDTHS,
    logger,
)
from .errors import (
    ArtifactWriteError,
    CellIndexError,
    ConfigError,
    CoverageError,
    GeometryError,
    GridError,
    NonFiniteRssError,
    ParameterError,
    SpecMismatchError,
    StatsError,
)
from .grid import high_rss_region, load_grid, save_grid
from .lidar_fov import coverage_by_size
from .manifest import RunManifest
from .outage_sim import estimate_outage_sweep
from .scene import MaterialKind, Point3
from .scheduler import simulate_diversity
from .stats import ccdf, default_thresholds, dominates
from .synth import synthesize_rss_grid
from .utils import parse_float_list, parse_int_list

DEFAULT_DISPLACEMENTS = '0.3,0.9,1.5,2.1'


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _u64(text: str) -> int:
    text = text.strip()
    # decimal unless prefixed; leading zeros allowed
    base = 0 if text[:2].lower() in ('0x', '0o', '0b') else 10
    value = int(text, base)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _float_list(text: str) -> List[float]:
    try:
        return parse_float_list(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers: {e}")


def _int_list(text: str) -> List[int]:
    try:
        return parse_int_list(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated integers: {e}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def cmd_synth_grid(args, config: SimConfig, manifest: RunManifest):
    scene = config.scene
    if args.material:
        scene = scene.with_panel(scene.panel.with_material(MaterialKind.parse(args.material)))
    grid = synthesize_rss_grid(scene, config.grid, config.synth)
    if args.json:
        write_table(args.out, ('x_m', 'y_m', 'rss_db'), cell_rows(grid.spec, grid.rss), as_json=True)
    else:
        save_grid(grid, args.out)
    manifest.add_output(args.out)


def cmd_import_grid(args, config: SimConfig, manifest: RunManifest):
    origin = shape = None
    if args.origin is not None:
        if len(args.origin) != 2:
            raise UsageError('--origin expects x,y')
        origin = Point3(args.origin[0], args.origin[1], 0.0)
    if args.shape is not None:
        if len(args.shape) != 2:
            raise UsageError('--shape expects rows,cols')
        shape = tuple(args.shape)
    grid = load_grid(args.grid, cell_size=args.cell_size, origin=origin, shape=shape)
    logger.info(f"Imported {args.grid}: {grid.spec.n_rows}x{grid.spec.n_cols}, {grid.spec.n_valid} valid cells")
    if args.json:
        write_table(args.out, ('x_m', 'y_m', 'rss_db'), cell_rows(grid.spec, grid.rss), as_json=True)
    else:
        save_grid(grid, args.out)
    manifest.add_output(args.out)


def cmd_backoff_map(args, config: SimConfig, manifest: RunManifest):
    grid = load_grid(args.grid)
    kappa = config.backoff.kappa if args.kappa is None else args.kappa
    backoff = compute_backoff_map(grid, kappa, config.backoff.delta_max)
    write_table(args.out, ('x_m', 'y_m', 'delta_db'), cell_rows(grid.spec, backoff.delta), as_json=args.json)
    manifest.add_output(args.out)


def cmd_outage(args, config: SimConfig, manifest: RunManifest):
    grid = load_grid(args.grid)
    literal = args.literal or config.literal_inequality
    curves = estimate_outage_sweep(grid, config.scene, args.kappa, args.displacements, args.trials,
                                   config.synth.seed, config.backoff.delta_max,
                                   threads=args.threads, literal=literal)
    rows = []
    for curve in curves:
        for d, p in zip(curve.displacements, curve.p_out):
            rows.append([d, curve.kappa, p, curve.trials])
    write_table(args.out, ('displacement_m', 'kappa', 'p_out', 'trials'), rows, as_json=args.json)
    manifest.add_output(args.out)


def cmd_schedule(args, config: SimConfig, manifest: RunManifest):
    grid = load_grid(args.grid)
    quantile = config.quantile if args.quantile is None else args.quantile
    region = high_rss_region(grid, quantile)
    thresholds = default_thresholds(grid.values())
    rows = []
    for k in args.k:
        run = simulate_diversity(grid, region, k, args.instances, config.synth.seed,
                                 thresholds=thresholds, threads=args.threads)
        rows.extend([th, k, p] for th, p in zip(run.curve.thresholds, run.curve.prob))
    write_table(args.out, ('threshold_db', 'k', 'ccdf'), rows, as_json=args.json)
    manifest.add_output(args.out)


def cmd_lidar_coverage(args, config: SimConfig, manifest: RunManifest):
    panel = config.scene.panel
    if args.widths is None and args.heights is None and args.width is None and args.height is None:
        sizes = [(w, panel.height) for w in MIRROR_WIDTHS]
    else:
        widths = args.widths or [args.width if args.width is not None else panel.width]
        heights = args.heights or [args.height if args.height is not None else panel.height]
        sizes = [(w, h) for w in widths for h in heights]

    results = coverage_by_size(config.scene, config.lidar, config.grid, sizes, threads=args.threads)
    rows = [[w, h, detection.coverage] for w, h, detection in results]
    write_table(args.out, ('width_m', 'height_m', 'coverage'), rows, as_json=args.json)
    manifest.add_output(args.out)

    if args.cells_out:
        detection = results[0][2]
        write_table(args.cells_out, ('x_m', 'y_m', 'detectable'),
                    cell_rows(detection.spec, detection.detectable), as_json=args.json)
        manifest.add_output(args.cells_out)


def _load_samples(path: str) -> List[float]:
    try:
        with open(path, 'r') as f:
            lines = [line.strip() for line in f.read().splitlines()]
    except OSError as e:
        raise GridError(f"cannot read sample file: {e}", path=path) from e
    if not lines or lines[0] != 'rss_db':
        raise GridError("expected header 'rss_db'", path=path, line=1)
    samples = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        try:
            samples.append(float(line))
        except ValueError as e:
            raise GridError(f"unparsable sample ({e})", path=path, line=line_no) from e
        if not math.isfinite(samples[-1]):
            raise NonFiniteRssError(f"non-finite sample '{line}'", path=path, line=line_no)
    return samples


def cmd_ccdf(args, config: SimConfig, manifest: RunManifest):
    if bool(args.grid) == bool(args.samples):
        raise UsageError("ccdf needs exactly one of --grid or --samples")
    samples = load_grid(args.grid).values() if args.grid else _load_samples(args.samples)
    curve = ccdf(samples)
    write_table(args.out, ('threshold_db', 'ccdf'), zip(curve.thresholds, curve.prob), as_json=args.json)
    manifest.add_output(args.out)


def cmd_materials(args, config: SimConfig, manifest: RunManifest):
    grids = {}
    for kind in MaterialKind:
        scene = config.scene.with_panel(config.scene.panel.with_material(kind))
        grids[kind] = synthesize_rss_grid(scene, config.grid, config.synth)
    pooled = [v for grid in grids.values() for v in grid.values()]
    thresholds = default_thresholds(pooled)
    curves = {kind: ccdf(grid.values(), thresholds) for kind, grid in grids.items()}

    ordered = list(MaterialKind)
    for better, worse in zip(ordered, ordered[1:]):
        logger.info(f"{better.value} dominates {worse.value}: {dominates(curves[better], curves[worse])}")

    rows = []
    for kind, curve in curves.items():
        rows.extend([kind.value, th, p] for th, p in zip(curve.thresholds, curve.prob))
    write_table(args.out, ('material', 'threshold_db', 'ccdf'), rows, as_json=args.json)
    manifest.add_output(args.out)


COMMANDS: Dict[str, Callable] = {
    'synth-grid': cmd_synth_grid,
    'import-grid': cmd_import_grid,
    'backoff-map': cmd_backoff_map,
    'outage': cmd_outage,
    'schedule': cmd_schedule,
    'lidar-coverage': cmd_lidar_coverage,
    'ccdf': cmd_ccdf,
    'materials': cmd_materials,
}


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument('--config', help='experiment config file (key=value)')
    shared.add_argument('--seed', type=_u64, help='64-bit seed; overrides the config seed')
    shared.add_argument('--out', required=True, help='output data file')
    shared.add_argument('--json', action='store_true', help='write JSON instead of CSV')
    shared.add_argument('--threads', type=int, default=1, help='worker threads (results do not depend on it)')

    parser = _Parser(prog='reflector_sim', description='Passive-reflector mm-wave coverage simulator')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)

    p = sub.add_parser('synth-grid', parents=[shared], help='synthesize an RSS grid')
    p.add_argument('--material', help='override the panel material')

    p = sub.add_parser('import-grid', parents=[shared], help='validate and normalize a grid CSV')
    p.add_argument('--grid', required=True)
    p.add_argument('--cell-size', type=float, help='grid pitch in meters (inferred when omitted)')
    p.add_argument('--origin', type=_float_list, help='x,y of cell (0, 0) (smallest coordinates when omitted)')
    p.add_argument('--shape', type=_int_list, help='rows,cols of the grid (extent of the file when omitted)')

    p = sub.add_parser('backoff-map', parents=[shared], help='per-cell back-off map')
    p.add_argument('--grid', required=True)
    p.add_argument('--kappa', type=float, help='back-off constant (config value when omitted)')

    p = sub.add_parser('outage', parents=[shared], help='Monte Carlo outage versus displacement')
    p.add_argument('--grid', required=True)
    p.add_argument('--kappa', type=_float_list, default=list(DEFAULT_KAPPAS))
    p.add_argument('--displacements', type=_float_list, default=_float_list(DEFAULT_DISPLACEMENTS))
    p.add_argument('--trials', type=int, default=DEFAULT_TRIALS)
    p.add_argument('--literal', action='store_true', help='use the printed inequality orientation')

    p = sub.add_parser('schedule', parents=[shared], help='multi-user selection CCDF')
    p.add_argument('--grid', required=True)
    p.add_argument('--k', type=_int_list, default=list(DEFAULT_USER_COUNTS))
    p.add_argument('--instances', type=int, default=DEFAULT_INSTANCES)
    p.add_argument('--quantile', type=float, help='high-RSS region fraction (config value when omitted)')

    p = sub.add_parser('lidar-coverage', parents=[shared], help='LiDAR coverage versus mirror size')
    p.add_argument('--width', type=float)
    p.add_argument('--height', type=float)
    p.add_argument('--widths', type=_float_list)
    p.add_argument('--heights', type=_float_list)
    p.add_argument('--cells-out', help='per-cell detection grid for the first size')

    p = sub.add_parser('ccdf', parents=[shared], help='CCDF of a grid or raw samples')
    p.add_argument('--grid')
    p.add_argument('--samples', help="CSV with a single 'rss_db' column")

    sub.add_parser('materials', parents=[shared], help='CCDF per reflector material')
    return parser


def _exit_code(error: Exception) -> int:
    if isinstance(error, UsageError):
        return EXIT_USAGE
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, GridError):
        return EXIT_GRID
    if isinstance(error, ArtifactWriteError):
        return EXIT_OUTPUT
    if isinstance(error, (ParameterError, GeometryError, CoverageError, SpecMismatchError,
                          CellIndexError, StatsError)):
        return EXIT_PARAMETER
    return EXIT_INTERNAL


def run(argv: Optional[List[str]] = None) -> int:
    """Parse `argv`, run one subcommand and return the exit status"""
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith('-') and argv[0] not in COMMANDS:
        print(f"error: unknown subcommand '{argv[0]}' (expected one of {', '.join(COMMANDS)})", file=sys.stderr)
        return EXIT_UNKNOWN_COMMAND

    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"missing subcommand (expected one of {', '.join(COMMANDS)})")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")

        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)

        manifest = RunManifest.start(args.command, args.config, config.synth.seed, get_env('timezone', 'UTC'))
        logger.info(f"Running {args.command} (seed {config.synth.seed}, threads {args.threads})")
        COMMANDS[args.command](args, config, manifest)
        manifest.write(args.out)
        logger.info(f"{args.command} finished: {', '.join(manifest.output_paths)}")
        return EXIT_OK

    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except Exception as e:
        code = _exit_code(e)
        if code == EXIT_INTERNAL:
            logger.exception(f"Unexpected error: {e}")
        else:
            logger.error(f"{type(e).__name__}: {e}")
        message = str(e).replace('\n', ' ')
        print(f"error: {message}", file=sys.stderr)
        return code
