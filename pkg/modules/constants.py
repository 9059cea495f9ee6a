import logging
import os
from logging.handlers import RotatingFileHandler
from dotenv import load_dotenv

# Load .env to check dev mode for logger setup
load_dotenv()
dev_mode = os.getenv('DEV_MODE', 'false').lower() in ('true', '1', 'yes')

TOOL_VERSION = '1.0.0'

# File paths
LOG_FILE = os.getenv('LOG_FILE', 'reflector_sim.log')
MANIFEST_SUFFIX = '.manifest.json'

# Geometry
PLANE_TOLERANCE = 1e-9      # meters, plane-side classification
LATTICE_TOLERANCE = 1e-3    # meters, CSV coordinates snapping onto the grid

# Grid CSV
GRID_HEADER = ('x_m', 'y_m', 'rss_db')
CSV_PRECISION = 4

# Experiment defaults
DEFAULT_TRIALS = 1000
DEFAULT_INSTANCES = 1000
DEFAULT_KAPPAS = (0.0, 0.5, 1.0, 2.0)
DEFAULT_USER_COUNTS = (1, 2, 4)
DEFAULT_QUANTILE = 0.25
DEFAULT_THRESHOLD_POINTS = 81
MIRROR_WIDTHS = (0.9, 0.6, 0.3)

# CLI exit codes
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_UNKNOWN_COMMAND = 2
EXIT_USAGE = 3
EXIT_CONFIG = 4
EXIT_GRID = 5
EXIT_PARAMETER = 6
EXIT_OUTPUT = 7

# Set up rotating file handler
handler = RotatingFileHandler(LOG_FILE, maxBytes=10*1024*1024, backupCount=5)
handler.setLevel(logging.DEBUG if dev_mode else logging.INFO)
formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
handler.setFormatter(formatter)

logger = logging.getLogger(__name__)
logger.setLevel(logging.DEBUG if dev_mode else logging.INFO)
logger.addHandler(handler)
