import sys

from modules.cli import run
from modules.config import load_env_config
from modules.constants import logger


if __name__ == '__main__':
    # Load environment configuration at startup
    logger.info("Loading environment configuration from .env")
    load_env_config()

    sys.exit(run())
