from datetime import datetime

import numpy as np
import pytz


def db_to_linear(value_db):
    """Convert dB (or dBm) to linear power"""
    return np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    """Convert linear power to dB"""
    return 10.0 * np.log10(np.asarray(value, dtype=float))


def parse_float_list(text: str) -> list:
    """Parse a comma separated list of floats, e.g. '0,0.5,1'"""
    return [float(item) for item in text.split(',') if item.strip()]


def parse_int_list(text: str) -> list:
    """Parse a comma separated list of ints, e.g. '1,2,4'"""
    return [int(item) for item in text.split(',') if item.strip()]


def get_run_timestamp(timezone: str = 'UTC') -> str:
    """Get an ISO timestamp in the configured timezone for run manifests"""
    return datetime.now(pytz.timezone(timezone)).isoformat()
