"""
Table artifacts for the plotting pipeline: CSV by default, JSON (a list of
row objects with the same fields) on request.  Floats are printed with a
fixed 4-decimal precision so equal runs give byte-identical files.
"""
import csv
import json
from typing import Iterable, List, Sequence

import numpy as np

from .constants import CSV_PRECISION, logger
from .errors import ArtifactWriteError
from .grid import GridSpec


def _cell_text(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{round(float(value), CSV_PRECISION) + 0.0:.{CSV_PRECISION}f}"
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round(float(value), CSV_PRECISION) + 0.0
    return value


def write_table(path: str, columns: Sequence[str], rows: Iterable[Sequence], as_json: bool = False) -> None:
    """Write rows under `columns` to `path` as CSV or JSON"""
    rows = [list(r) for r in rows]
    try:
        with open(path, 'w', newline='') as f:
            if as_json:
                records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
                json.dump(records, f, indent=2)
                f.write('\n')
            else:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(columns)
                for row in rows:
                    writer.writerow([_cell_text(v) for v in row])
    except OSError as e:
        logger.error(f"Error writing {path}: {e}")
        raise ArtifactWriteError(path, str(e)) from e
    logger.info(f"Wrote {len(rows)} rows to {path}")


def cell_rows(spec: GridSpec, values: np.ndarray) -> List[list]:
    """`x_m, y_m, value` rows for every valid cell, row-major"""
    rows = []
    for cell in spec.valid_cells():
        center = spec.cell_center(cell)
        rows.append([center.x, center.y, values[cell.row, cell.col]])
    return rows
