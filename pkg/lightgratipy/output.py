#!/usr/bin/env python

"""Output module for LightGratiPy patterns, tables and summaries."""

import datetime
import json
import os
import tempfile

import numpy as np
import pandas as pd

import lightgratipy.starter as starter
from lightgratipy.errors import PatternDataError


PATTERN_COLUMNS = ["position_um", "intensity"]

SIGNIFICANT_DIGITS = 16


def prepare_global_attrs():
    """
    Prepare the global attributes.

    Returns
    -------
    attrs : dict
        The global attributes.

    Notes
    -----
    The global attributes are:
    - title : str
        Short description of the data.
    - creation_time : str
        The creation time of the data.
    - lightgratipy_version : str
        The LightGratiPy version.
    - lightgratipy_githash : str
        The LightGratiPy git hash.
    - license : str
        The license of the data.
    - _local_software_path : str
        The local software path.
    """
    attrs = {}
    attrs["title"] = "Matter-wave diffraction at a standing light wave"
    attrs["creation_time"] = str(datetime.datetime.now())
    attrs["lightgratipy_version"] = starter.__version__
    attrs["lightgratipy_githash"] = starter.__git_hash__
    attrs["license"] = "CC-BY SA 3.0"
    attrs["_local_software_path"] = starter.__package_path__
    return attrs


def format_fixed(values, digits=SIGNIFICANT_DIGITS):
    """Fixed decimal notation keeping ``digits`` significant digits."""

    return [
        np.format_float_positional(v, precision=digits, unique=False, fractional=False, trim="-")
        for v in np.asarray(values, dtype=float)
    ]


def _atomic_write(filename, text):
    directory = os.path.dirname(os.path.abspath(filename))
    os.makedirs(directory, exist_ok=True)

    fd, tmpname = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(filename))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmpname, filename)
    except BaseException:
        if os.path.exists(tmpname):
            os.remove(tmpname)
        raise


def write_table_csv(table, filename, float_columns=None):
    """
    Write a table as CSV with LF endings, atomically.

    Float columns are written in fixed decimal notation.
    """

    table = table.copy()
    if float_columns is None:
        float_columns = [c for c in table.columns if pd.api.types.is_float_dtype(table[c])]
    for column in float_columns:
        table[column] = format_fixed(table[column])

    _atomic_write(filename, table.to_csv(index=False, lineterminator="\n"))
    print(f"... [lightgrat] {filename} written")


def write_pattern_csv(positions, intensity, filename):
    """Pattern CSV with header ``position_um,intensity``."""

    table = pd.DataFrame({"position_um": np.asarray(positions) * 1e6, "intensity": intensity})
    write_table_csv(table, filename, float_columns=PATTERN_COLUMNS)


def read_pattern_csv(filename):
    """
    Read a pattern CSV.

    Returns
    -------
    positions : numpy.ndarray
        Positions in m.
    intensity : numpy.ndarray

    Raises
    ------
    PatternDataError
        If the file is missing, has the wrong header, non-numeric or
        non-finite values, or non-equidistant positions.
    """

    try:
        table = pd.read_csv(filename)
    except (OSError, ValueError) as e:
        raise PatternDataError(f"{filename}: {e}") from None

    if list(table.columns) != PATTERN_COLUMNS:
        raise PatternDataError(
            f"{filename}: expected header {','.join(PATTERN_COLUMNS)}, "
            f"got {','.join(map(str, table.columns))}"
        )
    if len(table) < 2:
        raise PatternDataError(f"{filename}: pattern needs at least two rows")

    try:
        values = table.to_numpy(dtype=float)
    except ValueError:
        raise PatternDataError(f"{filename}: non-numeric values") from None

    if not np.all(np.isfinite(values)):
        raise PatternDataError(f"{filename}: non-finite values")

    positions = values[:, 0] * 1e-6
    steps = np.diff(positions)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0):
        raise PatternDataError(f"{filename}: positions are not equidistant")

    return positions, values[:, 1]


def write_json(data, filename):
    """Summary JSON, sorted keys, written atomically."""

    _atomic_write(filename, json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(f"... [lightgrat] {filename} written")
