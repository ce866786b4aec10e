# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import csv
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import yaml

#: Floats are written with 17 significant digits so that they parse back to the same double.
FLOAT_FORMAT = "%.17g"


def format_value(value: Any) -> Any:
    """
    Text form of a table cell: floats with 17 significant digits, booleans and enums as lowercase words.
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    if isinstance(value, Enum):
        return str(value)
    return value


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Enum):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_csv(path: Union[str, Path], rows: Sequence[Dict[str, Any]]) -> Path:
    """
    Write rows as a CSV table with a header row.

    The columns are those of the first row followed by any new keys of later rows, in order of appearance.

    :param path:
        Destination file; parent directories are created.
    :param rows:
        The rows.
    :returns:
        The path written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_value(value) for key, value in row.items()})
    return path


def write_json(path: Union[str, Path], data: Any) -> Path:
    """
    Write one JSON document; numpy values, enums and paths are converted.

    Python's float representation is the shortest one that round-trips, so no precision is lost.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
        handle.write("\n")
    return path


def dump_config(path: Union[str, Path], data: Dict[str, Any]) -> Path:
    """
    Write a resolved configuration as YAML that loads back to the same dictionary.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(data, handle, sort_keys=True, default_flow_style=False)
    return path
