#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import csv
import json
import logging
import logging.handlers as handlers
import os
import traceback
from typing import Iterable, List, Optional, Sequence

import numpy as np
from tabulate import tabulate

from .constants import BUGS_DIR, DIRS

_LOG_FMT = "%(asctime)s - %(module)s.%(levelname)s: %(message)s"

logger = logging.getLogger(__name__)


def fmt_exception(error: Exception) -> str:
    """Format an exception with its full traceback.

    :param error:
    :type error: Exception
    """
    trace = traceback.format_exception(type(error), error, error.__traceback__)
    return "".join(trace)


def handle_general_exception(error):
    if "error_logger" not in logging.root.manager.loggerDict:
        os.makedirs(BUGS_DIR, exist_ok=True)
        path = os.path.join(BUGS_DIR, "error.txt")
        init_rotating_log(path, "error_logger", "ERROR")

    logging.getLogger("error_logger").error(fmt_exception(error))
    logger.warning("New exception added to the bug logger: %s", type(error).__name__)


def namer(name):
    if ".log" in name or name.endswith(".txt"):
        return name

    return f"{name.replace('.txt', '')}.txt"


def create_needed_folders():
    "Create all the needed folders for zlab's data."
    for dir_ in DIRS:
        if os.path.isdir(dir_):
            continue

        os.makedirs(dir_, exist_ok=True)
        logger.info("Directory created: %s", dir_)


def init_log(level: str = "DEBUG"):
    """
    :param level: log level name
    """
    logger_ = logging.getLogger()
    logger_.setLevel(logging.getLevelName(level.upper()))

    formatter = logging.Formatter(fmt=_LOG_FMT, datefmt="%H:%M:%S")

    printable = logging.StreamHandler()

    printable.setFormatter(formatter)

    logger_.addHandler(printable)


def init_rotating_log(
    path: str, name: Optional[str] = None, level: str = "DEBUG", when: str = "midnight"
):
    """
    :param level: log level name
    :param path: optional rotable path to append logs
    :param when: when param for TimedRotatingFileHandler
    """
    logger_ = logging.getLogger(name)
    logger_.setLevel(logging.getLevelName(level.upper()))

    formatter = logging.Formatter(fmt=_LOG_FMT, datefmt="%H:%M:%S")

    rotable = handlers.TimedRotatingFileHandler(path, when=when)
    rotable.namer = namer
    rotable.setFormatter(formatter)
    logger_.addHandler(rotable)


def to_builtin(value):
    "Convert numpy scalars and arrays (recursively) to JSON friendly objects."
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}

    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]

    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())

    if isinstance(value, np.generic):
        return value.item()

    if isinstance(value, float) and not np.isfinite(value):
        return str(value)

    return value


def dump_json(data: dict, path: str):
    with open(path, "w") as f:
        json.dump(to_builtin(data), f, indent=2, sort_keys=True)

    logger.debug("Saved: %s", path)


def write_csv(rows: List[dict], path: str, fieldnames: Optional[Sequence[str]] = None):
    """Write a list of flat dictionaries as a CSV file.

    :param rows:
    :type rows: List[dict]
    :param path:
    :type path: str
    :param fieldnames: column order (first row keys by default)
    """
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []

    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(to_builtin(row))

    logger.debug("Saved %d rows: %s", len(rows), path)


def read_csv(path: str) -> List[dict]:
    with open(path, newline="") as f:
        return [
            {key: _maybe_float(val) for key, val in row.items()}
            for row in csv.DictReader(f)
        ]


def fmt_table(rows: Iterable[dict], floatfmt: str = ".6g") -> str:
    "Render rows of dictionaries as a plain text table."
    rows = list(rows)
    if not rows:
        return ""

    return tabulate(rows, headers="keys", floatfmt=floatfmt)


def _maybe_float(value: str):
    try:
        return float(value)
    except (TypeError, ValueError):
        return value
