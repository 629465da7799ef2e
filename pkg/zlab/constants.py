#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import math
import os

from appdirs import user_data_dir
from dotenv import load_dotenv

VERSION = "0.3.0"

TEST = os.environ.get("ZLAB_TEST", "").lower().strip() == "true"

APP_DIR = os.environ.get("ZLAB_APP_DIR") or user_data_dir("zlab")

load_dotenv(os.path.join(APP_DIR, ".env"))

LOGS_DIR = os.path.join(APP_DIR, "logs")
BUGS_DIR = os.path.join(APP_DIR, "bugs")

DIRS = (LOGS_DIR, BUGS_DIR)

THREADS = os.environ.get("ZLAB_THREADS")

MEMORY_BUDGET = int(os.environ.get("ZLAB_MEMORY_BUDGET", 2 * 1024**3))

# Philox4x64, key = (seed, path index | level | process | mode), counter = step
RNG_KEY_SCHEMA = "philox-v1"

DEFAULT_L = 2 * math.pi * 8
DEFAULT_K = 4
FULL_SCALE_K = 2**8

DEFAULT_M_BLOW_FACTOR = 1e3
DEFAULT_D_BLOW = 1e3

TABLE_SAMPLES = 2**18
TAPER_FRACTION = 0.125
