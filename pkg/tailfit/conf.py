# -*- coding: UTF-8 -*-
# !/usr/bin/env python

import os
from pathlib import Path

__title__ = "tailfit"
__description__ = "Heavy-tailed model fitting and maximal-entropy synthesis for file-size corpora"

ROOT = str(Path(os.path.realpath(os.path.dirname(__file__))).parent)
PACKAGE_DIR = os.path.realpath(os.path.dirname(__file__))
DATA_DIR = os.path.join(PACKAGE_DIR, "data")
SETTINGS_FILE = os.path.join(ROOT, "data", "settings.ini")
EXTENSIONS_FILE = os.path.join(DATA_DIR, "extensions.json")
THREADS_ENV = "TAILFIT_THREADS"
