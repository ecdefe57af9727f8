# -*- coding: UTF-8 -*-
# !/usr/bin/env python

import sys

from tailfit.cli import main


if __name__ == "__main__":

    sys.exit(main())
