# -*- coding: UTF-8 -*-
# !/usr/bin/env python

__version__ = "0.3.0"
