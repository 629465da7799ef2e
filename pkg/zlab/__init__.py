#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from .constants import VERSION

__version__ = VERSION
