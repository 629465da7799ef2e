#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from dogpile.cache import make_region

# Pure, read-only results (quadrature constants, tabulated profiles). Every
# worker process fills its own copy.
region = make_region().configure("dogpile.cache.memory")
