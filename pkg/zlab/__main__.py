#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

from .cli import cli

if __name__ == "__main__":
    cli(prog_name="zlab")
