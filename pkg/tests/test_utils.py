#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import logging

from zlab.utils import init_log


def test_init_log_only_configures_the_root_logger(monkeypatch):
    root = logging.getLogger()
    monkeypatch.setattr(root, "handlers", [])
    monkeypatch.setattr(root, "level", root.level)
    known = set(logging.root.manager.loggerDict)

    init_log("info")

    assert root.level == logging.INFO
    assert len(root.handlers) == 1
    assert set(logging.root.manager.loggerDict) == known
