#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import functools
import logging
import sys
from typing import Optional

import click

from . import exceptions
from .config import load_config, parse_config
from .harness import run
from .utils import (
    create_needed_folders,
    fmt_table,
    handle_general_exception,
    init_log,
    init_rotating_log,
)

logger = logging.getLogger(__name__)


@click.group()
@click.option("--log", help="Rotating log path.", metavar="PATH")
@click.option("--log-level", help="Logging level.", metavar="INFO")
def cli(log: Optional[str] = None, log_level: Optional[str] = None):
    "Simulation and diagnostics toolkit for the stochastic Zakharov system."
    init_log(level=log_level or "INFO")

    if log is not None:
        init_rotating_log(log, level=log_level or "INFO")

    create_needed_folders()


def _run_options(func):
    @click.option("--config", "config_path", help="TOML or YAML file.", metavar="PATH")
    @click.option("--out", help="Output directory.", metavar="DIR")
    @click.option("--seed", type=int, help="Base seed.")
    @click.option("--paths", type=int, help="Number of Monte-Carlo paths.")
    @click.option("--threads", type=int, help="Worker processes.")
    @functools.wraps(func)
    def wrapper(**kwargs):
        return func(**kwargs)

    return wrapper


def _execute(kind: str, config_path: Optional[str] = None, **overrides):
    try:
        config = load_config(config_path) if config_path else parse_config({})
        config = config.updated(kind=kind, **overrides)
        result = run(config)
    except exceptions.ZlabException as error:
        logger.error("%s: %s", type(error).__name__, error)
        sys.exit(error.exit_code)
    except Exception as error:
        handle_general_exception(error)
        raise

    click.echo(fmt_table(result.aggregates or result.records))
    click.echo(f"Saved: {config.out}")


def _command(kind: str, doc: str):
    @click.command(name=kind, help=doc)
    @_run_options
    def command(**kwargs):
        _execute(kind, **kwargs)

    return command


for _kind, _doc in (
    ("simulate", "Integrate one trajectory and write its diagnostics."),
    ("montecarlo", "Mass statistics over many noise paths."),
    ("scatterprob", "Scattering probability against the noise strength."),
    ("equivalence", "Direct against rescaled integration under dt halving."),
    ("groundstate", "Ground-state constants and variational checks."),
    ("norms", "Adapted norms of a block and the estimate-constant sweep."),
    ("variation", "p-variation and Besov experiments on sampled paths."),
):
    cli.add_command(_command(_kind, _doc))
