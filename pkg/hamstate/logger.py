# -*- coding: utf-8 -*-

"""
Logging setup for the command line interface.

Library modules only create ``logging.getLogger(__name__)`` loggers; handlers
are installed here, once, by the CLI entry point.
"""

import logging

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER_NAME = "hamstate"


def setup_logging(verbose: bool = False) -> logging.Logger:
    """
    Attach a rich console handler to the ``hamstate`` logger.

    Calling it twice does not duplicate the handler.

    :param verbose: log at DEBUG level instead of INFO
    """
    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=Console(stderr=True),
            show_path=verbose,
            rich_tracebacks=True,
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        logger.addHandler(handler)
    return logger
