#!/usr/bin/env python3
"""
Cairn-Check Logging
Structlog on top of stdlib logging. Console output is colored through rich;
a log file switches the renderer to JSON lines. Everything goes to stderr so
stdout stays reserved for the machine-readable payload.
"""

import logging
import sys
from typing import Optional, Union

import rich.console
import structlog


def setup_logging(log_file: Optional[str] = None,
                  level: Union[int, str] = logging.INFO,
                  name: str = "cairn-check"):
    """Configure structlog for the application"""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())

    console = rich.console.Console(stderr=True)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    logging.basicConfig(
        format="%(message)s",
        level=level,
        stream=sys.stderr,
    )
    root.setLevel(level)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        root.addHandler(file_handler)

    processors = [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
    ]

    if log_file:
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=console.is_terminal)

    structlog.configure(
        processors=processors + [renderer],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    return structlog.get_logger(name)
