"""Structured logging configuration using structlog."""

import logging
import sys
from typing import Any, Dict

import structlog
from structlog.stdlib import LoggerFactory

from .config import settings

# Leading keys of every text-format line: level ts module message.
_KEY_ORDER = ["level", "timestamp", "logger", "event"]


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    def __init__(self) -> None:
        super().__init__(sys.stderr)

    @property
    def stream(self) -> Any:
        return sys.stderr

    @stream.setter
    def stream(self, value: Any) -> None:
        pass


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """
    Configure structured logging on stderr.

    Args:
        level: Log level name, defaults to the configured level
        fmt: ``text`` or ``json``, defaults to the configured format
    """
    level = (level or settings.logging.level).upper()
    fmt = fmt or settings.logging.format

    handler = _StderrHandler()
    handler.setFormatter(logging.Formatter("%(message)s"))
    logging.basicConfig(handlers=[handler], level=level, force=True)

    processors = [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]

    if fmt == "json":
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.processors.KeyValueRenderer(key_order=_KEY_ORDER))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=LoggerFactory(),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


def log_run_parameters(command: str, **kwargs: Any) -> Dict[str, Any]:
    """Build the record echoed to ``run.json`` and the log for one command."""
    return {
        "command": command,
        "parameters": kwargs,
    }
