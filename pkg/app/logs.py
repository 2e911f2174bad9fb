"""Loguru setup shared by the CLI and the HTTP service."""

import logging
import sys

from loguru import logger as log

from app.config import Settings, settings


class InterceptHandler(logging.Handler):
    """Intercept python standard lib logging."""

    def emit(self, record):
        """Retrieve context where the logging call occurred.

        This happens to be in the 6th frame upward.
        """
        logger_opt = log.opt(depth=6, exception=record.exc_info)
        logger_opt.log(logging.getLevelName(record.levelno), record.getMessage())


def _stderr(message) -> None:
    # Resolved per message, sys.stderr may be swapped after setup
    sys.stderr.write(message)


def setup_logging(
    config: Settings = settings, level: str | None = None, enqueue: bool = True
):
    """Route every logger into loguru and install the sinks.

    The CLI logs synchronously (``enqueue=False``), the service through a queue.
    """
    level = level or config.LOG_LEVEL
    # Hook all other loggers into ours
    logger_name_list = [name for name in logging.root.manager.loggerDict]
    for logger_name in logger_name_list:
        logging.getLogger(logger_name).setLevel(level)
        logging.getLogger(logger_name).handlers = []
        if "." not in logger_name:
            logging.getLogger(logger_name).addHandler(InterceptHandler())

    log.remove()
    log.add(
        _stderr,
        level=level,
        format=(
            "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} "
            "| {name}:{function}:{line} | {message}"
        ),
        enqueue=enqueue,  # Run async / non-blocking
        colorize=sys.stderr.isatty(),
        backtrace=True,  # More detailed tracebacks
    )

    # Only log to file in production
    if not config.DEBUG and config.LOG_FILE:
        log.add(
            config.LOG_FILE,
            level=level,
            enqueue=True,
            serialize=True,  # JSON format
            rotation="00:00",  # New file at midnight
            retention="10 days",
        )
    return log
