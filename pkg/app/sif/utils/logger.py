# sif/utils/logger.py

import logging
from logging.handlers import RotatingFileHandler
import os

from dotenv import load_dotenv

load_dotenv()

LOG_FILE = "sif.log"

# filled from the `logging` section of the settings file; environment variables win
_defaults = {"level": "INFO", "log_dir": "logs"}


def _console_level() -> str:
    return (os.getenv("SIF_LOG_LEVEL") or _defaults["level"]).upper()


def _log_dir() -> str:
    log_dir = os.getenv("SIF_LOG_DIR")
    return _defaults["log_dir"] if log_dir is None else log_dir


def _file_handler(log_dir: str, formatter: logging.Formatter) -> RotatingFileHandler:
    os.makedirs(log_dir, exist_ok=True)
    handler = RotatingFileHandler(
        os.path.join(log_dir, LOG_FILE), maxBytes=5 * 1024 * 1024, backupCount=2
    )
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(formatter)
    return handler


def get_logger(name: str) -> logging.Logger:
    """
    Creates and returns a logger with both console and file handlers.

    The console handler (`StreamHandler`) logs at the level named by the
    `SIF_LOG_LEVEL` environment variable, falling back to `logging.level` of
    the settings file (default `INFO`). The file handler (`RotatingFileHandler`)
    logs everything from `DEBUG` up into `<log dir>/sif.log`, rotating at 5MB
    and keeping two backups.

    Args:
        name (str): The name of the logger, typically the module name.

    Returns:
        logging.Logger: A configured logger instance.

    Notes:
        - Handlers are attached only once per logger name.
        - The log dir is `SIF_LOG_DIR`, else `logging.log_dir` of the settings
          file, else "logs"; an empty value disables file logging.
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    c_handler = logging.StreamHandler()
    c_handler.setLevel(_console_level())
    c_handler.setFormatter(formatter)
    logger.addHandler(c_handler)

    log_dir = _log_dir()
    if log_dir:
        logger.addHandler(_file_handler(log_dir, formatter))

    return logger


def _sif_loggers():
    for name, logger in list(logging.Logger.manager.loggerDict.items()):
        if name.startswith("sif") and isinstance(logger, logging.Logger):
            yield logger


def set_console_level(level: str) -> None:
    """Adjust the console threshold of every `sif` logger created so far."""
    for logger in _sif_loggers():
        for handler in logger.handlers:
            if type(handler) is logging.StreamHandler:
                handler.setLevel(level.upper())


def configure_logging(level: str, log_dir: str) -> None:
    """
    Adopt the `logging` section of the settings file.

    Loggers created earlier are updated too: their console level follows the
    new default and their log file moves to the new directory, unless
    `SIF_LOG_LEVEL` or `SIF_LOG_DIR` pin them.
    """
    _defaults.update(level=level, log_dir=log_dir)
    set_console_level(_console_level())
    target = _log_dir()
    for logger in _sif_loggers():
        for handler in list(logger.handlers):
            if not isinstance(handler, RotatingFileHandler):
                continue
            if target and os.path.dirname(handler.baseFilename) == os.path.abspath(target):
                continue
            logger.removeHandler(handler)
            handler.close()
            if target:
                logger.addHandler(_file_handler(target, handler.formatter))
