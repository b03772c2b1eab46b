""" Root logger setup shared by the CLI and the test runs.

Console output is terse; the rotating file under GKIT_LOG_DIR keeps source
locations for solver diagnostics.
"""
import logging
from logging.handlers import RotatingFileHandler
import os
from pathlib import Path

from gkit.errors import ConfigurationError

DEFAULT_LEVEL = os.getenv('GKIT_LOG_LEVEL', 'INFO').upper()
LOG_DIR = Path(os.getenv('GKIT_LOG_DIR', 'logs'))
LOG_FILE = 'gkit.log'

CONSOLE_FORMAT = '[%(levelname)s] %(name)s: %(message)s'
FILE_FORMAT = '%(asctime)s %(levelname)s %(name)s:%(lineno)d - %(message)s'


def configure_logging(level: str | int = DEFAULT_LEVEL) -> None:
    root = logging.getLogger()
    if root.handlers:
        return

    root.setLevel(level)
    # numpy / scipy RuntimeWarnings end up in the same log
    logging.captureWarnings(True)

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    root.addHandler(console)

    try:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
        logfile = RotatingFileHandler(
            LOG_DIR / LOG_FILE, maxBytes=2_000_000, backupCount=3)
    except OSError as e:
        root.warning(f'File logging disabled: {e}')
        return
    logfile.setFormatter(logging.Formatter(FILE_FORMAT))
    root.addHandler(logfile)


def set_level(level: str | int) -> None:
    """ Change the level of the root logger (handlers follow it). """
    if isinstance(level, str):
        level = level.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigurationError(f'Unknown log level {level!r}')
    logging.getLogger().setLevel(level)
