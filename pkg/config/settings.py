"""
Runtime settings for the lab: directories and logging.

Values come from `config.config.settings` (environment / .env); call
`configure_logging()` once from the entry point.
"""

import logging.config
from pathlib import Path

from .config import settings as cfg

BASE_DIR = Path(__file__).resolve().parent.parent

LOG_LEVEL = cfg.LOG_LEVEL
LOGS_DIR = Path(cfg.LOG_DIR)
OUTPUT_DIR = Path(cfg.OUTPUT_DIR)
THREADS = cfg.THREADS
SEED = cfg.SEED

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'level': LOG_LEVEL,
            'class': 'logging.FileHandler',
            'filename': str(LOGS_DIR / 'mimolab.log'),
            'formatter': 'verbose',
            'delay': True,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
    'loggers': {
        'core': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'api': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'config': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'utils': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


def configure_logging(level: str | None = None) -> None:
    LOGS_DIR.mkdir(parents=True, exist_ok=True)
    config = LOGGING
    if level:
        config = {**LOGGING, 'loggers': {name: {**spec, 'level': level.upper()} for name, spec in LOGGING['loggers'].items()}}
    logging.config.dictConfig(config)
