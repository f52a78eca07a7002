"""
Shared runtime state: library logger, torch device and thread cap
"""

import logging
import os
from typing import Any, Dict, Optional

import psutil
import torch

from molforge.errors import ConfigError

THREADS_ENV = "MOLFORGE_THREADS"


def logger_with_settings(level: int = logging.INFO) -> logging.Logger:
    """Set up default logging"""
    logger = logging.getLogger("molforge")
    formatter = logging.Formatter(
        "%(asctime)s, %(name)s, %(levelname)s: %(message)s",
        datefmt="%d-%b-%y %H:%M:%S",
    )
    if not logger.handlers:
        hdlr = logging.StreamHandler()
        hdlr.setFormatter(formatter)
        logger.addHandler(hdlr)
    logger.setLevel(level)
    return logger


def get_thread_cap() -> int:
    """
    Number of threads torch may use.

    ``MOLFORGE_THREADS`` wins when set, otherwise the physical core count.
    """
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return psutil.cpu_count(logical=False) or os.cpu_count() or 1
    try:
        threads = int(value)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {value!r}") from exc
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
    return threads


# pylint: disable=too-few-public-methods
class Borg:
    """
    This class allows to share objects between instances.
    """

    _shared_state: Dict[str, Any] = {}

    def __init__(self):
        self.__dict__ = self._shared_state


# pylint: disable=too-few-public-methods
class State(Borg):
    """
    All modules look for the torch device and thread settings via this class.

    The first instantiation configures logging and applies the thread cap,
    later instantiations see the same state.
    """

    def __init__(
        self,
        device: Optional[torch.device] = None,
        threads: Optional[int] = None,
    ):
        Borg.__init__(self)
        if not hasattr(self, "logger_set"):
            self.logger = logger_with_settings()
            self.logger_set = True

        if device is None:
            if not hasattr(self, "device"):
                self.device = torch.device("cpu")
        else:
            self.device = device

        if threads is not None or not hasattr(self, "threads"):
            self.threads = threads if threads is not None else get_thread_cap()
            torch.set_num_threads(self.threads)
