import logging
import math
import os

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np


logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

THREADS_ENV = 'REVSPHERE_THREADS'
LOG_LEVEL_ENV = 'REVSPHERE_LOG_LEVEL'


def config_logging(level: str | None = None) -> None:
    """Configure basic logging on stderr."""
    log_level = (level or os.getenv(LOG_LEVEL_ENV) or 'WARNING').upper()
    logging.basicConfig(
        level=getattr(logging, log_level, logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )


def thread_count() -> int:
    """Worker cap taken from REVSPHERE_THREADS (default 1)."""
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f'Ignoring non-integer {THREADS_ENV}={raw!r}')
        return 1
    return max(1, value)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map fn over items, preserving input order."""
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def open_grid(lo: float, hi: float, size: int) -> np.ndarray:
    """Uniform grid on (lo, hi) with endpoints excluded by half a step."""
    step = (hi - lo) / size
    return lo + step * (np.arange(size) + 0.5)


def closed_grid(lo: float, hi: float, size: int) -> np.ndarray:
    return np.linspace(lo, hi, size)


def wrap_angle(theta):
    """Map angles into [0, 2*pi)."""
    return np.mod(theta, 2.0 * math.pi)


def centered_angle(theta):
    """Map angles into [-pi, pi)."""
    return np.mod(np.asarray(theta) + math.pi, 2.0 * math.pi) - math.pi


def match_shape(values, like):
    """Return a Python float when like is a scalar, else the array."""
    if np.ndim(like) == 0:
        return float(values)
    return np.asarray(values, dtype=float)
