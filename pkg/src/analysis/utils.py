"""Вспомогательные функции, общие для модулей конвейера."""

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

from .conf import spectra_settings

T = TypeVar('T')
R = TypeVar('R')

_worker_state = threading.local()


def readonly_array(values, dtype) -> np.ndarray:
    """Копирует значения в новый массив и запрещает его изменение."""
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """
    Применяет func к элементам в пуле потоков.

    Результаты возвращаются в порядке элементов, поэтому итог не зависит
    от того, в каком порядке завершились задачи. Вызов изнутри задачи пула
    выполняется последовательно в том же потоке: вложенные вызовы (лаги ->
    бумаги) не умножают число потоков сверх THREADS.
    """
    items = list(items)
    workers = threads or spectra_settings.THREADS
    if workers <= 1 or len(items) <= 1 or getattr(_worker_state, 'inside', False):
        return [func(item) for item in items]

    def run(item):
        _worker_state.inside = True
        try:
            return func(item)
        finally:
            _worker_state.inside = False

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(run, items))


def epoch_day(value) -> int:
    """Номер дня от 1970-01-01 для datetime.date."""
    return int(np.datetime64(value, 'D').astype(np.int64))
