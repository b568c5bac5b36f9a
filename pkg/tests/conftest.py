"""
Конфигурация pytest и фикстуры для тестов.

Этот файл содержит общие фикстуры, которые используются во всех тестах:
небольшие календари, ценовые ряды на сетке и каталог для артефактов.
"""

from datetime import date

import numpy as np
import pytest

from analysis.ingest import SessionCalendar, TickSeries, resample
from analysis.returns import ReturnSeries, normalize_values
from analysis.utils import epoch_day

from .factories import SessionCalendarFactory


@pytest.fixture(autouse=True)
def single_thread(settings):
    """
    Фикстура, которая отключает пул потоков.

    Результаты не зависят от числа потоков, но в одном потоке проще читать
    трассировки упавших тестов.

    Args:
        settings: Фикстура pytest-django для изменения настроек
    """
    settings.SPECTRA_LAB = {**getattr(settings, 'SPECTRA_LAB', {}), 'THREADS': 1}


@pytest.fixture
def short_calendar():
    """
    Фикстура для календаря из одной четырехминутной сессии 1970-01-01.

    Returns:
        SessionCalendar: Сетка 0, 60, 120, 180, 240 секунд
    """
    return SessionCalendar((date(1970, 1, 1),), (0,), (4,))


@pytest.fixture
def week_calendar():
    """
    Фикстура для календаря из пяти рабочих дней по 60 минут.

    Returns:
        SessionCalendar: Сессии 10:00-11:00 с 2024-01-01 по 2024-01-05
    """
    return SessionCalendarFactory()


@pytest.fixture
def price_series():
    """
    Фикстура-фабрика ценовых рядов на сетке календаря.

    Returns:
        Callable: price_series(calendar, prices, stock_id='AAA') -> PriceSeries,
        где prices задают цену в каждой точке сетки
    """

    def build(calendar, prices, stock_id='AAA'):
        timestamps = calendar.grid.timestamps
        return resample(TickSeries(stock_id, timestamps, np.broadcast_to(prices, timestamps.shape)), calendar)

    return build


@pytest.fixture
def daily_series():
    """
    Фикстура-фабрика нормированных рядов с одной доходностью в день.

    Returns:
        Callable: daily_series(stock_id, first_day, values) -> ReturnSeries,
        доходность i приходится на 10:00 дня first_day + i
    """

    def build(stock_id, first_day, values, tau=1):
        days = epoch_day(first_day) + np.arange(len(values))
        timestamps = days * 86_400 + 36_000
        return ReturnSeries(stock_id, tau, normalize_values(values, stock_id), timestamps, normalized=True)

    return build


@pytest.fixture
def out_dir(tmp_path):
    """
    Фикстура для каталога результатов команды.

    Returns:
        Path: Пустой каталог внутри tmp_path
    """
    path = tmp_path / 'out'
    path.mkdir()
    return path
