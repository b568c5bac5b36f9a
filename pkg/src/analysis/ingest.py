"""
Чтение тиковых данных и календаря сессий, перевод цен на регулярную сетку.

Метки времени - целые секунды от эпохи во времени биржи (без перевода
часовых поясов). Сетка задается только внутри торговых сессий: закрытие
одной сессии и открытие следующей занимают одну позицию "торговых часов",
поэтому ночной разрыв не считается шагом сетки.
"""

import io
import logging
import math
from dataclasses import dataclass
from datetime import date
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .conf import spectra_settings
from .exceptions import CalendarError, EmptySeriesError, InputError, PriceRejectedError, TickParseError
from .utils import epoch_day, readonly_array

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86_400
TICK_FILE_SUFFIXES = ('.csv', '.txt', '.ticks')


@dataclass(frozen=True, eq=False)
class TickSeries:
    """
    Сделки по одной бумаге: пары (метка времени, цена).

    Метки времени не убывают, все цены положительны.
    """

    stock_id: str
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        timestamps = readonly_array(self.timestamps, np.int64)
        prices = readonly_array(self.prices, np.float64)

        if timestamps.ndim != 1 or timestamps.shape != prices.shape:
            raise InputError(f'{self.stock_id}: метки времени и цены должны быть векторами одной длины')
        if np.any(np.diff(timestamps) < 0):
            raise InputError(f'{self.stock_id}: метки времени сделок должны не убывать')
        if not np.all(prices > 0):
            raise InputError(f'{self.stock_id}: все цены сделок должны быть положительными')

        object.__setattr__(self, 'timestamps', timestamps)
        object.__setattr__(self, 'prices', prices)

    def __len__(self):
        return int(self.timestamps.size)


@dataclass(frozen=True, eq=False)
class CalendarGrid:
    """
    Точки сетки календаря.

    sessions - номер сессии для каждой точки, clock - позиция на "торговых
    часах" (число шагов сетки от открытия первой сессии без учета ночей).
    """

    timestamps: np.ndarray
    sessions: np.ndarray
    clock: np.ndarray


@dataclass(frozen=True, eq=False)
class SessionCalendar:
    """
    Календарь торговых сессий.

    Для каждого торгового дня задаются минуты открытия и закрытия от
    полуночи. Сетка включает обе границы сессии: при шаге 1 минута сессия
    10:00-16:00 дает 361 точку.
    """

    days: tuple[date, ...]
    opens: tuple[int, ...]
    closes: tuple[int, ...]
    step_minutes: int = 1

    def __post_init__(self):
        days = tuple(self.days)
        opens = tuple(int(value) for value in self.opens)
        closes = tuple(int(value) for value in self.closes)
        object.__setattr__(self, 'days', days)
        object.__setattr__(self, 'opens', opens)
        object.__setattr__(self, 'closes', closes)

        if not (len(days) == len(opens) == len(closes)):
            raise CalendarError('Для каждого дня нужны минуты открытия и закрытия')
        if self.step_minutes <= 0:
            raise CalendarError(f'Шаг сетки должен быть положительным, получено {self.step_minutes}')

        for day, open_minute, close_minute in zip(days, opens, closes):
            if not 0 <= open_minute < close_minute <= 24 * 60:
                raise CalendarError(f'{day}: открытие должно быть раньше закрытия ({open_minute} >= {close_minute})')
            if (close_minute - open_minute) % self.step_minutes:
                raise CalendarError(
                    f'{day}: шаг сетки {self.step_minutes} мин не делит длину сессии {close_minute - open_minute} мин'
                )

        for previous, current in zip(days, days[1:]):
            if current <= previous:
                raise CalendarError(f'Даты календаря должны строго возрастать: {previous} -> {current}')

    @classmethod
    def weekdays(cls, start: date, sessions: int, open_minute: int, close_minute: int, step_minutes: int = 1):
        """Календарь из sessions рабочих дней (пн-пт), начиная с start."""
        offsets = np.arange(sessions)
        business_days = np.busday_offset(np.datetime64(start, 'D'), offsets, roll='forward')
        days = tuple(business_days.astype(object))
        return cls(days, (open_minute,) * sessions, (close_minute,) * sessions, step_minutes)

    def __len__(self):
        return len(self.days)

    @cached_property
    def day_numbers(self) -> np.ndarray:
        """Номера торговых дней от эпохи."""
        return readonly_array([epoch_day(day) for day in self.days], np.int64)

    @cached_property
    def session_minutes(self) -> np.ndarray:
        return readonly_array(np.subtract(self.closes, self.opens), np.int64)

    @cached_property
    def open_timestamps(self) -> np.ndarray:
        return readonly_array(self.day_numbers * SECONDS_PER_DAY + np.asarray(self.opens, np.int64) * 60, np.int64)

    @cached_property
    def grid(self) -> CalendarGrid:
        steps = self.session_minutes // self.step_minutes
        counts = steps + 1
        total = int(counts.sum())

        sessions = np.repeat(np.arange(len(self), dtype=np.int64), counts)
        first_point = np.repeat(np.cumsum(counts) - counts, counts)
        offsets = np.arange(total, dtype=np.int64) - first_point

        timestamps = np.repeat(self.open_timestamps, counts) + offsets * self.step_minutes * 60
        clock = np.repeat(np.cumsum(steps) - steps, counts) + offsets

        return CalendarGrid(
            timestamps=readonly_array(timestamps, np.int64),
            sessions=readonly_array(sessions, np.int64),
            clock=readonly_array(clock, np.int64),
        )

    def trading_days_between(self, first: date, last: date) -> int:
        """Число торговых дней строго между first и last."""
        days = self.day_numbers
        return int(np.count_nonzero((days > epoch_day(first)) & (days < epoch_day(last))))

    def snap_start(self, value: date) -> int | None:
        """Первый торговый день не раньше value (номер дня) или None."""
        days = self.day_numbers
        index = np.searchsorted(days, epoch_day(value), side='left')
        return int(days[index]) if index < days.size else None

    def snap_end(self, value: date) -> int | None:
        """Последний торговый день не позже value (номер дня) или None."""
        days = self.day_numbers
        index = np.searchsorted(days, epoch_day(value), side='right') - 1
        return int(days[index]) if index >= 0 else None


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """
    Цены одной бумаги на сетке календаря p(t_i).

    Точки идут подряд по сетке от начала до конца интервала листинга,
    поэтому соседние элементы массивов - соседние точки сетки.
    """

    stock_id: str
    timestamps: np.ndarray
    prices: np.ndarray
    sessions: np.ndarray
    clock: np.ndarray
    step_minutes: int = 1

    def __post_init__(self):
        for name, dtype in (('timestamps', np.int64), ('prices', np.float64),
                            ('sessions', np.int64), ('clock', np.int64)):
            object.__setattr__(self, name, readonly_array(getattr(self, name), dtype))

        size = self.timestamps.size
        if not (self.prices.size == self.sessions.size == self.clock.size == size):
            raise InputError(f'{self.stock_id}: поля ценового ряда разной длины')
        if not np.all(self.prices > 0):
            raise InputError(f'{self.stock_id}: цены на сетке должны быть положительными')

    def __len__(self):
        return int(self.timestamps.size)

    def to_ticks(self) -> TickSeries:
        """Представляет точки сетки как сделки (нужно для проверки идемпотентности)."""
        return TickSeries(self.stock_id, self.timestamps, self.prices)


def parse_ticks(stream: BinaryIO | bytes, stock_id: str) -> TickSeries:
    """
    Разбирает тиковый файл: строки вида `timestamp,price[,volume]`.

    Объем игнорируется, строки с `#` считаются комментариями. Если строки
    идут не по времени, сделки сортируются устойчивой сортировкой.

    Raises:
        TickParseError: строка не разбирается (с номером строки)
        PriceRejectedError: цена не положительна
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)

    timestamps: list[int] = []
    prices: list[float] = []

    for line_number, raw in enumerate(stream, start=1):
        try:
            line = raw.decode('utf-8') if isinstance(raw, (bytes, bytearray)) else raw
        except UnicodeDecodeError:
            raise TickParseError(line_number, repr(raw), 'строка не в кодировке UTF-8') from None

        line = line.lstrip('\ufeff').strip()
        if not line or line.startswith('#'):
            continue

        fields = [value.strip() for value in line.split(',')]
        if len(fields) not in (2, 3):
            raise TickParseError(line_number, line, 'ожидается timestamp,price[,volume]')

        try:
            timestamp = int(fields[0])
        except ValueError:
            raise TickParseError(line_number, line, 'метка времени должна быть целым числом секунд') from None

        try:
            price = float(fields[1])
        except ValueError:
            raise TickParseError(line_number, line, 'цена должна быть числом') from None

        if not math.isfinite(price):
            raise TickParseError(line_number, line, 'цена должна быть конечным числом')
        if price <= 0:
            raise PriceRejectedError(line_number, price)

        timestamps.append(timestamp)
        prices.append(price)

    timestamps_array = np.asarray(timestamps, dtype=np.int64)
    prices_array = np.asarray(prices, dtype=np.float64)
    order = np.argsort(timestamps_array, kind='stable')

    logger.debug('Разобрано %d сделок для %s', timestamps_array.size, stock_id)
    return TickSeries(stock_id, timestamps_array[order], prices_array[order])


def read_tick_file(path: str | Path) -> TickSeries:
    """Читает тиковый файл; идентификатор бумаги - имя файла без расширения."""
    path = Path(path)
    try:
        with path.open('rb') as handle:
            return parse_ticks(handle, path.stem)
    except OSError as exc:
        raise InputError(f'Не удалось прочитать тиковый файл {path}: {exc.strerror}') from exc


def read_tick_directory(directory: str | Path, stock_ids: Iterable[str] | None = None) -> dict[str, TickSeries]:
    """
    Читает тиковые файлы каталога (по одному файлу на бумагу).

    Если передан stock_ids, читаются только эти бумаги; отсутствующие
    бумаги в словарь не попадают.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f'Каталог с тиками не найден: {directory}')

    wanted = set(stock_ids) if stock_ids is not None else None
    paths = sorted(
        path for path in directory.iterdir()
        if path.is_file() and path.suffix.lower() in TICK_FILE_SUFFIXES
    )

    series = {}
    for path in paths:
        if wanted is not None and path.stem not in wanted:
            continue
        if path.stem in series:
            raise InputError(f'Бумага {path.stem} встречается в нескольких файлах каталога {directory}')
        series[path.stem] = read_tick_file(path)

    logger.info('Прочитано %d тиковых файлов из %s', len(series), directory)
    return series


def format_ticks(series: TickSeries) -> str:
    """Текст тикового файла для TickSeries (формат parse_ticks)."""
    lines = [f'# {series.stock_id}: timestamp,price']
    rows = zip(series.timestamps.tolist(), series.prices.tolist())
    lines.extend(f'{timestamp},{price!r}' for timestamp, price in rows)
    return '\n'.join(lines) + '\n'


def parse_calendar(stream: BinaryIO | bytes | str, step_minutes: int | None = None) -> SessionCalendar:
    """
    Разбирает файл календаря: строки `YYYY-MM-DD,open_minute,close_minute`.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    elif isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)

    days, opens, closes = [], [], []
    for line_number, raw in enumerate(stream, start=1):
        line = raw.decode('utf-8') if isinstance(raw, (bytes, bytearray)) else raw
        line = line.lstrip('\ufeff').strip()
        if not line or line.startswith('#'):
            continue

        fields = [value.strip() for value in line.split(',')]
        if len(fields) != 3:
            raise CalendarError(f'Строка {line_number}: ожидается YYYY-MM-DD,open_minute,close_minute ({line!r})')
        try:
            days.append(date.fromisoformat(fields[0]))
            opens.append(int(fields[1]))
            closes.append(int(fields[2]))
        except ValueError:
            raise CalendarError(f'Строка {line_number}: не удалось разобрать {line!r}') from None

    return SessionCalendar(
        tuple(days), tuple(opens), tuple(closes),
        step_minutes=step_minutes or spectra_settings.GRID_STEP_MINUTES,
    )


def read_calendar_file(path: str | Path, step_minutes: int | None = None) -> SessionCalendar:
    path = Path(path)
    try:
        with path.open('rb') as handle:
            return parse_calendar(handle, step_minutes)
    except OSError as exc:
        raise InputError(f'Не удалось прочитать календарь {path}: {exc.strerror}') from exc


def format_calendar(calendar: SessionCalendar) -> str:
    lines = ['# date,open_minute,close_minute']
    lines.extend(
        f'{day.isoformat()},{open_minute},{close_minute}'
        for day, open_minute, close_minute in zip(calendar.days, calendar.opens, calendar.closes)
    )
    return '\n'.join(lines) + '\n'


def resample(ticks: TickSeries, calendar: SessionCalendar) -> PriceSeries:
    """
    Переводит сделки на сетку календаря правилом предыдущей сделки.

    Каждая точка сетки получает цену последней сделки не позже нее. Точки до
    первой сделки отбрасываются; интервал листинга заканчивается последней
    сессией, в которой бумага торговалась.

    Raises:
        EmptySeriesError: нет сделок или ни одна точка сетки не покрыта
        CalendarError: в календаре нет торговых дней
    """
    if len(ticks) == 0:
        raise EmptySeriesError(f'{ticks.stock_id}: нет сделок')
    if len(calendar) == 0:
        raise CalendarError('В календаре нет ни одного торгового дня')

    grid = calendar.grid
    last_tick = np.searchsorted(ticks.timestamps, grid.timestamps, side='right') - 1
    last_session = np.searchsorted(calendar.open_timestamps, ticks.timestamps[-1], side='right') - 1

    listed = (last_tick >= 0) & (grid.sessions <= last_session)
    if not listed.any():
        raise EmptySeriesError(f'{ticks.stock_id}: сделки не попадают ни в одну сессию календаря')

    return PriceSeries(
        stock_id=ticks.stock_id,
        timestamps=grid.timestamps[listed],
        prices=ticks.prices[last_tick[listed]],
        sessions=grid.sessions[listed],
        clock=grid.clock[listed],
        step_minutes=calendar.step_minutes,
    )


def write_tick_file(series: TickSeries, path: str | Path) -> Path:
    """Записывает тиковый файл <stock_id> в формате parse_ticks."""
    path = Path(path)
    path.write_text(format_ticks(series), encoding='utf-8')
    return path


def write_calendar(calendar: SessionCalendar, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(format_calendar(calendar), encoding='utf-8')
    return path
