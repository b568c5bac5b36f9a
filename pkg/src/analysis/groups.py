"""
Группы бумаг с меняющимся составом и склейка сигналов.

Группа состоит из слотов. Слот - цепочка интервалов (бумага, с, по):
когда бумага выбывает из корзины, ее нормированные доходности обрезаются и
продолжаются доходностями заменившей ее бумаги. Склейка выполняется на
уровне доходностей, а не цен, поэтому через стык доходность не считается.
"""

import io
import logging
import math
import re
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, TextIO

import numpy as np

from .exceptions import CoverageError, GroupFileError, InputError, LagError, SpliceSpecificationError
from .ingest import SessionCalendar
from .returns import ReturnPanel, ReturnSeries, assemble_panel, normalize_values
from .utils import epoch_day, parallel_map

logger = logging.getLogger(__name__)

SLOT_LINE = re.compile(r'^(?P<slot>[^:\s]+)\s*:\s*(?P<chain>.+)$')
HEADER_LINE = re.compile(r'^\[(?P<group>[^\]\s]+)\]$')
INTERVAL = re.compile(r'^(?P<stock>[^@\s]+)(?:@(?P<start>\d{4}-\d{2}-\d{2})?\.\.(?P<end>\d{4}-\d{2}-\d{2})?)?$')


@dataclass(frozen=True)
class SlotInterval:
    """Интервал членства бумаги в слоте; границы включительно, None - открытая граница."""

    stock_id: str
    start: date | None = None
    end: date | None = None

    def __post_init__(self):
        if self.start is not None and self.end is not None and self.start > self.end:
            raise SpliceSpecificationError(
                f'{self.stock_id}: начало интервала {self.start} позже конца {self.end}'
            )

    def __str__(self):
        if self.start is None and self.end is None:
            return self.stock_id
        start = self.start.isoformat() if self.start else ''
        end = self.end.isoformat() if self.end else ''
        return f'{self.stock_id}@{start}..{end}'


@dataclass(frozen=True)
class Slot:
    slot_id: str
    intervals: tuple[SlotInterval, ...]

    def __post_init__(self):
        object.__setattr__(self, 'intervals', tuple(self.intervals))
        if not self.intervals:
            raise SpliceSpecificationError(f'Слот {self.slot_id} не содержит ни одного интервала')

    @property
    def stock_ids(self) -> tuple[str, ...]:
        return tuple(interval.stock_id for interval in self.intervals)


@dataclass(frozen=True)
class GroupSpec:
    """
    Описание группы: слоты с цепочками интервалов.

    Группа с постоянным составом - частный случай, когда в каждом слоте
    один интервал без границ.
    """

    group_id: str
    slots: tuple[Slot, ...]

    def __post_init__(self):
        object.__setattr__(self, 'slots', tuple(self.slots))
        if not self.slots:
            raise SpliceSpecificationError(f'Группа {self.group_id} не содержит слотов')

        slot_ids = [slot.slot_id for slot in self.slots]
        duplicates = sorted({slot_id for slot_id in slot_ids if slot_ids.count(slot_id) > 1})
        if duplicates:
            raise SpliceSpecificationError(f'Группа {self.group_id}: повторяются слоты {", ".join(duplicates)}')

    @classmethod
    def fixed(cls, group_id: str, stock_ids: Iterable[str]) -> 'GroupSpec':
        """Группа постоянного состава: слот на бумагу, идентификатор слота совпадает с бумагой."""
        return cls(group_id, tuple(Slot(stock_id, (SlotInterval(stock_id),)) for stock_id in stock_ids))

    @property
    def size(self) -> int:
        """N_k - число строк панели группы."""
        return len(self.slots)

    @property
    def stock_ids(self) -> tuple[str, ...]:
        """Все бумаги группы без повторов в порядке появления."""
        return tuple(dict.fromkeys(stock_id for slot in self.slots for stock_id in slot.stock_ids))


def check_chain(slot: Slot, calendar: SessionCalendar | None = None) -> None:
    """
    Проверяет, что интервалы слота идут по времени без пересечений и разрывов.

    Разрывом считается торговый день строго между соседними интервалами
    (без календаря - любой календарный день).
    """
    for previous, current in zip(slot.intervals, slot.intervals[1:]):
        if previous.end is None or current.start is None:
            raise SpliceSpecificationError(
                f'Слот {slot.slot_id}: внутренние границы цепочки должны быть заданы ({previous} ; {current})'
            )
        if current.start <= previous.end:
            raise SpliceSpecificationError(
                f'Слот {slot.slot_id}: интервалы {previous} и {current} пересекаются или идут не по порядку'
            )

        if calendar is not None:
            missing = calendar.trading_days_between(previous.end, current.start)
        else:
            missing = (current.start - previous.end).days - 1
        if missing > 0:
            raise SpliceSpecificationError(
                f'Слот {slot.slot_id}: между {previous} и {current} пропущено дней: {missing}'
            )


def _lag_slack(tau: int, calendar: SessionCalendar | None) -> int:
    """Сколько сессий может захватить один интервал доходности."""
    if calendar is None or len(calendar) == 0:
        return 0
    return math.ceil(tau / int(calendar.session_minutes.min()))


def _interval_mask(series: ReturnSeries, interval: SlotInterval, calendar: SessionCalendar | None) -> np.ndarray:
    days = series.days
    mask = np.ones(days.size, dtype=bool)
    if interval.start is not None:
        mask &= days >= epoch_day(interval.start)
    if interval.end is not None:
        mask &= days <= epoch_day(interval.end)

    if not mask.any():
        raise CoverageError(f'{series.stock_id}: нет доходностей внутри интервала {interval}')

    # Ряд должен покрывать интервал; допуск - число сессий в одном интервале доходности
    if calendar is not None:
        slack = _lag_slack(series.tau, calendar)
        trading_days = calendar.day_numbers
        first = int(np.searchsorted(trading_days, days[0], side='left'))
        last = int(np.searchsorted(trading_days, days[-1], side='left'))
        if interval.start is not None:
            start = calendar.snap_start(interval.start)
            if start is not None and first > int(np.searchsorted(trading_days, start)) + slack:
                raise CoverageError(f'{series.stock_id}: ряд начинается позже начала интервала {interval}')
        if interval.end is not None:
            end = calendar.snap_end(interval.end)
            if end is not None and last < int(np.searchsorted(trading_days, end)) - slack:
                raise CoverageError(f'{series.stock_id}: ряд заканчивается раньше конца интервала {interval}')
    else:
        if interval.start is not None and days[0] > epoch_day(interval.start):
            raise CoverageError(f'{series.stock_id}: ряд начинается позже начала интервала {interval}')
        if interval.end is not None and days[-1] < epoch_day(interval.end):
            raise CoverageError(f'{series.stock_id}: ряд заканчивается раньше конца интервала {interval}')

    return mask


def splice_slot(
    slot: Slot,
    universe: Mapping[str, ReturnSeries],
    calendar: SessionCalendar | None = None,
) -> ReturnSeries:
    """
    Склеивает нормированные доходности бумаг слота в один ряд.

    Каждая бумага ограничивается своим интервалом, куски соединяются по
    времени и склеенный ряд нормируется заново. Слот из одного интервала,
    покрывающего весь ряд, возвращает ряд бумаги без изменений (с
    идентификатором слота).

    Raises:
        SpliceSpecificationError: разрыв или пересечение интервалов
        CoverageError: нет данных бумаги внутри ее интервала
    """
    check_chain(slot, calendar)

    pieces = []
    for interval in slot.intervals:
        try:
            series = universe[interval.stock_id]
        except KeyError:
            raise CoverageError(f'Слот {slot.slot_id}: нет данных по бумаге {interval.stock_id}') from None
        if not series.normalized:
            raise InputError(f'Слот {slot.slot_id}: ряд {interval.stock_id} не нормирован')
        pieces.append((series, _interval_mask(series, interval, calendar)))

    taus = {series.tau for series, _ in pieces}
    if len(taus) > 1:
        raise LagError(f'Слот {slot.slot_id}: ряды построены с разными лагами {sorted(taus)}')

    if len(pieces) == 1 and pieces[0][1].all():
        series = pieces[0][0]
        return series if series.stock_id == slot.slot_id else replace(series, stock_id=slot.slot_id)

    values = np.concatenate([series.values[mask] for series, mask in pieces])
    timestamps = np.concatenate([series.timestamps[mask] for series, mask in pieces])

    logger.debug('Слот %s: склеено %d кусков, %d доходностей', slot.slot_id, len(pieces), values.size)
    return ReturnSeries(
        stock_id=slot.slot_id,
        tau=taus.pop(),
        values=normalize_values(values, slot.slot_id),
        timestamps=timestamps,
        normalized=True,
    )


def build_group_panel(
    spec: GroupSpec,
    universe: Mapping[str, ReturnSeries],
    tau: int,
    calendar: SessionCalendar | None = None,
) -> ReturnPanel:
    """Строит панель группы: строка на слот, общая сетка, строки перенормированы."""
    wrong_lag = sorted(
        stock_id for stock_id in spec.stock_ids
        if stock_id in universe and universe[stock_id].tau != tau
    )
    if wrong_lag:
        raise LagError(f'Группа {spec.group_id}: ряды {", ".join(wrong_lag)} построены не с лагом {tau} мин')

    rows = parallel_map(lambda slot: splice_slot(slot, universe, calendar), spec.slots)
    return assemble_panel(rows, group_id=spec.group_id)


def _parse_date(value: str | None, line_number: int) -> date | None:
    if value is None:
        return None
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise GroupFileError(f'Строка {line_number}: некорректная дата {value!r}') from None


def parse_group_file(stream: TextIO | str | bytes, default_group_id: str = 'default') -> list[GroupSpec]:
    """
    Разбирает файл групп.

    Формат:
        [group_id]
        slot_id: stock_id@YYYY-MM-DD..YYYY-MM-DD; stock_id@YYYY-MM-DD..
        stock_id

    Строки до первого заголовка относятся к группе default_group_id.
    Бумага без `@` входит в слот на все окно; одиночная бумага без
    `slot_id:` образует слот со своим идентификатором.
    """
    if isinstance(stream, bytes):
        stream = stream.decode('utf-8')
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    groups: dict[str, list[Slot]] = {}
    current = default_group_id

    for line_number, raw in enumerate(stream, start=1):
        line = raw.split('#', 1)[0].lstrip('\ufeff').strip()
        if not line:
            continue

        header = HEADER_LINE.match(line)
        if header:
            current = header.group('group')
            if current in groups:
                raise GroupFileError(f'Строка {line_number}: группа {current} описана повторно')
            groups[current] = []
            continue

        match = SLOT_LINE.match(line)
        if match:
            slot_id, chain = match.group('slot'), match.group('chain')
        elif INTERVAL.match(line) and '@' not in line:
            slot_id, chain = line, line
        else:
            raise GroupFileError(f'Строка {line_number}: ожидается "slot_id: stock@from..to; ..." ({line!r})')

        intervals = []
        for item in (part.strip() for part in chain.split(';')):
            if not item:
                continue
            parsed = INTERVAL.match(item)
            if not parsed:
                raise GroupFileError(f'Строка {line_number}: некорректный интервал {item!r}')
            try:
                intervals.append(SlotInterval(
                    parsed.group('stock'),
                    _parse_date(parsed.group('start'), line_number),
                    _parse_date(parsed.group('end'), line_number),
                ))
            except SpliceSpecificationError as exc:
                raise GroupFileError(f'Строка {line_number}: {exc}') from None

        if not intervals:
            raise GroupFileError(f'Строка {line_number}: слот {slot_id} без интервалов')
        groups.setdefault(current, []).append(Slot(slot_id, tuple(intervals)))

    specs = []
    for group_id, slots in groups.items():
        try:
            specs.append(GroupSpec(group_id, tuple(slots)))
        except SpliceSpecificationError as exc:
            raise GroupFileError(str(exc)) from None

    if not specs:
        raise GroupFileError('Файл групп не содержит ни одной группы')
    return specs


def read_group_file(path: str | Path) -> list[GroupSpec]:
    """Читает файл групп; группа без заголовка получает имя файла без расширения."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise InputError(f'Не удалось прочитать файл групп {path}: {exc.strerror}') from exc
    except UnicodeDecodeError:
        raise GroupFileError(f'Файл групп {path} не в кодировке UTF-8') from None
    return parse_group_file(text, default_group_id=path.stem)


def format_group_file(specs: Iterable[GroupSpec]) -> str:
    blocks = []
    for spec in specs:
        lines = [f'[{spec.group_id}]']
        lines.extend(
            f'{slot.slot_id}: ' + '; '.join(str(interval) for interval in slot.intervals)
            for slot in spec.slots
        )
        blocks.append('\n'.join(lines))
    return '\n\n'.join(blocks) + '\n'
