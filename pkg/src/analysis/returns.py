"""
Логарифмические доходности с лагом tau и матрица данных M.

Интервалы доходностей привязаны к "торговым часам" календаря: интервал k
покрывает шаги [k*tau, (k+1)*tau). Соседние интервалы примыкают друг к другу
и не перекрываются, поэтому эффективная длина ряда убывает как T/tau.
"""

import functools
import io
import logging
from dataclasses import dataclass, replace
from typing import BinaryIO, Sequence

import numpy as np

from .exceptions import (
    DegenerateSeriesError,
    GridIntersectionError,
    InputError,
    InsufficientLengthError,
    LagError,
    PanelFileError,
)
from .ingest import SECONDS_PER_DAY, PriceSeries
from .utils import readonly_array

logger = logging.getLogger(__name__)

PANEL_MAGIC = b'SPLPANEL'


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """
    Ряд доходностей G(t_i) одной бумаги (или слота группы).

    timestamps - начало каждого интервала доходности.
    """

    stock_id: str
    tau: int
    values: np.ndarray
    timestamps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = readonly_array(self.values, np.float64)
        timestamps = readonly_array(self.timestamps, np.int64)

        if values.ndim != 1 or values.shape != timestamps.shape:
            raise InputError(f'{self.stock_id}: значения и метки времени доходностей разной длины')
        if values.size < 2:
            raise InsufficientLengthError(f'{self.stock_id}: нужно не меньше двух доходностей, получено {values.size}')
        if np.any(np.diff(timestamps) <= 0):
            raise InputError(f'{self.stock_id}: метки времени доходностей должны строго возрастать')

        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'timestamps', timestamps)

    @property
    def T(self) -> int:
        return int(self.values.size)

    @property
    def days(self) -> np.ndarray:
        """Номер дня от эпохи для каждой доходности."""
        return self.timestamps // SECONDS_PER_DAY


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """
    Матрица данных M размера N_k x T из нормированных доходностей.

    Все строки заданы на общей сетке timestamps; требуется T > N_k.
    """

    stock_ids: tuple[str, ...]
    tau: int
    matrix: np.ndarray
    timestamps: np.ndarray
    group_id: str | None = None

    def __post_init__(self):
        stock_ids = tuple(self.stock_ids)
        matrix = readonly_array(self.matrix, np.float64)
        timestamps = readonly_array(self.timestamps, np.int64)
        object.__setattr__(self, 'stock_ids', stock_ids)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'timestamps', timestamps)

        if matrix.ndim != 2 or matrix.shape != (len(stock_ids), timestamps.size):
            raise InputError(
                f'Форма матрицы {matrix.shape} не согласуется с {len(stock_ids)} рядами и {timestamps.size} точками'
            )
        if len(set(stock_ids)) != len(stock_ids):
            raise InputError('Идентификаторы строк панели должны быть уникальными')
        if self.T <= self.N:
            raise InsufficientLengthError(f'Требуется T > N_k, получено T={self.T}, N_k={self.N}')

    @property
    def N(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def T(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def Q(self) -> float:
        return self.T / self.N

    def row(self, index: int) -> ReturnSeries:
        return ReturnSeries(self.stock_ids[index], self.tau, self.matrix[index], self.timestamps, normalized=True)

    def with_matrix(self, matrix: np.ndarray) -> 'ReturnPanel':
        return replace(self, matrix=matrix)


def log_returns(prices: PriceSeries, tau: int, cross_session: bool = False) -> ReturnSeries:
    """
    Строит ряд G(t_i) = ln p(t_i + tau) - ln p(t_i) без перекрытия интервалов.

    Интервал берется, только если все его шаги сетки лежат в интервале
    листинга. По умолчанию интервалы, пересекающие границу сессии,
    пропускаются. При cross_session=True такой интервал сохраняется, а его
    доходность равна сумме внутридневных частей (ночной скачок исключается):
    так измеряются лаги длиннее одной сессии.

    Raises:
        LagError: tau не кратен шагу сетки
        InsufficientLengthError: получилось меньше двух доходностей
    """
    step = prices.step_minutes
    if tau <= 0 or tau % step:
        raise LagError(f'Лаг {tau} мин должен быть положительным и кратным шагу сетки {step} мин')
    k = tau // step

    log_prices = np.log(prices.prices)
    same_session = prices.sessions[1:] == prices.sessions[:-1]

    # Шаг сетки начинается в точке step_start и идет в соседнюю точку той же сессии
    step_start = np.flatnonzero(same_session)
    step_clock = prices.clock[step_start]
    _, first, counts = np.unique(step_clock // k, return_index=True, return_counts=True)

    complete = counts == k
    start = step_start[first[complete]]
    end = step_start[first[complete] + k - 1] + 1

    if not cross_session:
        inside = prices.sessions[start] == prices.sessions[end]
        start, end = start[inside], end[inside]

    # Накопленные ночные скачки: вычитаются из разности логарифмов цен
    jumps = np.where(same_session, 0.0, np.diff(log_prices))
    overnight = np.concatenate(([0.0], np.cumsum(jumps)))

    values = log_prices[end] - log_prices[start]
    crossing = prices.sessions[start] != prices.sessions[end]
    values[crossing] -= overnight[end[crossing]] - overnight[start[crossing]]

    if values.size < 2:
        raise InsufficientLengthError(
            f'{prices.stock_id}: при лаге {tau} мин получено {values.size} доходностей, нужно не меньше двух'
        )

    logger.debug('%s: %d доходностей при tau=%d мин', prices.stock_id, values.size, tau)
    return ReturnSeries(prices.stock_id, tau, values, prices.timestamps[start])


def normalize_values(values: np.ndarray, stock_id: str) -> np.ndarray:
    """
    Нормирует массив к нулевому среднему и единичной выборочной дисперсии (делитель T-1).

    Raises:
        DegenerateSeriesError: дисперсия равна нулю
    """
    values = np.asarray(values, dtype=np.float64)
    centered = values - values.mean()
    centered -= centered.mean()

    std = centered.std(ddof=1)
    scale = np.abs(values).max(initial=0.0)
    if not np.isfinite(std) or std == 0.0 or std <= 1e-13 * scale:
        raise DegenerateSeriesError(stock_id)

    normalized = centered / std
    normalized -= normalized.mean()
    return normalized


def normalize(series: ReturnSeries) -> ReturnSeries:
    """Возвращает нормированный ряд: (x - mean) / std, std с делителем T-1."""
    values = normalize_values(series.values, series.stock_id)
    return replace(series, values=values, normalized=True)


def assemble_panel(series: Sequence[ReturnSeries], group_id: str | None = None) -> ReturnPanel:
    """
    Собирает матрицу M из нормированных рядов.

    Строки ограничиваются пересечением сеток и нормируются повторно,
    так как ограничение сдвигает среднее и дисперсию.

    Raises:
        GridIntersectionError: общих точек нет
        InsufficientLengthError: T <= N_k
    """
    if not series:
        raise GridIntersectionError('Нет рядов для сборки панели')

    taus = {item.tau for item in series}
    if len(taus) > 1:
        raise LagError(f'Ряды панели построены с разными лагами: {sorted(taus)}')
    not_normalized = [item.stock_id for item in series if not item.normalized]
    if not_normalized:
        raise InputError(f'Ряды не нормированы: {", ".join(not_normalized)}')

    common = functools.reduce(np.intersect1d, (item.timestamps for item in series))
    if common.size == 0:
        raise GridIntersectionError('Сетки рядов не пересекаются')
    if common.size <= len(series):
        raise InsufficientLengthError(
            f'Общая сетка слишком короткая: T={common.size} <= N_k={len(series)} (нужно Q = T/N_k > 1)'
        )

    rows = [
        normalize_values(item.values[np.isin(item.timestamps, common, assume_unique=True)], item.stock_id)
        for item in series
    ]
    return ReturnPanel(
        stock_ids=tuple(item.stock_id for item in series),
        tau=taus.pop(),
        matrix=np.vstack(rows),
        timestamps=common,
        group_id=group_id,
    )


def write_panel(panel: ReturnPanel) -> bytes:
    """
    Двоичный файл панели (little-endian).

    Заголовок: магическая строка SPLPANEL, u64 N, T, tau; затем группа и
    идентификаторы строк (u16 длина + UTF-8); затем T меток времени int64 и
    матрица N x T float64 по строкам.
    """
    buffer = io.BytesIO()
    buffer.write(PANEL_MAGIC)
    buffer.write(np.array([panel.N, panel.T, panel.tau], dtype='<u8').tobytes())
    for text in (panel.group_id or '', *panel.stock_ids):
        encoded = text.encode('utf-8')
        buffer.write(np.array([len(encoded)], dtype='<u2').tobytes())
        buffer.write(encoded)
    buffer.write(panel.timestamps.astype('<i8').tobytes())
    buffer.write(panel.matrix.astype('<f8').tobytes(order='C'))
    return buffer.getvalue()


def read_panel(stream: BinaryIO | bytes) -> ReturnPanel:
    """Читает панель, записанную write_panel."""
    data = stream if isinstance(stream, (bytes, bytearray)) else stream.read()
    view = memoryview(data)

    if bytes(view[:8]) != PANEL_MAGIC:
        raise PanelFileError('Файл не является панелью доходностей (нет заголовка SPLPANEL)')

    try:
        n, t, tau = (int(value) for value in np.frombuffer(view, dtype='<u8', count=3, offset=8))
        offset = 32

        texts = []
        for _ in range(n + 1):
            length = int(np.frombuffer(view, dtype='<u2', count=1, offset=offset)[0])
            offset += 2
            texts.append(bytes(view[offset:offset + length]).decode('utf-8'))
            offset += length

        timestamps = np.frombuffer(view, dtype='<i8', count=t, offset=offset)
        offset += 8 * t
        matrix = np.frombuffer(view, dtype='<f8', count=n * t, offset=offset).reshape(n, t)
        offset += 8 * n * t
    except (ValueError, UnicodeDecodeError) as exc:
        raise PanelFileError(f'Файл панели поврежден: {exc}') from exc

    if offset != len(data):
        raise PanelFileError(f'Файл панели поврежден: лишние {len(data) - offset} байт в конце')

    group_id, *stock_ids = texts
    return ReturnPanel(tuple(stock_ids), tau, matrix, timestamps, group_id or None)
