"""
Синтетические данные с известным спектром.

gen_wishart_noise - независимый гауссов шум (нулевая гипотеза).
gen_one_factor - однофакторная модель G = sqrt(rho) f + sqrt(1 - rho) e.
gen_async_market - тики с пуассоновскими моментами сделок поверх
однофакторных латентных цен: на коротких лагах корреляции падают.

Потоки случайных чисел выводятся из одного seed через
numpy.random.SeedSequence.spawn, генератор - PCG64.
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import date

import numpy as np
from scipy.signal import lfilter

from .conf import spectra_settings
from .exceptions import DomainError, InsufficientLengthError
from .groups import GroupSpec, format_group_file
from .ingest import SessionCalendar, TickSeries, format_calendar, format_ticks
from .returns import ReturnPanel, normalize_values

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64
DEFAULT_START = date(2001, 1, 2)


def _generators(seed: int, count: int) -> list[np.random.Generator]:
    if not 0 <= seed < MAX_SEED:
        raise DomainError(f'seed должен быть в диапазоне [0, 2^64), получено {seed}')
    return [np.random.Generator(np.random.PCG64(child)) for child in np.random.SeedSequence(seed).spawn(count)]


def _check_dimensions(n: int, t: int) -> None:
    if n < 2:
        raise DomainError(f'Нужно не меньше двух бумаг, получено N={n}')
    if t <= n:
        raise InsufficientLengthError(f'Требуется T > N, получено T={t}, N={n}')


def _check_rho(rho: float) -> None:
    if not 0.0 <= rho < 1.0:
        raise DomainError(f'Корреляция rho должна лежать в [0, 1), получено {rho}')


def stock_ids(n: int) -> tuple[str, ...]:
    width = max(3, len(str(n)))
    return tuple(f'S{index:0{width}d}' for index in range(1, n + 1))


def _panel(matrix: np.ndarray, group_id: str) -> ReturnPanel:
    ids = stock_ids(matrix.shape[0])
    rows = [normalize_values(row, stock_id) for row, stock_id in zip(matrix, ids)]
    timestamps = np.arange(matrix.shape[1], dtype=np.int64) * 60
    return ReturnPanel(ids, 1, np.vstack(rows), timestamps, group_id=group_id)


def gen_wishart_noise(n: int, t: int, seed: int) -> ReturnPanel:
    """N независимых нормированных гауссовых рядов длины T."""
    _check_dimensions(n, t)
    generators = _generators(seed, n)
    matrix = np.vstack([generator.standard_normal(t) for generator in generators])
    return _panel(matrix, 'wishart')


def gen_one_factor(n: int, t: int, rho: float, seed: int) -> ReturnPanel:
    """
    Однофакторная модель: у всех пар одна и та же корреляция rho,
    lambda_1 = 1 + (N - 1) rho.
    """
    _check_rho(rho)
    _check_dimensions(n, t)
    factor_generator, *stock_generators = _generators(seed, n + 1)

    factor = factor_generator.standard_normal(t)
    noise = np.vstack([generator.standard_normal(t) for generator in stock_generators])
    matrix = math.sqrt(rho) * factor + math.sqrt(1.0 - rho) * noise
    return _panel(matrix, 'one-factor')


@dataclass(frozen=True)
class SynthConfig:
    """
    Параметры асинхронного рынка.

    intensities - средняя частота сделок (сделок в минуту) по классам:
    бумаги делятся на len(intensities) классов подряд идущими блоками.
    reaction_trades - сколько сделок нужно бумаге, чтобы усвоить новость
    общего фактора: постоянная времени реакции равна reaction_trades /
    intensity минут.
    """

    n_stocks: int
    rho: float
    seed: int
    intensities: tuple[float, ...] = (0.2,)
    sessions: int = 250
    synchronous: bool = False
    reaction_trades: float | None = None
    latent_volatility: float | None = None
    open_minute: int | None = None
    close_minute: int | None = None
    start: date = DEFAULT_START
    initial_price: float | None = None

    def __post_init__(self):
        defaults = {
            'reaction_trades': spectra_settings.REACTION_TRADES,
            'latent_volatility': spectra_settings.LATENT_VOLATILITY,
            'open_minute': spectra_settings.SESSION_OPEN_MINUTE,
            'close_minute': spectra_settings.SESSION_CLOSE_MINUTE,
            'initial_price': spectra_settings.INITIAL_PRICE,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        object.__setattr__(self, 'intensities', tuple(float(value) for value in self.intensities))

        if self.n_stocks < 2:
            raise DomainError(f'Нужно не меньше двух бумаг, получено N={self.n_stocks}')
        _check_rho(self.rho)
        if not 0 <= self.seed < MAX_SEED:
            raise DomainError(f'seed должен быть в диапазоне [0, 2^64), получено {self.seed}')
        if not self.intensities or any(not value > 0 for value in self.intensities):
            raise DomainError(f'Частоты сделок должны быть положительными, получено {self.intensities}')
        if len(self.intensities) > self.n_stocks:
            raise DomainError(f'Классов частот ({len(self.intensities)}) больше, чем бумаг ({self.n_stocks})')
        if self.sessions < 1:
            raise DomainError(f'Нужна хотя бы одна сессия, получено {self.sessions}')
        if self.reaction_trades < 0:
            raise DomainError(f'reaction_trades не может быть отрицательным, получено {self.reaction_trades}')
        if self.latent_volatility <= 0 or self.initial_price <= 0:
            raise DomainError('Латентная волатильность и начальная цена должны быть положительными')

    @property
    def stock_ids(self) -> tuple[str, ...]:
        return stock_ids(self.n_stocks)

    @property
    def classes(self) -> tuple[tuple[str, ...], ...]:
        ids = np.array(self.stock_ids, dtype=object)
        return tuple(tuple(block.tolist()) for block in np.array_split(ids, len(self.intensities)))

    def stock_intensities(self) -> np.ndarray:
        return np.repeat(self.intensities, [len(block) for block in self.classes])

    def calendar(self) -> SessionCalendar:
        return SessionCalendar.weekdays(self.start, self.sessions, self.open_minute, self.close_minute, 1)


@dataclass(frozen=True, eq=False)
class SyntheticMarket:
    config: SynthConfig
    calendar: SessionCalendar
    ticks: dict[str, TickSeries] = field(default_factory=dict)

    @property
    def classes(self) -> tuple[tuple[str, ...], ...]:
        return self.config.classes

    def groups(self) -> list[GroupSpec]:
        """Группа all и по группе на каждый класс частоты сделок."""
        specs = [GroupSpec.fixed('all', self.config.stock_ids)]
        if len(self.classes) > 1:
            specs.extend(
                GroupSpec.fixed(f'class_{index}', block)
                for index, block in enumerate(self.classes, start=1)
            )
        return specs


def _absorb(factor: np.ndarray, time_constant: float) -> np.ndarray:
    """Экспоненциальное сглаживание пути фактора с постоянной времени в минутах."""
    if time_constant <= 0:
        return factor
    weight = -math.expm1(-1.0 / time_constant)
    return lfilter([weight], [1.0, weight - 1.0], factor)


def gen_async_market(config: SynthConfig) -> SyntheticMarket:
    """
    Тики асинхронного рынка.

    Латентные лог-цены: x = ln p0 + sigma (sqrt(rho) F + sqrt(1 - rho) E) на
    минутных торговых часах, F и E - случайные блуждания. Бумага с частотой
    lambda совершает Poisson(lambda * L) сделок за сессию длины L в
    равномерные целые секунды; каждая сделка печатает латентную цену своей
    минуты. В синхронном режиме сделка проходит в каждой точке сетки.
    """
    calendar = config.calendar()
    grid = calendar.grid
    session_minutes = calendar.session_minutes
    clock_offsets = np.cumsum(session_minutes) - session_minutes
    total_steps = int(session_minutes.sum())

    factor_generator, *stock_generators = _generators(config.seed, config.n_stocks + 1)
    factor = np.concatenate(([0.0], np.cumsum(factor_generator.standard_normal(total_steps))))

    sigma = config.latent_volatility
    log_start = math.log(config.initial_price)
    loading = math.sqrt(config.rho)
    idiosyncratic = math.sqrt(1.0 - config.rho)

    ticks = {}
    for stock_id, intensity, generator in zip(config.stock_ids, config.stock_intensities(), stock_generators):
        noise = np.concatenate(([0.0], np.cumsum(generator.standard_normal(total_steps))))
        time_constant = 0.0 if config.synchronous else config.reaction_trades / intensity
        latent = log_start + sigma * (loading * _absorb(factor, time_constant) + idiosyncratic * noise)

        if config.synchronous:
            timestamps = grid.timestamps
            clock = grid.clock
        else:
            counts = generator.poisson(intensity * session_minutes)
            sessions = np.repeat(np.arange(len(calendar)), counts)
            seconds = generator.integers(0, session_minutes[sessions] * 60, endpoint=True)
            order = np.lexsort((seconds, sessions))
            sessions, seconds = sessions[order], seconds[order]
            timestamps = calendar.open_timestamps[sessions] + seconds
            clock = clock_offsets[sessions] + seconds // 60

        ticks[stock_id] = TickSeries(stock_id, timestamps, np.exp(latent[clock]))

    logger.info(
        'Синтетический рынок: %d бумаг, %d сессий, rho=%s, сделок всего %d',
        config.n_stocks, config.sessions, config.rho, sum(len(series) for series in ticks.values()),
    )
    return SyntheticMarket(config, calendar, ticks)


def write_market(market: SyntheticMarket, writer) -> list:
    """
    Записывает рынок в форматах ingest: ticks/<stock_id>.csv, calendar.csv
    и groups.txt. writer - ArtifactWriter каталога результата.
    """
    paths = [
        writer.write_text(f'ticks/{stock_id}.csv', format_ticks(series))
        for stock_id, series in market.ticks.items()
    ]
    paths.append(writer.write_text('calendar.csv', format_calendar(market.calendar)))
    paths.append(writer.write_text('groups.txt', format_group_file(market.groups())))
    return paths
