"""
Кривая Эппса: зависимость lambda_1 от лага tau и оценка уровня насыщения.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np

from .conf import spectra_settings
from .exceptions import EppsSweepError, InsufficientLengthError, LagError
from .groups import GroupSpec
from .ingest import PriceSeries, SessionCalendar
from .pipeline import analyze_group
from .utils import parallel_map

logger = logging.getLogger(__name__)

MIN_SATURATION_POINTS = 4


@dataclass(frozen=True)
class EppsPoint:
    tau: int
    lambda1: float
    lambda1_normalized: float
    lambda_max: float
    q: float
    t_effective: int


@dataclass(frozen=True)
class Saturation:
    level: float
    tau: int


@dataclass(frozen=True)
class SkippedLag:
    tau: int
    reason: str


@dataclass(frozen=True)
class EppsCurve:
    """Точки lambda_1(tau) по возрастанию лага; пропущенные лаги хранятся с причиной."""

    group_id: str
    points: tuple[EppsPoint, ...]
    saturation: Saturation | None = None
    skipped: tuple[SkippedLag, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'points', tuple(self.points))
        object.__setattr__(self, 'skipped', tuple(self.skipped))
        taus = [point.tau for point in self.points]
        if any(later <= earlier for earlier, later in zip(taus, taus[1:])):
            raise LagError(f'Лаги кривой должны строго возрастать: {taus}')

    @property
    def taus(self) -> tuple[int, ...]:
        return tuple(point.tau for point in self.points)

    @property
    def lambda1(self) -> np.ndarray:
        return np.array([point.lambda1 for point in self.points], dtype=np.float64)


def estimate_saturation(curve: EppsCurve, tolerance: float | None = None) -> Saturation | None:
    """
    Уровень насыщения - среднее lambda_1 по последней трети точек.

    tau_sat - наименьший лаг, начиная с которого lambda_1 остается в полосе
    level * (1 +- tolerance). Меньше четырех точек или выход последней точки
    из полосы - оценки нет.
    """
    tolerance = spectra_settings.SATURATION_TOLERANCE if tolerance is None else tolerance
    if len(curve.points) < MIN_SATURATION_POINTS:
        return None

    values = curve.lambda1
    tail = math.ceil(values.size / 3)
    level = float(values[-tail:].mean())

    outside = np.flatnonzero(np.abs(values - level) > tolerance * abs(level))
    if outside.size == 0:
        return Saturation(level, curve.points[0].tau)
    if outside[-1] == values.size - 1:
        return None
    return Saturation(level, curve.points[outside[-1] + 1].tau)


def admissible_lags(lags: Iterable[int], step_minutes: int) -> list[int]:
    """Сортирует лаги без повторов и проверяет, что каждый кратен шагу сетки."""
    lags = sorted({int(lag) for lag in lags})
    if not lags:
        raise LagError('Список лагов пуст')
    wrong = [lag for lag in lags if lag <= 0 or lag % step_minutes]
    if wrong:
        raise LagError(f'Лаги {wrong} не кратны шагу сетки {step_minutes} мин')
    return lags


def epps_curve(
    prices: Mapping[str, PriceSeries],
    spec: GroupSpec,
    lags: Iterable[int],
    calendar: SessionCalendar | None = None,
    tolerance: float | None = None,
) -> EppsCurve:
    """
    Для каждого лага строит панель группы заново и записывает lambda_1,
    lambda_1/trace и lambda_max при эффективном Q этого лага.

    Лаг, при котором T <= N_k, пропускается с предупреждением.

    Raises:
        LagError: лаг не кратен шагу сетки
        EppsSweepError: пропущены все лаги
    """
    if calendar is not None:
        step = calendar.step_minutes
    else:
        step = next(iter(prices.values())).step_minutes if prices else 1
    lags = admissible_lags(lags, step)

    def run(tau):
        try:
            return analyze_group(prices, spec, tau, calendar)
        except InsufficientLengthError as exc:
            return SkippedLag(tau, str(exc))

    points, skipped = [], []
    for tau, outcome in zip(lags, parallel_map(run, lags)):
        if isinstance(outcome, SkippedLag):
            logger.warning('Группа %s: лаг %d мин пропущен: %s', spec.group_id, tau, outcome.reason)
            skipped.append(outcome)
            continue
        report = outcome.report
        points.append(EppsPoint(
            tau=tau,
            lambda1=report.lambda1,
            lambda1_normalized=report.lambda1_normalized,
            lambda_max=report.bounds.lambda_max,
            q=report.q,
            t_effective=report.t,
        ))

    if not points:
        raise EppsSweepError(f'Группа {spec.group_id}: все лаги {lags} пропущены, кривая пуста')

    curve = EppsCurve(spec.group_id, tuple(points), skipped=tuple(skipped))
    return replace(curve, saturation=estimate_saturation(curve, tolerance))
