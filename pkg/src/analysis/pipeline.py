"""
Конвейер для одного лага: доходности -> нормировка -> склейка -> C -> спектр -> отчет.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

from .exceptions import CoverageError
from .groups import GroupSpec, build_group_panel
from .ingest import PriceSeries, SessionCalendar
from .returns import ReturnPanel, ReturnSeries, log_returns, normalize
from .rmt import MPBounds, SpectrumReport, classify_spectrum, mp_bounds
from .spectra import CorrelationMatrix, EigenSystem, correlation_matrix, eigendecompose, remove_market_mode
from .utils import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GroupAnalysis:
    panel: ReturnPanel
    matrix: CorrelationMatrix
    eigensystem: EigenSystem
    bounds: MPBounds
    report: SpectrumReport


@dataclass(frozen=True, eq=False)
class MarketModeComparison:
    """Спектр группы до и после удаления рыночной моды."""

    before: GroupAnalysis
    after: GroupAnalysis

    @property
    def lambda1_shift(self) -> float:
        """Относительное изменение lambda_1."""
        return (self.before.report.lambda1 - self.after.report.lambda1) / self.before.report.lambda1


def crosses_sessions(tau: int, calendar: SessionCalendar | None) -> bool:
    """Лаг длиннее самой короткой сессии измеряется только через границы сессий."""
    return calendar is not None and len(calendar) > 0 and tau > int(calendar.session_minutes.min())


def stock_returns(
    prices: Mapping[str, PriceSeries],
    stock_ids: Iterable[str],
    tau: int,
    cross_session: bool = False,
) -> dict[str, ReturnSeries]:
    """Нормированные доходности бумаг при лаге tau (по бумагам параллельно)."""
    stock_ids = list(stock_ids)
    missing = [stock_id for stock_id in stock_ids if stock_id not in prices]
    if missing:
        raise CoverageError(f'Нет ценовых рядов для бумаг: {", ".join(missing)}')

    series = parallel_map(lambda stock_id: normalize(log_returns(prices[stock_id], tau, cross_session)), stock_ids)
    return dict(zip(stock_ids, series))


def analyze_panel(panel: ReturnPanel, null_modes: int = 0) -> GroupAnalysis:
    """
    Спектр панели и его сравнение с полосой при эффективном Q = T/N_k панели.

    После удаления null_modes мод ранг матрицы равен N_k - null_modes: полоса
    строится для этой размерности, sigma2 равна среднему ненулевых собственных
    значений, а нулевые собственные значения в сравнение не входят.
    """
    matrix = correlation_matrix(panel)
    eigensystem = eigendecompose(matrix)
    if null_modes:
        rank = panel.N - null_modes
        bounds = mp_bounds(panel.T / rank, eigensystem.trace / rank)
    else:
        bounds = mp_bounds(panel.Q)
    report = classify_spectrum(eigensystem, bounds, null_modes)

    logger.info(
        'Группа %s, tau=%s мин: N=%d, T=%d, lambda_1=%.6g (lambda_max=%.6g), внутри полосы %d из %d',
        panel.group_id, panel.tau, panel.N, panel.T, report.lambda1, bounds.lambda_max, report.within, report.n,
    )
    return GroupAnalysis(panel, matrix, eigensystem, bounds, report)


def group_panel(
    prices: Mapping[str, PriceSeries],
    spec: GroupSpec,
    tau: int,
    calendar: SessionCalendar | None = None,
    cross_session: bool | None = None,
) -> ReturnPanel:
    if cross_session is None:
        cross_session = crosses_sessions(tau, calendar)
    universe = stock_returns(prices, spec.stock_ids, tau, cross_session)
    return build_group_panel(spec, universe, tau, calendar)


def analyze_group(
    prices: Mapping[str, PriceSeries],
    spec: GroupSpec,
    tau: int,
    calendar: SessionCalendar | None = None,
    cross_session: bool | None = None,
) -> GroupAnalysis:
    """
    Полный расчет для группы при одном лаге.

    Если cross_session не задан, интервалы через границу сессии
    допускаются только для лагов длиннее самой короткой сессии календаря.
    """
    return analyze_panel(group_panel(prices, spec, tau, calendar, cross_session))


def compare_market_mode(panel: ReturnPanel) -> MarketModeComparison:
    before = analyze_panel(panel)
    after = analyze_panel(remove_market_mode(panel, before.eigensystem), null_modes=1)
    return MarketModeComparison(before, after)
