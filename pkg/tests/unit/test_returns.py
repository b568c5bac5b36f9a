"""
Юнит-тесты логарифмических доходностей, нормировки и матрицы данных.
"""

import io
from datetime import date

import numpy as np
import pytest

from analysis.exceptions import (
    DegenerateSeriesError,
    GridIntersectionError,
    InputError,
    InsufficientLengthError,
    LagError,
    PanelFileError,
)
from analysis.ingest import SessionCalendar
from analysis.returns import (
    ReturnSeries,
    assemble_panel,
    log_returns,
    normalize,
    normalize_values,
    read_panel,
    write_panel,
)
from analysis.synth import gen_one_factor


def _series(stock_id, timestamps, seed, tau=1):
    values = np.random.default_rng(seed).standard_normal(len(timestamps))
    return normalize(ReturnSeries(stock_id, tau, values, timestamps))


@pytest.fixture
def three_sessions():
    """Три четырехминутные сессии подряд."""
    days = (date(1970, 1, 1), date(1970, 1, 2), date(1970, 1, 3))
    return SessionCalendar(days, (0, 0, 0), (4, 4, 4))


@pytest.mark.unit
class TestLogReturns:
    """Тесты построения ряда G(t) = ln p(t + tau) - ln p(t)."""

    def test_constant_prices_give_zero_returns(self, price_series):
        """Тест: постоянная цена дает нулевые доходности."""
        calendar = SessionCalendar((date(1970, 1, 1),), (0,), (2,))

        returns = log_returns(price_series(calendar, [100.0, 100.0, 100.0]), 1)

        assert returns.values.tolist() == [0.0, 0.0]

    def test_log_of_price_ratio(self, price_series):
        """Тест: доходность - логарифм отношения цен."""
        calendar = SessionCalendar((date(1970, 1, 1),), (0,), (2,))

        returns = log_returns(price_series(calendar, [100.0, 110.0, 121.0]), 1)

        np.testing.assert_allclose(returns.values, [0.0953102, 0.0953102], atol=1e-7)
        assert returns.timestamps.tolist() == [0, 60]

    def test_single_return_is_too_short(self, price_series):
        """Тест: одна доходность - ряд слишком короткий."""
        calendar = SessionCalendar((date(1970, 1, 1),), (0,), (1,))

        with pytest.raises(InsufficientLengthError):
            log_returns(price_series(calendar, [100.0, 110.0]), 1)

    def test_exponential_prices(self, price_series, short_calendar):
        """Тест: p_i = exp(0.01 i) дает доходности 0.01."""
        prices = np.exp(0.01 * np.arange(5))

        returns = log_returns(price_series(short_calendar, prices), 1)

        np.testing.assert_allclose(returns.values, 0.01, atol=1e-12)

    def test_lag_must_be_multiple_of_step(self, price_series):
        """Тест: лаг не кратен шагу сетки."""
        calendar = SessionCalendar((date(1970, 1, 1),), (0,), (20,), step_minutes=5)

        with pytest.raises(LagError):
            log_returns(price_series(calendar, 100.0), 7)

    def test_intervals_do_not_overlap(self, price_series):
        """Тест: интервалы соседних доходностей примыкают и не перекрываются."""
        calendar = SessionCalendar((date(1970, 1, 1),), (0,), (10,))
        prices = np.exp(np.arange(11) ** 2 / 100)

        returns = log_returns(price_series(calendar, prices), 3)

        assert returns.timestamps.tolist() == [0, 180, 360]
        log_prices = np.log(prices)
        np.testing.assert_allclose(returns.values, log_prices[[3, 6, 9]] - log_prices[[0, 3, 6]], atol=1e-15)

    def test_session_crossing_intervals_skipped(self, price_series, three_sessions):
        """Тест: интервалы через границу сессии по умолчанию пропускаются."""
        prices = np.linspace(100.0, 120.0, 15)

        returns = log_returns(price_series(three_sessions, prices), 3)

        # Интервалы часов [0,3) и [9,12); [3,6) и [6,9) пересекают ночь
        assert returns.T == 2
        assert returns.timestamps.tolist() == [0, 2 * 86_400 + 60]

    def test_cross_session_excludes_overnight_jump(self, price_series, three_sessions):
        """Тест: доходность через ночь равна сумме внутридневных частей."""
        prices = np.array([100, 101, 102, 103, 104, 150, 151, 152, 153, 154, 50, 51, 52, 53, 54], dtype=float)
        log_prices = np.log(prices)

        returns = log_returns(price_series(three_sessions, prices), 3, cross_session=True)

        assert returns.T == 4
        crossing = (log_prices[4] - log_prices[3]) + (log_prices[7] - log_prices[5])
        np.testing.assert_allclose(returns.values[1], crossing, atol=1e-14)

    def test_scale_invariance(self, price_series, week_calendar):
        """Тест: умножение цен на константу не меняет доходности."""
        prices = 100.0 * np.exp(np.cumsum(np.random.default_rng(3).normal(0, 1e-3, week_calendar.grid.timestamps.size)))

        returns = log_returns(price_series(week_calendar, prices), 5)
        scaled = log_returns(price_series(week_calendar, 7.0 * prices), 5)

        np.testing.assert_allclose(scaled.values, returns.values, atol=1e-12)

    def test_cumulative_returns_rebuild_price_ratio(self, price_series):
        """Тест: сумма доходностей одной сессии - логарифм отношения цен концов."""
        calendar = SessionCalendar((date(1970, 1, 1),), (0,), (30,))
        prices = 50.0 * np.exp(np.cumsum(np.random.default_rng(5).normal(0, 1e-2, 31)))

        returns = log_returns(price_series(calendar, prices), 1)

        np.testing.assert_allclose(np.exp(np.cumsum(returns.values)), prices[1:] / prices[0], rtol=1e-12)


@pytest.mark.unit
class TestNormalize:
    """Тесты нормировки к нулевому среднему и единичной дисперсии."""

    def test_small_example(self):
        """Тест: [1, 2, 3] -> [-1, 0, 1]."""
        np.testing.assert_allclose(normalize_values([1.0, 2.0, 3.0], 'AAA'), [-1.0, 0.0, 1.0], atol=1e-15)

    def test_moments(self):
        """Тест: среднее 0 и выборочная дисперсия 1."""
        values = normalize_values(np.random.default_rng(1).normal(3.0, 2.0, 1_000), 'AAA')

        assert abs(values.mean()) < 1e-12
        assert abs(values.var(ddof=1) - 1.0) < 1e-12

    def test_idempotent(self):
        """Тест: повторная нормировка ничего не меняет."""
        series = normalize(ReturnSeries('AAA', 1, [0.3, -1.2, 2.5, 0.1], [0, 60, 120, 180]))

        again = normalize(series)

        assert again.normalized
        np.testing.assert_allclose(again.values, series.values, atol=1e-15)

    def test_constant_series_rejected(self):
        """Тест: ряд с нулевой дисперсией нельзя нормировать."""
        with pytest.raises(DegenerateSeriesError) as exc_info:
            normalize_values([5.0, 5.0, 5.0], 'AAA')

        assert exc_info.value.stock_id == 'AAA'


@pytest.mark.unit
class TestAssemblePanel:
    """Тесты сборки матрицы M по общей сетке."""

    def test_identical_grids(self):
        """Тест: две бумаги на одной сетке дают панель 2 x T."""
        timestamps = np.arange(100) * 60
        panel = assemble_panel([_series('A', timestamps, 1), _series('B', timestamps, 2)], group_id='g')

        assert (panel.N, panel.T) == (2, 100)
        assert panel.Q == 50.0
        assert panel.stock_ids == ('A', 'B')
        assert panel.group_id == 'g'

    def test_grid_intersection(self):
        """Тест: панель строится на пересечении сеток, строки нормированы заново."""
        first = _series('A', np.arange(0, 100) * 60, 1)
        second = _series('B', np.arange(50, 150) * 60, 2)

        panel = assemble_panel([first, second])

        assert panel.timestamps.tolist() == (np.arange(50, 100) * 60).tolist()
        np.testing.assert_allclose(panel.matrix.mean(axis=1), 0.0, atol=1e-12)
        np.testing.assert_allclose(panel.matrix.var(axis=1, ddof=1), 1.0, atol=1e-12)

    def test_too_short_for_group(self):
        """Тест: 30 рядов длины 20 не дают T > N."""
        timestamps = np.arange(20) * 60
        series = [_series(f'S{index}', timestamps, index) for index in range(30)]

        with pytest.raises(InsufficientLengthError):
            assemble_panel(series)

    def test_disjoint_grids(self):
        """Тест: непересекающиеся сетки."""
        with pytest.raises(GridIntersectionError):
            assemble_panel([_series('A', np.arange(10) * 60, 1), _series('B', np.arange(10, 20) * 60, 2)])

    def test_requires_normalized_rows(self):
        """Тест: ненормированный ряд в панель не берется."""
        raw = ReturnSeries('A', 1, [1.0, 2.0, 3.0, 4.0], [0, 60, 120, 180])

        with pytest.raises(InputError, match='не нормированы'):
            assemble_panel([raw])

    def test_rows_must_share_lag(self):
        """Тест: ряды с разными лагами."""
        timestamps = np.arange(10) * 60

        with pytest.raises(LagError):
            assemble_panel([_series('A', timestamps, 1, tau=1), _series('B', timestamps, 2, tau=5)])


@pytest.mark.unit
class TestPanelFile:
    """Тесты двоичного файла панели."""

    def test_write_and_read(self):
        """Тест: прочитанная панель совпадает с записанной."""
        panel = gen_one_factor(4, 50, 0.3, seed=11)

        restored = read_panel(io.BytesIO(write_panel(panel)))

        assert restored.stock_ids == panel.stock_ids
        assert restored.tau == panel.tau
        assert restored.group_id == 'one-factor'
        np.testing.assert_array_equal(restored.matrix, panel.matrix)
        np.testing.assert_array_equal(restored.timestamps, panel.timestamps)

    def test_wrong_magic(self):
        """Тест: файл без заголовка панели."""
        with pytest.raises(PanelFileError):
            read_panel(b'NOTPANEL' + bytes(64))

    def test_truncated_file(self):
        """Тест: обрезанный файл."""
        data = write_panel(gen_one_factor(4, 50, 0.3, seed=11))

        with pytest.raises(PanelFileError):
            read_panel(data[:-8])

    def test_trailing_bytes(self):
        """Тест: лишние байты после матрицы."""
        data = write_panel(gen_one_factor(4, 50, 0.3, seed=11))

        with pytest.raises(PanelFileError, match='лишние'):
            read_panel(data + b'\x00')
