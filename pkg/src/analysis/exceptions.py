"""
Исключения конвейера анализа.

Каждое исключение несет код завершения для CLI:
    2 - ошибка входных данных или конфигурации (InputError),
    1 - численный сбой конвейера (NumericalError).
"""


class SpectraLabError(Exception):
    """Базовое исключение проекта."""

    exit_code = 1


class InputError(SpectraLabError):
    """Некорректные входные данные, файлы или параметры."""

    exit_code = 2


class NumericalError(SpectraLabError):
    """Численный сбой: нет сходимости, нарушена нормировка и т.п."""

    exit_code = 1


class TickParseError(InputError):
    """Строка тикового файла не разбирается."""

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        super().__init__(f'Строка {line_number}: {reason} ({line!r})')


class PriceRejectedError(InputError):
    """Цена сделки не положительна."""

    def __init__(self, line_number: int, price: float):
        self.line_number = line_number
        self.price = price
        super().__init__(f'Строка {line_number}: цена должна быть положительной, получено {price}')


class EmptySeriesError(InputError):
    pass


class CalendarError(InputError):
    pass


class LagError(InputError):
    pass


class DegenerateSeriesError(InputError):
    """Ряд с нулевой дисперсией нельзя нормировать."""

    def __init__(self, stock_id: str):
        self.stock_id = stock_id
        super().__init__(f'Ряд доходностей {stock_id!r} имеет нулевую дисперсию')


class GridIntersectionError(InputError):
    pass


class InsufficientLengthError(InputError):
    """Слишком короткие ряды: требуется T > N_k."""


class SpliceSpecificationError(InputError):
    pass


class CoverageError(InputError):
    pass


class DomainError(InputError):
    """Параметр вне области определения формулы или генератора."""


class DegenerateModeError(InputError):
    pass


class GroupFileError(InputError):
    pass


class PanelFileError(InputError):
    pass


class ConvergenceError(NumericalError):
    """Метод Якоби не сошелся за отведенное число проходов."""

    def __init__(self, sweeps: int, off_norm: float, target: float):
        self.sweeps = sweeps
        self.off_norm = off_norm
        self.target = target
        super().__init__(
            f'Метод Якоби не сошелся за {sweeps} проходов: '
            f'||offdiag||_F = {off_norm:.3e}, требуется {target:.3e}'
        )


class NormalizationIntegrityError(NumericalError):
    pass


class EppsSweepError(NumericalError):
    """Все лаги кривой Эппса были пропущены."""
