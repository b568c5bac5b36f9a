"""
Корреляционная матрица, ее собственные значения и удаление рыночной моды.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .conf import spectra_settings
from .exceptions import ConvergenceError, DegenerateModeError, InputError, NormalizationIntegrityError
from .returns import ReturnPanel, normalize_values
from .utils import readonly_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Матрица C порядка N_k вместе с параметрами панели, из которой она построена."""

    values: np.ndarray
    tau: int | None = None
    T: int | None = None
    group_id: str | None = None
    stock_ids: tuple[str, ...] = ()

    def __post_init__(self):
        values = readonly_array(self.values, np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InputError(f'Корреляционная матрица должна быть квадратной, получена форма {values.shape}')
        if not np.array_equal(values, values.T):
            raise InputError('Корреляционная матрица должна быть симметричной')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'stock_ids', tuple(self.stock_ids))

    @property
    def order(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """
    Собственные значения по убыванию и собственные векторы (столбцы).

    Знак каждого вектора выбран так, что сумма компонент неотрицательна.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    trace: float
    sweeps: int = 0
    tau: int | None = None
    T: int | None = None
    group_id: str | None = None
    stock_ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'eigenvalues', readonly_array(self.eigenvalues, np.float64))
        object.__setattr__(self, 'eigenvectors', readonly_array(self.eigenvectors, np.float64))
        object.__setattr__(self, 'stock_ids', tuple(self.stock_ids))

    @property
    def order(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    def vector(self, j: int) -> np.ndarray:
        """Вектор v^j, нумерация с единицы как у собственных значений."""
        return self.eigenvectors[:, j - 1]

    def participation_ratio(self, j: int = 1) -> float:
        """Обратное отношение участия sum(v_a^4): 1/N для делокализованного вектора, 1 для локализованного."""
        return float(np.sum(self.vector(j) ** 4))


def correlation_matrix(panel: ReturnPanel) -> CorrelationMatrix:
    """
    C = M M^T / (T - 1).

    Строки M нормированы с делителем T-1, поэтому диагональ равна единице.
    Симметрия обеспечивается усреднением C и C^T.

    Raises:
        NormalizationIntegrityError: диагональ отличается от 1 больше допуска
    """
    matrix = panel.matrix
    values = matrix @ matrix.T / (panel.T - 1)
    values = (values + values.T) / 2

    deviation = float(np.max(np.abs(np.diag(values) - 1.0)))
    if deviation > spectra_settings.NORMALIZATION_TOLERANCE:
        raise NormalizationIntegrityError(
            f'Диагональ корреляционной матрицы отличается от 1 на {deviation:.3e}: строки панели не нормированы'
        )

    return CorrelationMatrix(values, tau=panel.tau, T=panel.T, group_id=panel.group_id, stock_ids=panel.stock_ids)


def _off_diagonal_norm(a: np.ndarray) -> float:
    return math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Вращение Якоби, обнуляющее a[p, q]; a и v изменяются на месте."""
    apq = a[p, q]
    difference = a[q, q] - a[p, p]

    if abs(apq) < abs(difference) * 1.0e-36:
        t = apq / difference
    else:
        theta = difference / (2.0 * apq)
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    ap, aq = a[:, p].copy(), a[:, q].copy()
    a[:, p] = c * ap - s * aq
    a[:, q] = s * ap + c * aq

    ap, aq = a[p, :].copy(), a[q, :].copy()
    a[p, :] = c * ap - s * aq
    a[q, :] = s * ap + c * aq
    a[p, q] = a[q, p] = 0.0

    vp, vq = v[:, p].copy(), v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def jacobi_eigen(matrix: np.ndarray, tolerance: float | None = None, max_sweeps: int | None = None):
    """
    Циклический метод Якоби для симметричной матрицы.

    Проходы по всем парам (p, q), p < q, повторяются, пока норма
    Фробениуса внедиагональной части больше tolerance * ||A||_F.

    Returns:
        (eigenvalues, eigenvectors, sweeps) без сортировки

    Raises:
        ConvergenceError: не сошелся за max_sweeps проходов
    """
    tolerance = spectra_settings.JACOBI_TOLERANCE if tolerance is None else tolerance
    max_sweeps = spectra_settings.JACOBI_MAX_SWEEPS if max_sweeps is None else max_sweeps

    a = np.array(matrix, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    target = tolerance * float(np.linalg.norm(a, 'fro'))

    sweeps = 0
    off_norm = _off_diagonal_norm(a)
    while off_norm > target:
        if sweeps == max_sweeps:
            raise ConvergenceError(sweeps, off_norm, target)
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)
        sweeps += 1
        off_norm = _off_diagonal_norm(a)

    return np.diag(a).copy(), v, sweeps


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Сумма компонент каждого вектора неотрицательна; при нулевой сумме первая ненулевая компонента положительна."""
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        column = vectors[:, j]
        total = column.sum()
        if abs(total) > 1e-12:
            negative = total < 0
        else:
            nonzero = np.flatnonzero(np.abs(column) > 1e-12)
            negative = nonzero.size > 0 and column[nonzero[0]] < 0
        if negative:
            vectors[:, j] = -column
    return vectors


def eigendecompose(
    matrix: CorrelationMatrix | np.ndarray,
    tolerance: float | None = None,
    max_sweeps: int | None = None,
) -> EigenSystem:
    """
    Полный спектр C v^j = lambda_j v^j, собственные значения по убыванию.

    Принимает CorrelationMatrix или произвольную симметричную матрицу.
    """
    if not isinstance(matrix, CorrelationMatrix):
        matrix = CorrelationMatrix(matrix)

    eigenvalues, eigenvectors, sweeps = jacobi_eigen(matrix.values, tolerance, max_sweeps)
    order = np.argsort(-eigenvalues, kind='stable')

    logger.debug('Якоби: N=%d, проходов %d', matrix.order, sweeps)
    return EigenSystem(
        eigenvalues=eigenvalues[order],
        eigenvectors=_orient(eigenvectors[:, order]),
        trace=float(np.trace(matrix.values)),
        sweeps=sweeps,
        tau=matrix.tau,
        T=matrix.T,
        group_id=matrix.group_id,
        stock_ids=matrix.stock_ids,
    )


def spectrum(panel: ReturnPanel) -> EigenSystem:
    return eigendecompose(correlation_matrix(panel))


def remove_market_mode(panel: ReturnPanel, eigensystem: EigenSystem) -> ReturnPanel:
    """
    Удаляет из сигналов рыночную моду.

    Рыночный сигнал z(t) = sum_a v1_a G_a(t); каждая строка заменяется
    остатком регрессии на z (наклон <G_a, z>/<z, z>) и нормируется заново.

    Raises:
        DegenerateModeError: z или остаток строки имеет нулевую дисперсию
    """
    if eigensystem.order != panel.N:
        raise InputError(f'Спектр порядка {eigensystem.order} не соответствует панели из {panel.N} строк')

    matrix = panel.matrix
    market = eigensystem.vector(1) @ matrix
    energy = float(market @ market)
    if energy <= 1e-20 * panel.T:
        raise DegenerateModeError(f'Группа {panel.group_id}: рыночный сигнал имеет нулевую дисперсию')

    slopes = matrix @ market / energy
    residuals = matrix - np.outer(slopes, market)

    row_norms = np.linalg.norm(matrix, axis=1)
    residual_norms = np.linalg.norm(residuals, axis=1)
    degenerate = [panel.stock_ids[i] for i in np.flatnonzero(residual_norms <= 1e-10 * row_norms)]
    if degenerate:
        raise DegenerateModeError(
            f'Группа {panel.group_id}: после удаления рыночной моды у рядов {", ".join(degenerate)} '
            'не осталось дисперсии'
        )

    rows = [normalize_values(row, stock_id) for row, stock_id in zip(residuals, panel.stock_ids)]
    return replace(panel, matrix=np.vstack(rows))
