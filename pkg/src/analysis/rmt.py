"""
Границы Марченко-Пастура и классификация спектра относительно полосы случайных матриц.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .spectra import EigenSystem


@dataclass(frozen=True)
class MPBounds:
    """
    Границы спектра случайной корреляционной матрицы:

        lambda_min/max = sigma2 * (1 + 1/Q -/+ 2 * sqrt(1/Q)),  Q = T / N_k.
    """

    q: float
    sigma2: float
    lambda_min: float
    lambda_max: float

    @property
    def width(self) -> float:
        return self.lambda_max - self.lambda_min


def mp_bounds(q: float, sigma2: float = 1.0) -> MPBounds:
    """
    Raises:
        DomainError: Q < 1 или sigma2 <= 0
    """
    q = float(q)
    sigma2 = float(sigma2)
    if not math.isfinite(q) or q < 1.0:
        raise DomainError(f'Формула границ применима при Q = T/N_k >= 1, получено Q={q}')
    if not math.isfinite(sigma2) or sigma2 <= 0.0:
        raise DomainError(f'Дисперсия sigma2 должна быть положительной, получено {sigma2}')

    inverse = 1.0 / q
    root = 2.0 * math.sqrt(inverse)
    # При Q = 1 нижняя граница равна нулю; округление не должно делать ее отрицательной
    lambda_min = max(sigma2 * (1.0 + inverse - root), 0.0)
    lambda_max = sigma2 * (1.0 + inverse + root)
    return MPBounds(q=q, sigma2=sigma2, lambda_min=lambda_min, lambda_max=lambda_max)


@dataclass(frozen=True)
class SpectrumReport:
    """Итог сравнения спектра с полосой: счетчики, lambda_1, отталкивание, отклоняющиеся индексы."""

    group_id: str | None
    tau: int | None
    n: int
    t: int | None
    q: float
    bounds: MPBounds
    eigenvalues: tuple[float, ...]
    below: int
    within: int
    above: int
    lambda1: float
    lambda1_normalized: float
    repulsion: bool
    deviating: tuple[int, ...]
    gap_ratio: float | None
    market_mode_ipr: float
    null_modes: int = 0

    @property
    def counts(self) -> dict[str, int]:
        return {'below': self.below, 'within': self.within, 'above': self.above}

    @property
    def within_fraction(self) -> float:
        return self.within / self.n


def normalized_lambda1(eigensystem: EigenSystem) -> float:
    """lambda_1 / trace(C): доля полной дисперсии, которую несет рыночная мода."""
    if eigensystem.trace <= 0.0:
        raise DomainError(f'След матрицы должен быть положительным, получено {eigensystem.trace}')
    return eigensystem.lambda1 / eigensystem.trace


def classify_spectrum(eigensystem: EigenSystem, bounds: MPBounds, null_modes: int = 0) -> SpectrumReport:
    """
    Делит собственные значения на лежащие ниже, внутри и выше полосы.

    Граница полосы включается в полосу. Отталкивание - строгое
    неравенство lambda_1 > lambda_max без запаса. null_modes наименьших
    собственных значений (удаленные моды, их значения равны нулю) в
    классификации не участвуют.
    """
    if not 0 <= null_modes < eigensystem.order:
        raise DomainError(f'Число удаленных мод {null_modes} вне диапазона [0, {eigensystem.order})')
    eigenvalues = eigensystem.eigenvalues[:eigensystem.order - null_modes]
    below = eigenvalues < bounds.lambda_min
    above = eigenvalues > bounds.lambda_max
    within = ~(below | above)

    lambda1 = eigensystem.lambda1
    lambda2 = float(eigenvalues[1]) if eigenvalues.size > 1 else 0.0

    return SpectrumReport(
        group_id=eigensystem.group_id,
        tau=eigensystem.tau,
        n=int(eigenvalues.size),
        t=eigensystem.T,
        q=bounds.q,
        bounds=bounds,
        eigenvalues=tuple(eigenvalues.tolist()),
        below=int(below.sum()),
        within=int(within.sum()),
        above=int(above.sum()),
        lambda1=lambda1,
        lambda1_normalized=normalized_lambda1(eigensystem),
        repulsion=lambda1 > bounds.lambda_max,
        deviating=tuple(int(index) + 1 for index in np.flatnonzero(~within)),
        gap_ratio=lambda1 / lambda2 if lambda2 > 0.0 else None,
        market_mode_ipr=eigensystem.participation_ratio(1),
        null_modes=null_modes,
    )


def within_band_fraction(report: SpectrumReport) -> float:
    """Доля собственных значений внутри полосы."""
    return report.within_fraction
