"""
SVG-графики: спектр с полосой случайных матриц, lambda_1/trace по группам, кривые Эппса.

Используется объектный API matplotlib (Figure без pyplot), поэтому
графики можно строить из любого потока без глобального состояния.
"""

import io
from typing import Sequence

import matplotlib
from matplotlib.figure import Figure

from .epps import EppsCurve
from .rmt import SpectrumReport

SVG_RC = {
    'svg.hashsalt': 'spectra-lab',
    'svg.fonttype': 'none',
}


def figure_to_svg(figure: Figure) -> bytes:
    """SVG без даты в метаданных и со стабильными идентификаторами элементов."""
    buffer = io.BytesIO()
    with matplotlib.rc_context(SVG_RC):
        figure.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue()


def spectrum_figure(report: SpectrumReport) -> Figure:
    """Собственные значения вертикальными линиями, полоса [lambda_min, lambda_max] закрашена."""
    figure = Figure(figsize=(8, 3))
    ax = figure.add_subplot()

    ax.axvspan(report.bounds.lambda_min, report.bounds.lambda_max, color='tab:gray', alpha=0.3, label='RMT')
    ax.vlines(report.eigenvalues, 0.0, 1.0, colors='tab:blue', linewidth=1.0, label='lambda_j')

    ax.set_xlim(0.0, max(report.lambda1, report.bounds.lambda_max) * 1.05)
    ax.set_ylim(0.0, 1.1)
    ax.set_yticks([])
    ax.set_xlabel('lambda')
    ax.set_title(f'{report.group_id}: tau = {report.tau} min, N = {report.n}, Q = {report.q:.4g}')
    ax.legend(loc='upper right')
    figure.tight_layout()
    return figure


def normalized_lambda1_figure(reports: Sequence[SpectrumReport]) -> Figure:
    figure = Figure(figsize=(6, 4))
    ax = figure.add_subplot()

    labels = [str(report.group_id) for report in reports]
    ax.bar(labels, [report.lambda1_normalized for report in reports], color='tab:blue')
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel('lambda_1 / trace C')
    ax.set_title('lambda_1 / trace C by group')
    figure.tight_layout()
    return figure


def epps_figure(curves: Sequence[EppsCurve]) -> Figure:
    """lambda_1(tau) по группам; пунктир того же цвета - lambda_max(tau)."""
    figure = Figure(figsize=(8, 5))
    ax = figure.add_subplot()

    for index, curve in enumerate(curves):
        color = f'C{index % 10}'
        taus = curve.taus
        ax.plot(taus, curve.lambda1, marker='o', color=color, label=curve.group_id)
        ax.plot(taus, [point.lambda_max for point in curve.points], linestyle='--', color=color, linewidth=0.8)

    ax.set_xscale('log')
    ax.set_xlabel('tau, min')
    ax.set_ylabel('lambda_1')
    ax.legend(loc='best')
    figure.tight_layout()
    return figure
