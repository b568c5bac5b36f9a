"""
Команда analyze: спектр корреляционной матрицы групп при одном лаге.

Пример:
    spectra-lab analyze --ticks data/ticks --calendar data/calendar.csv \
        --groups data/groups.txt --tau 10 --out results/
"""

from analysis.exports import write_eigenvector_csv, write_spectrum_csv
from analysis.management.base import PipelineCommand
from analysis.pipeline import analyze_group, analyze_panel
from analysis.plots import normalized_lambda1_figure, spectrum_figure
from analysis.returns import read_panel
from analysis.serializers import SpectrumReportSerializer


class Command(PipelineCommand):
    help = 'Спектр корреляционной матрицы групп и сравнение с полосой случайных матриц'
    command_name = 'analyze'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--tau', type=int, help='Лаг доходностей, минуты')

    def analyses(self, config):
        if config.uses_panel:
            panel = read_panel(config.panel.read_bytes())
            if config.tau is not None and config.tau != panel.tau:
                self.stderr.write(f'Лаг панели {panel.tau} мин, значение --tau {config.tau} не используется')
            yield panel.group_id or 'panel', analyze_panel(panel)
            return

        market = self.load_market(config)
        for spec in market.specs:
            yield spec.group_id, analyze_group(market.prices, spec, config.tau, market.calendar)

    def run(self, config, writer):
        reports = []
        for group_id, analysis in self.analyses(config):
            report = analysis.report
            write_spectrum_csv(writer, f'spectrum_{group_id}.csv', analysis.eigensystem)
            write_eigenvector_csv(writer, f'eigenvectors_{group_id}.csv', analysis.eigensystem)
            writer.write_json(f'report_{group_id}.json', SpectrumReportSerializer(report).data)
            writer.write_svg(f'spectrum_{group_id}.svg', spectrum_figure(report))
            reports.append(report)

            self.stdout.write(
                f'{group_id}: N={report.n}, T={report.t}, lambda_1={report.lambda1:.6g}, '
                f'lambda_max={report.bounds.lambda_max:.6g}, '
                f'отталкивание: {"да" if report.repulsion else "нет"}'
            )

        if len(reports) > 1:
            writer.write_svg('lambda1_normalized.svg', normalized_lambda1_figure(reports))
        self.report_written(writer)
