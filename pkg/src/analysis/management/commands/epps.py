"""
Команда epps: кривые lambda_1(tau) по группам и оценка насыщения.
"""

from analysis.epps import epps_curve
from analysis.exports import write_curve_csv
from analysis.management.base import PipelineCommand
from analysis.plots import epps_figure
from analysis.serializers import EppsCurveSerializer


class Command(PipelineCommand):
    help = 'Кривые Эппса: lambda_1 в зависимости от лага для каждой группы'
    command_name = 'epps'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--lags', help='Лаги через запятую, минуты (по умолчанию 10,20,...,900)')
        parser.add_argument('--saturation-tol', type=float, help='Допуск полосы насыщения (доля уровня)')

    def run(self, config, writer):
        market = self.load_market(config)

        curves = []
        for spec in market.specs:
            curve = epps_curve(market.prices, spec, config.lags, market.calendar, config.saturation_tol)
            write_curve_csv(writer, f'epps_{spec.group_id}.csv', curve)
            curves.append(curve)

            if curve.saturation is None:
                saturation = 'насыщение не оценено'
            else:
                saturation = f'насыщение {curve.saturation.level:.6g} при tau >= {curve.saturation.tau} мин'
            self.stdout.write(f'{spec.group_id}: {len(curve.points)} лагов, {saturation}')

        writer.write_svg('epps.svg', epps_figure(curves))
        writer.write_json('epps_saturation.json', EppsCurveSerializer(curves, many=True).data)
        self.report_written(writer)
