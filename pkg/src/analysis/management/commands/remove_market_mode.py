"""
Команда remove-market-mode: спектр до и после удаления рыночной моды.
"""

from analysis.exports import write_spectrum_csv
from analysis.management.base import PipelineCommand
from analysis.pipeline import compare_market_mode, group_panel
from analysis.returns import read_panel
from analysis.serializers import MarketModeReportSerializer


class Command(PipelineCommand):
    help = 'Удаляет моду lambda_1 и сравнивает спектры до и после'
    command_name = 'remove_market_mode'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--tau', type=int, help='Лаг доходностей, минуты')

    def panels(self, config):
        if config.uses_panel:
            panel = read_panel(config.panel.read_bytes())
            yield panel.group_id or 'panel', panel
            return

        market = self.load_market(config)
        for spec in market.specs:
            yield spec.group_id, group_panel(market.prices, spec, config.tau, market.calendar)

    def run(self, config, writer):
        for group_id, panel in self.panels(config):
            comparison = compare_market_mode(panel)
            write_spectrum_csv(writer, f'spectrum_before_{group_id}.csv', comparison.before.eigensystem)
            write_spectrum_csv(writer, f'spectrum_after_{group_id}.csv', comparison.after.eigensystem)
            writer.write_json(f'market_mode_{group_id}.json', MarketModeReportSerializer(comparison).data)

            self.stdout.write(
                f'{group_id}: lambda_1 {comparison.before.report.lambda1:.6g} -> '
                f'{comparison.after.report.lambda1:.6g}, доля внутри полосы '
                f'{comparison.before.report.within_fraction:.3f} -> {comparison.after.report.within_fraction:.3f}'
            )
        self.report_written(writer)
