"""
Команда synth: синтетические данные в форматах, которые читают остальные команды.

    --model wishart|one-factor  -> panel.bin и panel.csv
    --model async               -> ticks/, calendar.csv, groups.txt
"""

from analysis.exports import write_panel_csv
from analysis.management.base import SpectraCommand
from analysis.returns import write_panel
from analysis.serializers import SynthConfigSerializer
from analysis.synth import SynthConfig, gen_async_market, gen_one_factor, gen_wishart_noise, write_market


class Command(SpectraCommand):
    help = 'Генерирует синтетические панели доходностей или тики асинхронного рынка'
    serializer_class = SynthConfigSerializer
    config_keys = (
        'out', 'seed', 'model', 'n', 't', 'rho', 'sessions', 'intensities', 'synchronous', 'reaction_trades',
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--seed', type=int, help='Начальное значение генератора (0 <= seed < 2^64)')
        parser.add_argument('--model', choices=['wishart', 'one-factor', 'async'], help='Генератор')
        parser.add_argument('--n', type=int, help='Число бумаг N')
        parser.add_argument('--t', type=int, help='Длина рядов T (wishart, one-factor)')
        parser.add_argument('--rho', type=float, help='Корреляция общего фактора')
        parser.add_argument('--sessions', type=int, help='Число торговых сессий (async)')
        parser.add_argument('--intensities', help='Частоты сделок по классам через запятую, сделок в минуту')
        parser.add_argument(
            '--synchronous', action='store_true', default=None, help='Сделка в каждой точке сетки (async)'
        )
        parser.add_argument('--reaction-trades', type=float, help='Сделок до полного учета новости (async)')

    def run(self, config, writer):
        if config.model == 'async':
            market = gen_async_market(SynthConfig(
                n_stocks=config.n,
                rho=config.rho,
                seed=config.seed,
                intensities=config.intensities,
                sessions=config.sessions,
                synchronous=config.synchronous,
                reaction_trades=config.reaction_trades,
            ))
            write_market(market, writer)
        else:
            if config.model == 'wishart':
                panel = gen_wishart_noise(config.n, config.t, config.seed)
            else:
                panel = gen_one_factor(config.n, config.t, config.rho, config.seed)
            writer.write_bytes('panel.bin', write_panel(panel))
            write_panel_csv(writer, 'panel.csv', panel)

        self.report_written(writer)
