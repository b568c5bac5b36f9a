"""
Общая основа команд конвейера.

Команда собирает конфигурацию из YAML-файла и флагов, проверяет ее
сериализатором и переводит исключения конвейера в CommandError с кодом
завершения: 2 - ошибка входных данных, 1 - численный сбой.
"""

import logging
from dataclasses import dataclass

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from analysis.config import RunConfig, read_config_file
from analysis.exceptions import InputError, SpectraLabError
from analysis.exports import ArtifactWriter
from analysis.groups import GroupSpec, read_group_file
from analysis.ingest import PriceSeries, SessionCalendar, read_calendar_file, read_tick_directory, resample
from analysis.serializers import RunConfigSerializer
from analysis.utils import parallel_map

logger = logging.getLogger(__name__)


def format_validation_error(exc: ValidationError) -> str:
    """Одна строка диагностики из ошибок сериализатора."""

    def flatten(detail, prefix=''):
        if isinstance(detail, dict):
            for key, value in detail.items():
                name = '' if key == 'non_field_errors' else f'{key}: '
                yield from flatten(value, prefix + name)
        elif isinstance(detail, list):
            for item in detail:
                yield from flatten(item, prefix)
        else:
            yield f'{prefix}{detail}'

    return '; '.join(flatten(exc.detail))


@dataclass(frozen=True, eq=False)
class LoadedMarket:
    calendar: SessionCalendar
    specs: list[GroupSpec]
    prices: dict[str, PriceSeries]


class SpectraCommand(BaseCommand):
    """Базовая команда: --config, перевод ошибок в коды завершения."""

    serializer_class = None
    config_keys: tuple[str, ...] = ()

    def add_arguments(self, parser):
        parser.add_argument('--config', help='YAML-файл конфигурации; флаги имеют приоритет')
        parser.add_argument('--out', help='Каталог для артефактов')

    def build_config(self, options, extra=None):
        values = read_config_file(options['config']) if options.get('config') else {}
        for key in self.config_keys:
            if options.get(key) is not None:
                values[key] = options[key]
        values.update(extra or {})

        serializer = self.serializer_class(data=values)
        serializer.is_valid(raise_exception=True)
        return serializer.save()

    def handle(self, *args, **options):
        try:
            config = self.build_config(options)
            self.run(config, ArtifactWriter(config.out))
        except ValidationError as exc:
            raise CommandError(format_validation_error(exc), returncode=2) from exc
        except SpectraLabError as exc:
            logger.debug('Команда %s завершилась ошибкой', self.__module__, exc_info=True)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, config, writer: ArtifactWriter):
        raise NotImplementedError

    def report_written(self, writer: ArtifactWriter):
        self.stdout.write(self.style.SUCCESS(f'Записано файлов: {len(writer.written)} в {writer.out_dir}'))


class PipelineCommand(SpectraCommand):
    """Команды, работающие с тиками, календарем и группами или с файлом панели."""

    serializer_class = RunConfigSerializer
    config_keys = (
        'out', 'ticks', 'calendar', 'groups', 'panel', 'group', 'tau', 'lags', 'saturation_tol',
    )
    command_name = None

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--ticks', help='Каталог тиковых файлов (по файлу на бумагу)')
        parser.add_argument('--calendar', help='Файл календаря сессий')
        parser.add_argument('--groups', help='Файл групп')
        parser.add_argument('--panel', help='Двоичный файл панели вместо тиков')
        parser.add_argument('--group', help='Анализировать только эту группу')

    def build_config(self, options, extra=None):
        return super().build_config(options, {'command': self.command_name})

    def load_market(self, config: RunConfig) -> LoadedMarket:
        """Читает календарь, группы и тики нужных бумаг и переводит тики на сетку."""
        calendar = read_calendar_file(config.calendar)
        specs = read_group_file(config.groups)
        if config.group is not None:
            specs = [spec for spec in specs if spec.group_id == config.group]
            if not specs:
                raise InputError(f'Группа {config.group} не найдена в файле {config.groups}')

        stock_ids = list(dict.fromkeys(stock_id for spec in specs for stock_id in spec.stock_ids))
        ticks = read_tick_directory(config.ticks, stock_ids)
        present = [stock_id for stock_id in stock_ids if stock_id in ticks]
        prices = dict(zip(present, parallel_map(lambda stock_id: resample(ticks[stock_id], calendar), present)))

        logger.info('Загружено %d бумаг, %d групп, %d торговых дней', len(prices), len(specs), len(calendar))
        return LoadedMarket(calendar, specs, prices)
