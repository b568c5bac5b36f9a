"""
Сериализаторы DRF.

Входные сериализаторы проверяют конфигурацию команд (флаги и YAML-файл)
и возвращают из save() неизменяемые объекты конфигурации. Выходные
сериализаторы превращают отчеты в словари для JSON-артефактов.
"""

from pathlib import Path

from rest_framework import serializers

from .conf import spectra_settings
from .config import RunConfig, SynthRun

MAX_SEED = 2 ** 64 - 1


class LagListField(serializers.ListField):
    """Список лагов: список чисел или строка через запятую ("10,20,40")."""

    child = serializers.IntegerField(min_value=1)

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        elif isinstance(data, int):
            data = [data]
        return super().to_internal_value(data)


class RunConfigSerializer(serializers.Serializer):
    """
    Конфигурация команд analyze, epps и remove-market-mode.

    Вход задается либо тройкой (тики, календарь, группы), либо файлом панели.
    """

    command = serializers.ChoiceField(choices=['analyze', 'epps', 'remove_market_mode'])
    out = serializers.CharField(help_text='Каталог для артефактов')
    ticks = serializers.CharField(required=False, allow_null=True, help_text='Каталог тиковых файлов')
    calendar = serializers.CharField(required=False, allow_null=True, help_text='Файл календаря сессий')
    groups = serializers.CharField(required=False, allow_null=True, help_text='Файл групп')
    panel = serializers.CharField(required=False, allow_null=True, help_text='Двоичный файл панели')
    group = serializers.CharField(required=False, allow_null=True, help_text='Анализировать одну группу')
    tau = serializers.IntegerField(required=False, allow_null=True, min_value=1, help_text='Лаг, минуты')
    lags = LagListField(required=False, allow_null=True, help_text='Лаги кривой Эппса, минуты')
    saturation_tol = serializers.FloatField(required=False, allow_null=True)

    def validate_ticks(self, value):
        if value is not None and not Path(value).is_dir():
            raise serializers.ValidationError(f'Каталог с тиками не найден: {value}')
        return value

    def validate_calendar(self, value):
        if value is not None and not Path(value).is_file():
            raise serializers.ValidationError(f'Файл календаря не найден: {value}')
        return value

    def validate_groups(self, value):
        if value is not None and not Path(value).is_file():
            raise serializers.ValidationError(f'Файл групп не найден: {value}')
        return value

    def validate_panel(self, value):
        if value is not None and not Path(value).is_file():
            raise serializers.ValidationError(f'Файл панели не найден: {value}')
        return value

    def validate_saturation_tol(self, value):
        if value is not None and not 0.0 < value < 1.0:
            raise serializers.ValidationError('Допуск насыщения должен лежать в интервале (0, 1).')
        return value

    def validate(self, attrs):
        """
        Проверяет сочетание параметров.

        - панель и тиковая тройка взаимоисключающие;
        - без панели нужны все три пути: тики, календарь, группы;
        - analyze и remove-market-mode по тикам требуют лаг;
        - epps работает только по тикам, пустой список лагов недопустим.
        """
        command = attrs['command']
        triple = {name: attrs.get(name) for name in ('ticks', 'calendar', 'groups')}

        if attrs.get('panel') is not None:
            given = sorted(name for name, value in triple.items() if value is not None)
            if given:
                raise serializers.ValidationError({
                    'panel': f'Файл панели нельзя задавать вместе с {", ".join("--" + name for name in given)}.'
                })
            if command == 'epps':
                raise serializers.ValidationError({
                    'panel': 'Кривая Эппса строится по тикам: панель содержит доходности только одного лага.'
                })
        else:
            missing = [name for name, value in triple.items() if value is None]
            if missing:
                raise serializers.ValidationError({
                    name: f'Не задан параметр --{name}.' for name in missing
                })
            if command != 'epps' and attrs.get('tau') is None:
                raise serializers.ValidationError({'tau': 'Не задан лаг --tau.'})

        if command == 'epps':
            lags = attrs.get('lags')
            if lags is None:
                lags = list(spectra_settings.DEFAULT_LAGS)
            if not lags:
                raise serializers.ValidationError({'lags': 'Список лагов не может быть пустым.'})
            attrs['lags'] = lags

        if attrs.get('saturation_tol') is None:
            attrs['saturation_tol'] = spectra_settings.SATURATION_TOLERANCE
        return attrs

    def create(self, validated_data):
        paths = {
            name: Path(validated_data[name]) if validated_data.get(name) is not None else None
            for name in ('ticks', 'calendar', 'groups', 'panel')
        }
        return RunConfig(
            command=validated_data['command'],
            out=Path(validated_data['out']),
            group=validated_data.get('group'),
            tau=validated_data.get('tau'),
            lags=tuple(validated_data.get('lags') or ()),
            saturation_tol=validated_data['saturation_tol'],
            **paths,
        )


class SynthConfigSerializer(serializers.Serializer):
    """Параметры генераторов синтетических данных."""

    model = serializers.ChoiceField(choices=['wishart', 'one-factor', 'async'])
    out = serializers.CharField()
    n = serializers.IntegerField(min_value=2, help_text='Число бумаг N')
    t = serializers.IntegerField(required=False, allow_null=True, min_value=2, help_text='Длина рядов T')
    rho = serializers.FloatField(required=False, default=0.0)
    seed = serializers.IntegerField(required=False, default=0, min_value=0, max_value=MAX_SEED)
    sessions = serializers.IntegerField(required=False, default=250, min_value=1)
    intensities = serializers.ListField(
        child=serializers.FloatField(), required=False, default=[0.2], help_text='Сделок в минуту по классам'
    )
    synchronous = serializers.BooleanField(required=False, default=False)
    reaction_trades = serializers.FloatField(required=False, allow_null=True, min_value=0.0)

    def to_internal_value(self, data):
        intensities = data.get('intensities')
        if isinstance(intensities, str):
            data = {**data, 'intensities': [item.strip() for item in intensities.split(',') if item.strip()]}
        return super().to_internal_value(data)

    def validate_rho(self, value):
        if not 0.0 <= value < 1.0:
            raise serializers.ValidationError(f'Корреляция rho должна лежать в [0, 1), получено {value}.')
        return value

    def validate_intensities(self, value):
        if not value:
            raise serializers.ValidationError('Нужна хотя бы одна частота сделок.')
        if any(item <= 0 for item in value):
            raise serializers.ValidationError('Частоты сделок должны быть положительными.')
        return value

    def validate(self, attrs):
        model = attrs['model']
        if model in ('wishart', 'one-factor'):
            t = attrs.get('t')
            if t is None:
                raise serializers.ValidationError({'t': f'Для модели {model} нужна длина рядов --t.'})
            if t <= attrs['n']:
                raise serializers.ValidationError({'t': f'Требуется T > N, получено T={t}, N={attrs["n"]}.'})
        elif len(attrs['intensities']) > attrs['n']:
            raise serializers.ValidationError({'intensities': 'Классов частот больше, чем бумаг.'})
        return attrs

    def create(self, validated_data):
        return SynthRun(
            model=validated_data['model'],
            out=Path(validated_data['out']),
            n=validated_data['n'],
            seed=validated_data['seed'],
            t=validated_data.get('t'),
            rho=validated_data['rho'],
            sessions=validated_data['sessions'],
            intensities=tuple(validated_data['intensities']),
            synchronous=validated_data['synchronous'],
            reaction_trades=validated_data.get('reaction_trades'),
        )


class SpectrumReportSerializer(serializers.Serializer):
    """Отчет о спектре группы для report_<group>.json."""

    group_id = serializers.CharField(allow_null=True)
    tau_minutes = serializers.IntegerField(source='tau', allow_null=True)
    N = serializers.IntegerField(source='n')
    T = serializers.IntegerField(source='t', allow_null=True)
    Q = serializers.FloatField(source='q')
    lambda_min = serializers.FloatField(source='bounds.lambda_min')
    lambda_max = serializers.FloatField(source='bounds.lambda_max')
    eigenvalues = serializers.ListField(child=serializers.FloatField())
    lambda1 = serializers.FloatField()
    lambda1_normalized = serializers.FloatField()
    repulsion = serializers.BooleanField()
    counts = serializers.DictField(child=serializers.IntegerField())
    deviating = serializers.ListField(child=serializers.IntegerField())
    within_fraction = serializers.FloatField()
    gap_ratio = serializers.FloatField(allow_null=True)
    market_mode_ipr = serializers.FloatField()
    null_modes = serializers.IntegerField()


class EppsPointSerializer(serializers.Serializer):
    tau_minutes = serializers.IntegerField(source='tau')
    lambda1 = serializers.FloatField()
    lambda1_normalized = serializers.FloatField()
    lambda_max = serializers.FloatField()
    Q = serializers.FloatField(source='q')
    T_effective = serializers.IntegerField(source='t_effective')


class SaturationSerializer(serializers.Serializer):
    level = serializers.FloatField()
    tau_minutes = serializers.IntegerField(source='tau')


class SkippedLagSerializer(serializers.Serializer):
    tau_minutes = serializers.IntegerField(source='tau')
    reason = serializers.CharField()


class EppsCurveSerializer(serializers.Serializer):
    """Кривая группы с оценкой насыщения (null, если оценки нет)."""

    group_id = serializers.CharField()
    saturation = SaturationSerializer(allow_null=True)
    points = EppsPointSerializer(many=True)
    skipped = SkippedLagSerializer(many=True)


class MarketModeReportSerializer(serializers.Serializer):
    """Сравнение спектра до и после удаления рыночной моды."""

    group_id = serializers.CharField(source='before.report.group_id', allow_null=True)
    tau_minutes = serializers.IntegerField(source='before.report.tau', allow_null=True)
    lambda1_shift = serializers.FloatField()
    within_fraction_before = serializers.FloatField(source='before.report.within_fraction')
    within_fraction_after = serializers.FloatField(source='after.report.within_fraction')
    before = SpectrumReportSerializer(source='before.report')
    after = SpectrumReportSerializer(source='after.report')
