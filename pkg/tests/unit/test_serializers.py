"""
Юнит-тесты сериализаторов конфигурации и отчетов, файла конфигурации и настроек.
"""

from pathlib import Path

import pytest

from analysis.conf import spectra_settings
from analysis.config import RunConfig, SynthRun, read_config_file
from analysis.exceptions import InputError
from analysis.pipeline import compare_market_mode
from analysis.serializers import (
    MarketModeReportSerializer,
    RunConfigSerializer,
    SpectrumReportSerializer,
    SynthConfigSerializer,
)
from analysis.synth import gen_one_factor


@pytest.fixture
def inputs(tmp_path):
    """
    Фикстура для тиковой тройки: каталог тиков, календарь и файл групп.

    Returns:
        dict: Пути в виде строк, как их передает командная строка
    """
    ticks = tmp_path / 'ticks'
    ticks.mkdir()
    calendar = tmp_path / 'calendar.csv'
    calendar.write_text('2024-01-02,600,960\n', encoding='utf-8')
    groups = tmp_path / 'groups.txt'
    groups.write_text('AAA\n', encoding='utf-8')
    return {'ticks': str(ticks), 'calendar': str(calendar), 'groups': str(groups), 'out': str(tmp_path / 'out')}


@pytest.mark.unit
class TestRunConfigSerializer:
    """Тесты проверки конфигурации команд конвейера."""

    def test_analyze_config(self, inputs):
        """Тест: корректная конфигурация analyze превращается в RunConfig."""
        serializer = RunConfigSerializer(data={**inputs, 'command': 'analyze', 'tau': 10})

        assert serializer.is_valid(), serializer.errors
        config = serializer.save()

        assert isinstance(config, RunConfig)
        assert config.tau == 10
        assert config.groups == Path(inputs['groups'])
        assert not config.uses_panel
        assert config.saturation_tol == 0.05

    def test_missing_group_file_names_path(self, inputs, tmp_path):
        """Тест: ошибка для отсутствующего файла групп называет путь."""
        missing = str(tmp_path / 'nope.txt')
        serializer = RunConfigSerializer(data={**inputs, 'groups': missing, 'command': 'analyze', 'tau': 10})

        assert not serializer.is_valid()
        assert missing in str(serializer.errors['groups'][0])

    def test_tau_required_for_analyze(self, inputs):
        """Тест: analyze без лага."""
        serializer = RunConfigSerializer(data={**inputs, 'command': 'analyze'})

        assert not serializer.is_valid()
        assert 'tau' in serializer.errors

    def test_triple_required_without_panel(self, tmp_path):
        """Тест: без панели нужны тики, календарь и группы."""
        serializer = RunConfigSerializer(data={'command': 'analyze', 'tau': 10, 'out': str(tmp_path)})

        assert not serializer.is_valid()
        assert set(serializer.errors) == {'ticks', 'calendar', 'groups'}

    def test_panel_excludes_ticks(self, inputs, tmp_path):
        """Тест: панель и тики одновременно."""
        panel = tmp_path / 'panel.bin'
        panel.write_bytes(b'SPLPANEL')
        serializer = RunConfigSerializer(data={**inputs, 'command': 'analyze', 'panel': str(panel)})

        assert not serializer.is_valid()
        assert 'panel' in serializer.errors

    def test_epps_default_lags(self, inputs):
        """Тест: epps без --lags берет сетку лагов по умолчанию."""
        serializer = RunConfigSerializer(data={**inputs, 'command': 'epps'})

        assert serializer.is_valid(), serializer.errors
        assert serializer.save().lags == (10, 20, 40, 60, 120, 180, 240, 360, 480, 660, 900)

    def test_lags_from_comma_separated_string(self, inputs):
        """Тест: лаги строкой через запятую, как во флаге --lags."""
        serializer = RunConfigSerializer(data={**inputs, 'command': 'epps', 'lags': '10, 60,360'})

        assert serializer.is_valid(), serializer.errors
        assert serializer.save().lags == (10, 60, 360)

    def test_empty_lag_list(self, inputs):
        """Тест: пустой список лагов для epps."""
        serializer = RunConfigSerializer(data={**inputs, 'command': 'epps', 'lags': []})

        assert not serializer.is_valid()
        assert 'lags' in serializer.errors

    @pytest.mark.parametrize('value', [0.0, 1.0, -0.1])
    def test_saturation_tolerance_range(self, inputs, value):
        """Тест: допуск насыщения вне (0, 1)."""
        serializer = RunConfigSerializer(data={**inputs, 'command': 'epps', 'saturation_tol': value})

        assert not serializer.is_valid()
        assert 'saturation_tol' in serializer.errors


@pytest.mark.unit
class TestSynthConfigSerializer:
    """Тесты параметров команды synth."""

    def test_async_defaults(self, tmp_path):
        """Тест значений по умолчанию асинхронного рынка."""
        serializer = SynthConfigSerializer(data={'model': 'async', 'n': 10, 'out': str(tmp_path)})

        assert serializer.is_valid(), serializer.errors
        run = serializer.save()

        assert isinstance(run, SynthRun)
        assert (run.seed, run.rho, run.sessions, run.intensities) == (0, 0.0, 250, (0.2,))
        assert run.synchronous is False

    def test_intensities_string(self, tmp_path):
        """Тест: частоты через запятую."""
        serializer = SynthConfigSerializer(data={
            'model': 'async', 'n': 10, 'intensities': '1.0,0.1', 'out': str(tmp_path),
        })

        assert serializer.is_valid(), serializer.errors
        assert serializer.save().intensities == (1.0, 0.1)

    def test_rho_out_of_range(self, tmp_path):
        """Тест: rho = 1.2 не проходит проверку."""
        serializer = SynthConfigSerializer(data={
            'model': 'one-factor', 'n': 10, 't': 100, 'rho': 1.2, 'out': str(tmp_path),
        })

        assert not serializer.is_valid()
        assert '1.2' in str(serializer.errors['rho'][0])

    def test_panel_models_need_long_series(self, tmp_path):
        """Тест: для wishart нужна длина T > N."""
        serializer = SynthConfigSerializer(data={'model': 'wishart', 'n': 10, 't': 10, 'out': str(tmp_path)})

        assert not serializer.is_valid()
        assert 't' in serializer.errors

    def test_seed_range(self, tmp_path):
        """Тест: seed >= 2^64."""
        serializer = SynthConfigSerializer(data={
            'model': 'wishart', 'n': 2, 't': 10, 'seed': 2 ** 64, 'out': str(tmp_path),
        })

        assert not serializer.is_valid()
        assert 'seed' in serializer.errors


@pytest.mark.unit
class TestReportSerializers:
    """Тесты выходных сериализаторов."""

    def test_market_mode_report(self):
        """Тест: сравнение до и после удаления моды с отчетами обоих спектров."""
        comparison = compare_market_mode(gen_one_factor(5, 300, 0.4, seed=4))

        data = MarketModeReportSerializer(comparison).data

        assert data['group_id'] == 'one-factor'
        assert data['before']['N'] == 5
        assert data['after']['N'] == 4
        assert data['after']['null_modes'] == 1
        assert data['lambda1_shift'] == pytest.approx(comparison.lambda1_shift)
        assert data['within_fraction_after'] == comparison.after.report.within_fraction

    def test_spectrum_report_fields(self):
        """Тест полей отчета о спектре."""
        report = compare_market_mode(gen_one_factor(5, 300, 0.4, seed=4)).before.report

        data = SpectrumReportSerializer(report).data

        assert data['tau_minutes'] == 1
        assert data['T'] == 300
        assert data['Q'] == 60.0
        assert data['counts'] == report.counts
        assert len(data['eigenvalues']) == 5
        assert data['lambda_max'] == report.bounds.lambda_max


@pytest.mark.unit
class TestConfigFile:
    """Тесты YAML-файла конфигурации."""

    def test_dashed_keys(self, tmp_path):
        """Тест: ключи через дефис, как флаги."""
        path = tmp_path / 'run.yaml'
        path.write_text('tau: 10\nsaturation-tol: 0.02\nlags: [10, 20]\n', encoding='utf-8')

        assert read_config_file(path) == {'tau': 10, 'saturation_tol': 0.02, 'lags': [10, 20]}

    def test_empty_file(self, tmp_path):
        """Тест: пустой файл - пустая конфигурация."""
        path = tmp_path / 'run.yaml'
        path.write_text('', encoding='utf-8')

        assert read_config_file(path) == {}

    @pytest.mark.parametrize('content', ['- just\n- a list\n', 'tau: [10\n'])
    def test_invalid_file(self, tmp_path, content):
        """Тест: файл не словарь или не YAML."""
        path = tmp_path / 'run.yaml'
        path.write_text(content, encoding='utf-8')

        with pytest.raises(InputError):
            read_config_file(path)

    def test_missing_file(self, tmp_path):
        """Тест: файла нет."""
        with pytest.raises(InputError, match='Не удалось прочитать'):
            read_config_file(tmp_path / 'missing.yaml')


@pytest.mark.unit
class TestSpectraSettings:
    """Тесты доступа к настройкам SPECTRA_LAB."""

    def test_override_is_visible(self, settings):
        """Тест: изменение настроек сбрасывает кэш."""
        settings.SPECTRA_LAB = {**settings.SPECTRA_LAB, 'JACOBI_MAX_SWEEPS': 7}

        assert spectra_settings.JACOBI_MAX_SWEEPS == 7

    def test_default_value(self, settings):
        """Тест: отсутствующий ключ берется из значений по умолчанию."""
        settings.SPECTRA_LAB = {}

        assert spectra_settings.FLOAT_FORMAT == '%.17g'

    def test_unknown_setting(self):
        """Тест: неизвестная настройка."""
        with pytest.raises(AttributeError):
            spectra_settings.NO_SUCH_SETTING
