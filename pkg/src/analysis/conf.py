"""
Доступ к настройкам конвейера.

Настройки хранятся в словаре SPECTRA_LAB в settings.py. Объект
spectra_settings возвращает значение из словаря или значение по умолчанию
и сбрасывает кэш при изменении настроек (так же устроен api_settings в DRF).
"""

import os

from django.conf import settings
from django.core.signals import setting_changed

DEFAULTS = {
    'THREADS': os.cpu_count() or 1,
    'GRID_STEP_MINUTES': 1,
    'DEFAULT_LAGS': [10, 20, 40, 60, 120, 180, 240, 360, 480, 660, 900],
    'SATURATION_TOLERANCE': 0.05,
    'JACOBI_TOLERANCE': 1e-14,
    'JACOBI_MAX_SWEEPS': 100,
    'NORMALIZATION_TOLERANCE': 1e-6,
    'LATENT_VOLATILITY': 0.0005,
    'REACTION_TRADES': 20.0,
    'SESSION_OPEN_MINUTE': 600,
    'SESSION_CLOSE_MINUTE': 960,
    'INITIAL_PRICE': 100.0,
    'FLOAT_FORMAT': '%.17g',
}


class SpectraSettings:
    """
    Ленивая обертка над словарем SPECTRA_LAB.

    Пример:
        from analysis.conf import spectra_settings
        spectra_settings.THREADS
    """

    def __init__(self, defaults=None):
        self.defaults = defaults or DEFAULTS
        self._cached_attrs = set()
        self._user_settings = None

    @property
    def user_settings(self):
        if self._user_settings is None:
            self._user_settings = getattr(settings, 'SPECTRA_LAB', {})
        return self._user_settings

    def __getattr__(self, attr):
        if attr not in self.defaults:
            raise AttributeError(f"Неизвестная настройка SPECTRA_LAB: '{attr}'")

        try:
            value = self.user_settings[attr]
        except KeyError:
            value = self.defaults[attr]

        self._cached_attrs.add(attr)
        setattr(self, attr, value)
        return value

    def reload(self):
        for attr in self._cached_attrs:
            delattr(self, attr)
        self._cached_attrs.clear()
        self._user_settings = None


spectra_settings = SpectraSettings(DEFAULTS)


def reload_spectra_settings(*args, **kwargs):
    if kwargs['setting'] == 'SPECTRA_LAB':
        spectra_settings.reload()


setting_changed.connect(reload_spectra_settings)
