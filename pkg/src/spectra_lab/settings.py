"""
Django настройки для проекта spectra_lab.

Проект не поднимает веб-сервер и не использует базу данных: Django служит
каркасом для конфигурации, логирования и команд управления (CLI), которые
запускают конвейер анализа корреляционных матриц.
"""

import os
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from dotenv import load_dotenv

# Загружаем переменные окружения из .env файла
if os.name == "nt":
    for locale_var in ("LC_ALL", "LC_MESSAGES", "LANG"):
        os.environ.setdefault(locale_var, "C")

load_dotenv(encoding="utf-8-sig")


def _normalize_env_value(value: str) -> str:
    """Удаляет невидимые символы, которые часто появляются при копировании."""

    # str.strip() не убирает zero-width символы и BOM
    junk_chars = {"\ufeff", "\u200b", "\u200e", "\u200f", "\u00a0"}
    for junk in junk_chars:
        value = value.replace(junk, "")
    return value.strip()


def get_env_setting(name: str, default: str = "") -> str:
    """Возвращает очищенное строковое значение переменной окружения."""

    raw_value = os.getenv(name, default)
    return _normalize_env_value(raw_value if raw_value is not None else default)


def get_env_int(name: str, default: int) -> int:
    """
    Целое положительное значение переменной окружения.

    Raises:
        ImproperlyConfigured: значение не является целым числом >= 1
    """

    raw_value = get_env_setting(name, "")
    if not raw_value:
        return default
    try:
        value = int(raw_value)
    except ValueError:
        raise ImproperlyConfigured(f"{name} должна быть целым числом, получено {raw_value!r}") from None
    if value < 1:
        raise ImproperlyConfigured(f"{name} должна быть не меньше 1, получено {value}")
    return value


# Определяем базовую директорию проекта (src/)
BASE_DIR = Path(__file__).resolve().parent.parent

# Ключ нужен Django только формально: криптография в проекте не используется
SECRET_KEY = get_env_setting('SECRET_KEY', 'spectra-lab-local-key')

DEBUG = get_env_setting('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# ПРИЛОЖЕНИЯ
# ==========

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',  # DRF импортирует модели пользователей при настройке
    'rest_framework',  # Сериализаторы для валидации конфигурации и JSON-отчетов
    'analysis',  # Конвейер анализа: тики -> доходности -> спектры -> RMT
]

# База данных не используется: все артефакты пишутся в файлы
DATABASES = {}

USE_I18N = False
USE_TZ = False
TIME_ZONE = 'UTC'


# НАСТРОЙКИ DJANGO REST FRAMEWORK
# ================================

REST_FRAMEWORK = {
    # Отчеты должны быть побайтно воспроизводимы: без NaN и с отступами
    'STRICT_JSON': True,
    'UNICODE_JSON': True,
    'COMPACT_JSON': False,
    'UNAUTHENTICATED_USER': None,
}


# НАСТРОЙКИ КОНВЕЙЕРА
# ===================

SPECTRA_LAB = {
    # Ограничение параллелизма (переменная окружения SPECTRA_LAB_THREADS)
    'THREADS': get_env_int('SPECTRA_LAB_THREADS', os.cpu_count() or 1),

    # Шаг сетки цен внутри торговой сессии, минуты
    'GRID_STEP_MINUTES': get_env_int('SPECTRA_LAB_GRID_STEP', 1),

    # Сетка лагов по умолчанию для кривой Эппса, минуты (10 < tau < 900)
    'DEFAULT_LAGS': [10, 20, 40, 60, 120, 180, 240, 360, 480, 660, 900],

    # Относительная ширина полосы насыщения
    'SATURATION_TOLERANCE': 0.05,

    # Критерий остановки метода Якоби: ||offdiag||_F <= tol * ||C||_F
    'JACOBI_TOLERANCE': 1e-14,
    'JACOBI_MAX_SWEEPS': 100,

    # Допустимое отклонение диагонали C от единицы
    'NORMALIZATION_TOLERANCE': 1e-6,

    # Параметры синтетического рынка
    'LATENT_VOLATILITY': 0.0005,
    'REACTION_TRADES': 20.0,
    'SESSION_OPEN_MINUTE': 600,  # 10:00
    'SESSION_CLOSE_MINUTE': 960,  # 16:00, т.е. сессия 360 минут
    'INITIAL_PRICE': 100.0,

    # 17 значащих цифр в CSV
    'FLOAT_FORMAT': '%.17g',
}


# ЛОГИРОВАНИЕ
# ===========

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'analysis': {
            'handlers': ['console'],
            'level': get_env_setting('SPECTRA_LAB_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
