"""
Конфигурация запуска команд.

Значения берутся из YAML-файла (--config) и флагов командной строки;
флаги имеют приоритет. Проверку выполняют сериализаторы из serializers.py.
"""

from dataclasses import dataclass
from pathlib import Path

import yaml

from .exceptions import InputError


@dataclass(frozen=True)
class RunConfig:
    """Параметры команд analyze, epps и remove-market-mode."""

    command: str
    out: Path
    ticks: Path | None = None
    calendar: Path | None = None
    groups: Path | None = None
    panel: Path | None = None
    group: str | None = None
    tau: int | None = None
    lags: tuple[int, ...] = ()
    saturation_tol: float | None = None

    @property
    def uses_panel(self) -> bool:
        return self.panel is not None


@dataclass(frozen=True)
class SynthRun:
    """Параметры команды synth."""

    model: str
    out: Path
    n: int
    seed: int
    t: int | None = None
    rho: float = 0.0
    sessions: int = 250
    intensities: tuple[float, ...] = (0.2,)
    synchronous: bool = False
    reaction_trades: float | None = None


def read_config_file(path: str | Path) -> dict:
    """
    Читает YAML-файл конфигурации в словарь.

    Ключи можно писать через дефис, как флаги (saturation-tol).
    """
    path = Path(path)
    try:
        content = yaml.safe_load(path.read_text(encoding='utf-8'))
    except OSError as exc:
        raise InputError(f'Не удалось прочитать файл конфигурации {path}: {exc.strerror}') from exc
    except yaml.YAMLError as exc:
        raise InputError(f'Файл конфигурации {path} не является корректным YAML: {exc}') from exc

    if content is None:
        return {}
    if not isinstance(content, dict):
        raise InputError(f'Файл конфигурации {path} должен содержать словарь параметров')
    return {str(key).replace('-', '_'): value for key, value in content.items()}
