"""
Запись артефактов: CSV (pandas), JSON (рендерер DRF), SVG (matplotlib).

Каждый файл пишется во временный файл того же каталога и переименовывается
через os.replace, поэтому файл результата либо записан целиком, либо
отсутствует. Записи в один каталог выполняются под общей блокировкой.
"""

import io
import logging
import os
import threading
import uuid
from pathlib import Path

from rest_framework.renderers import JSONRenderer

import numpy as np
import pandas as pd

from .conf import spectra_settings
from .epps import EppsCurve
from .plots import figure_to_svg
from .returns import ReturnPanel
from .spectra import EigenSystem

logger = logging.getLogger(__name__)

_locks: dict[Path, threading.Lock] = {}
_locks_guard = threading.Lock()


def _directory_lock(directory: Path) -> threading.Lock:
    with _locks_guard:
        return _locks.setdefault(directory, threading.Lock())


class ArtifactWriter:
    """Атомарная запись файлов в каталог результата."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir).resolve()
        self.lock = _directory_lock(self.out_dir)
        self.written: list[Path] = []

    def write_bytes(self, name: str, data: bytes) -> Path:
        target = self.out_dir / name
        temporary = target.parent / f'.tmp-{uuid.uuid4().hex}-{target.name}'

        with self.lock:
            target.parent.mkdir(parents=True, exist_ok=True)
            try:
                temporary.write_bytes(data)
                os.replace(temporary, target)
            except BaseException:
                temporary.unlink(missing_ok=True)
                raise
            self.written.append(target)

        logger.debug('Записан %s (%d байт)', target, len(data))
        return target

    def write_text(self, name: str, text: str) -> Path:
        return self.write_bytes(name, text.encode('utf-8'))

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format=spectra_settings.FLOAT_FORMAT, lineterminator='\n')
        return self.write_text(name, buffer.getvalue())

    def write_json(self, name: str, data) -> Path:
        content = JSONRenderer().render(data, renderer_context={'indent': 2})
        return self.write_bytes(name, content + b'\n')

    def write_svg(self, name: str, figure) -> Path:
        return self.write_bytes(name, figure_to_svg(figure))


def spectrum_frame(eigensystem: EigenSystem) -> pd.DataFrame:
    return pd.DataFrame({
        'j': np.arange(1, eigensystem.order + 1),
        'lambda': eigensystem.eigenvalues,
    })


def eigenvector_frame(eigensystem: EigenSystem) -> pd.DataFrame:
    """Компоненты v^j_a в длинном формате: j, alpha, stock_id, component."""
    n = eigensystem.order
    stock_ids = list(eigensystem.stock_ids) or [str(alpha) for alpha in range(1, n + 1)]
    return pd.DataFrame({
        'j': np.repeat(np.arange(1, n + 1), n),
        'alpha': np.tile(np.arange(1, n + 1), n),
        'stock_id': np.tile(np.array(stock_ids, dtype=object), n),
        'component': eigensystem.eigenvectors.T.reshape(-1),
    })


def curve_frame(curve: EppsCurve) -> pd.DataFrame:
    return pd.DataFrame({
        'tau_minutes': [point.tau for point in curve.points],
        'lambda1': [point.lambda1 for point in curve.points],
        'lambda1_normalized': [point.lambda1_normalized for point in curve.points],
        'lambda_max': [point.lambda_max for point in curve.points],
        'Q': [point.q for point in curve.points],
        'T_effective': [point.t_effective for point in curve.points],
    })


def panel_frame(panel: ReturnPanel) -> pd.DataFrame:
    """Панель для просмотра: метка времени и столбец на строку M."""
    frame = pd.DataFrame(panel.matrix.T, columns=list(panel.stock_ids))
    frame.insert(0, 'timestamp', panel.timestamps)
    return frame


def write_spectrum_csv(writer: ArtifactWriter, name: str, eigensystem: EigenSystem) -> Path:
    return writer.write_frame(name, spectrum_frame(eigensystem))


def write_eigenvector_csv(writer: ArtifactWriter, name: str, eigensystem: EigenSystem) -> Path:
    return writer.write_frame(name, eigenvector_frame(eigensystem))


def write_curve_csv(writer: ArtifactWriter, name: str, curve: EppsCurve) -> Path:
    return writer.write_frame(name, curve_frame(curve))


def write_panel_csv(writer: ArtifactWriter, name: str, panel: ReturnPanel) -> Path:
    return writer.write_frame(name, panel_frame(panel))
