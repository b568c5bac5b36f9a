#!/usr/bin/env python
"""
Точка входа командной строки spectra-lab.

    python manage.py analyze --ticks DIR --calendar FILE --groups FILE --tau 10 --out DIR
    python manage.py remove-market-mode ...

Дефисы в имени команды заменяются подчеркиваниями, поэтому допустимы оба
написания: remove-market-mode и remove_market_mode.
"""
import os
import sys


def main():
    """Запускает команду управления Django."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'spectra_lab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc

    argv = list(sys.argv)
    if len(argv) > 1 and not argv[1].startswith('-'):
        argv[1] = argv[1].replace('-', '_')
    execute_from_command_line(argv)


if __name__ == '__main__':
    main()
