"""
Single entry point for the pipeline: `pants-orbits <subcommand> [options]`.

Each subcommand is a Django management command; `check` runs the
`invariants` command (Django reserves `check` for its system checks).
"""

import logging
import os
import sys
from typing import List, Optional

logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    'simulate': 'simulate',
    'reduce': 'reduce',
    'curvature': 'curvature',
    'find': 'find',
    'wind': 'wind',
    'scan': 'scan',
    'lift': 'lift',
    'check': 'invariants',
}

USAGE = "usage: pants-orbits {" + ','.join(SUBCOMMANDS) + "} [options]"


def run(argv: Optional[List[str]] = None) -> int:
    """
    Dispatch a command line to its management command

    Returns:
        0 on success, 1 when the command failed, 2 for an unknown subcommand
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('-h', '--help'):
        print(USAGE)
        return 0 if argv else 2
    name = SUBCOMMANDS.get(argv[0])
    if name is None:
        print(f"unknown subcommand {argv[0]!r}\n{USAGE}", file=sys.stderr)
        return 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'pants_orbits.settings')
    import django
    from django.core.management import call_command
    from django.core.management.base import CommandError

    django.setup()
    try:
        call_command(name, *argv[1:])
    except CommandError as e:
        print(f"{argv[0]}: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
