import csv
from pathlib import Path

from orbits.services import OrbitFinderService
from pants_orbits.management.base import PantsCommand


class Command(PantsCommand):
    help = 'Tabulate codes and tail classes of geodesics launched out of an end'

    def add_command_arguments(self, parser):
        parser.add_argument('end', choices=['B12', 'B13', 'B23'])
        parser.add_argument('--name', help='Output CSV name (default: scan_<end>.csv)')

    def run(self, config, *args, **options):
        rows = OrbitFinderService(config).scan(options['end'], progress=options['verbosity'] > 1)
        target = Path(config.output_dir) / (options['name'] or f"scan_{options['end']}.csv")
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open('w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['phi', 'code', 'tail', 'end', 'drift', 'next_arc'])
            for row in rows:
                writer.writerow(['%.17g' % row.phi, row.code, row.tail, row.end or '',
                                 row.drift, row.next_arc or ''])
        kinds = {}
        for row in rows:
            kinds[row.tail] = kinds.get(row.tail, 0) + 1
        self.stdout.write(f"{len(rows)} launches from {options['end']}: {kinds} -> {target}")
