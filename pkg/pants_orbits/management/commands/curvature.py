from pathlib import Path

from pants_orbits.exports import write_curvature_csv
from pants_orbits.management.base import PantsCommand
from pants_orbits.shape import curvature_grid


class Command(PantsCommand):
    help = 'Write the conformal factor and curvature of the reduced metric on a spherical grid'

    def add_command_arguments(self, parser):
        parser.add_argument('--n-theta', type=int, default=90)
        parser.add_argument('--n-phi', type=int, default=180)
        parser.add_argument('--name', default='curvature.csv')

    def run(self, config, *args, **options):
        rows = curvature_grid(options['n_theta'], options['n_phi'], exclude=config.metric_guard)
        target = Path(config.output_dir) / options['name']
        count = write_curvature_csv(rows, target)
        self.stdout.write(f"{count} grid points -> {target}")
