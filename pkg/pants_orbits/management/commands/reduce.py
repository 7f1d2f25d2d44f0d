from pathlib import Path

import numpy as np

from pants_orbits.dynamics import center
from pants_orbits.exports import read_trajectory_csv, write_path_csv
from pants_orbits.geodesics import path_from_points
from pants_orbits.management.base import PantsCommand
from pants_orbits.shape import shape_map
from pants_orbits.syzygy import cancel_stutters, code


class Command(PantsCommand):
    help = 'Project a trajectory CSV to the shape sphere and print its syzygy sequence'

    def add_command_arguments(self, parser):
        parser.add_argument('trajectory', help='Trajectory CSV written by simulate')
        parser.add_argument('--name', default='shape_path.csv', help='Output file name')

    def run(self, config, *args, **options):
        traj = read_trajectory_csv(options['trajectory'])
        points = np.array([shape_map(center(state.config)).u for state in traj.states()])
        path = path_from_points(points)
        target = write_path_csv(path, Path(config.output_dir) / options['name'])
        sequence = code(path, config.horizon_depth, config.tail_depth)
        self.stdout.write(f"syzygy sequence: {sequence.to_text() or '(empty)'}")
        if not sequence.stutter_free:
            self.stdout.write(f"without stutters: {cancel_stutters(sequence).to_text() or '(empty)'}")
        self.stdout.write(f"{len(path)} shape samples -> {target}")
