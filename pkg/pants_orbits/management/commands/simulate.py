from pathlib import Path

from pants_orbits.dynamics import integrate, lagrange_jacobi_residual
from pants_orbits.exports import load_initial_state, write_trajectory_csv
from pants_orbits.management.base import PantsCommand


class Command(PantsCommand):
    help = 'Integrate the inverse cube three-body equations from a JSON initial state'

    def add_command_arguments(self, parser):
        parser.add_argument('initial_state', help='JSON file with positions and velocities')
        parser.add_argument('--t-end', type=float, default=1.0, help='Final time')
        parser.add_argument('--name', default='trajectory.csv', help='Output file name')

    def run(self, config, *args, **options):
        state = load_initial_state(options['initial_state'])
        traj = integrate(state, options['t_end'], tol=config.tol, guard=config.collision_guard)
        target = write_trajectory_csv(traj, Path(config.output_dir) / options['name'])

        series = traj.invariant_series()
        drift = {key: float(abs(series[key] - series[key][0]).max()) for key in ('E', 'C')}
        self.stdout.write(f"{len(traj)} samples to t={traj.t[-1]:.6g} -> {target}")
        self.stdout.write(f"energy drift {drift['E']:.3e}, angular momentum drift {drift['C']:.3e}")
        if len(traj) >= 3:
            self.stdout.write(f"Lagrange-Jacobi residual {lagrange_jacobi_residual(traj):.3e}")
        if traj.collision_approach:
            self.stdout.write(self.style.WARNING('stopped at the collision guard'))
