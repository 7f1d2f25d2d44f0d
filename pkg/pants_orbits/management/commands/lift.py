from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from orbits.library import OrbitLibrary
from pants_orbits.exports import write_report, write_trajectory_csv
from pants_orbits.lifting import lift_orbit
from pants_orbits.management.base import PantsCommand


class Command(PantsCommand):
    help = 'Lift a library orbit to a planar zero-energy solution and verify it'

    def add_command_arguments(self, parser):
        parser.add_argument('orbit_id', help='Orbit id, e.g. 31-S-0')
        parser.add_argument('--residual-tol', type=float, default=1e-5,
                            help='Largest relative residual of the equations of motion')
        parser.add_argument('--library', help='Library file (default: output dir / orbit_library.json)')

    def run(self, config, *args, **options):
        library = OrbitLibrary(options['library'] or Path(config.output_dir) / settings.PANTS_LIBRARY_NAME)
        ident = options['orbit_id']
        path = library.load_path(ident, config.chart_guard)
        lifted = lift_orbit(path, metric_guard=config.metric_guard, tol=options['residual_tol'])

        out = Path(config.output_dir) / 'lifts'
        write_trajectory_csv(lifted.trajectory, out / f"{ident}.csv")
        if lifted.report is None:
            raise CommandError(f"lift of {ident} has only {len(lifted.trajectory)} samples")
        report = dict(lifted.report.as_dict(), orbit_id=ident)
        write_report(report, out / f"{ident}.json")

        r = lifted.report
        self.stdout.write(f"{ident}: {r.samples} samples, eq1 relative residual {r.eq1_relative:.2e}, "
                          f"|E| {r.max_abs_E:.1e}, |C| {r.max_abs_C:.1e}, |I-1| {r.max_abs_I_minus_1:.1e}")
        if r.t_collision is not None:
            self.stdout.write(f"collision time estimate t_c = {r.t_collision:.12g}")
        if not r.ok:
            raise CommandError(f"verification of {ident} failed at sample {r.offending_index}")
        self.stdout.write(self.style.SUCCESS('verification passed'))
