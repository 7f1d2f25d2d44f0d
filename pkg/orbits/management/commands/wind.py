from pathlib import Path

from django.conf import settings

from orbits.library import OrbitLibrary, orbit_id
from orbits.services import CollisionOrbit, OrbitFinderService, ShotParameters
from pants_orbits.exceptions import LibraryError
from pants_orbits.management.base import PantsCommand
from pants_orbits.syzygy import parse_sequence


class Command(PantsCommand):
    help = 'Perturb a straight collision orbit into a family of winding orbits'

    def add_command_arguments(self, parser):
        parser.add_argument('sequence', help='Finite stutter-free sequence with a straight orbit')
        parser.add_argument('--count', type=int, default=3, help='Family members per sign of eps')
        parser.add_argument('--straight', help='Id of the straight orbit (default: <sequence>-S-0)')

    def _straight(self, library, finder, target, ident):
        try:
            record = library.get(ident)
        except LibraryError:
            self.stdout.write(f"{ident} not in the library, finding it first")
            primary, partner = finder.find_straight(target)
            first = library.store(primary, ordinal=0)
            library.store(partner, ordinal=1, mirror_of=first)
            return primary
        shot = record['shot']
        return CollisionOrbit(
            library.load_path(ident, finder.config.chart_guard), record['start_end'], record['finish_end'],
            parse_sequence(record['realized']),
            ShotParameters(shot['depth'], shot['angle'], shot['window'], tuple(shot['window_history'])),
            'S', target,
        )

    def run(self, config, *args, **options):
        target = parse_sequence(options['sequence'], require_stutter_free=True)
        finder = OrbitFinderService(config)
        library = OrbitLibrary(Path(config.output_dir) / settings.PANTS_LIBRARY_NAME)
        ident = options['straight'] or orbit_id(target.to_text(), 'S', 0)
        straight = self._straight(library, finder, target, ident)

        family = finder.find_winding(straight, config.eps, count=options['count'])
        if family == [straight]:
            self.stdout.write(f"eps = 0: {ident} is its own family")
            return
        for orbit in family:
            stored = library.store(orbit)
            self.stdout.write(f"{stored}: eps {orbit.epsilon:+.3e}, code {orbit.realized.to_text()}, "
                              f"nearest member {orbit.verification['member_distance']:.1e}")
