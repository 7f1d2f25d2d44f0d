from pathlib import Path

from django.conf import settings

from orbits.library import OrbitLibrary
from orbits.services import OrbitFinderService
from pants_orbits.management.base import PantsCommand
from pants_orbits.syzygy import parse_sequence


class Command(PantsCommand):
    help = 'Find the two straight collision orbits of each target syzygy sequence'

    def add_command_arguments(self, parser):
        parser.add_argument('sequences', nargs='+', help='Finite stutter-free sequences, e.g. 31')

    def run(self, config, *args, **options):
        targets = [parse_sequence(text, require_stutter_free=True) for text in options['sequences']]
        finder = OrbitFinderService(config)
        library = OrbitLibrary(Path(config.output_dir) / settings.PANTS_LIBRARY_NAME)
        for primary, partner in finder.find_many(targets, progress=options['verbosity'] > 1):
            first = library.store(primary, ordinal=0)
            second = library.store(partner, ordinal=1, mirror_of=first)
            for ident, orbit in ((first, primary), (second, partner)):
                self.stdout.write(
                    f"{ident}: {orbit.start_end} -> {orbit.finish_end}, code {orbit.realized.to_text()}, "
                    f"phi {orbit.shot.angle:.12f}, window {orbit.shot.window:.1e}"
                )
            self.stdout.write(f"mirror distance {primary.verification['mirror_distance']:.2e}")
        self.stdout.write(f"{len(targets)} targets, {finder.reused} grid launches reused")
